#pragma once

// Experiment configuration files: nested key-value text.
//
//   # comment
//   include = chip_default.cfg      # relative to this file
//   [chip]
//   n_neurons = 256
//   [chip.neuron]
//   threshold = 20e-12
//
// Keys are flattened to `section.key`. Included files are read first, so the
// including file overrides them.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace neuroloop {

class Config {
public:
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text, const std::filesystem::path& base_dir = ".");

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated list.
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<long long> get_ints(const std::string& key, const std::vector<long long>& fallback) const;

    // Path values are resolved relative to the file that defined them.
    std::filesystem::path get_path(const std::string& key, const std::filesystem::path& fallback) const;
    std::vector<std::filesystem::path> get_paths(const std::string& key,
                                                 const std::vector<std::filesystem::path>& fallback) const;

    // Keys that were present but never read; lets commands flag typos.
    std::vector<std::string> unused_keys() const;

    const std::map<std::string, std::string>& values() const { return values_; }

    // Canonical dump, one `key = value` per line in key order.
    std::string dump() const;

private:
    void parse_into(const std::string& text, const std::filesystem::path& base_dir, int depth);
    const std::string* find(const std::string& key) const;

    std::map<std::string, std::string> values_;
    std::map<std::string, std::filesystem::path> origin_;
    mutable std::set<std::string> used_;
};

}  // namespace neuroloop

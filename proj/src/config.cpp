#include "neuroloop/config.hpp"

#include <fstream>
#include <sstream>

#include "neuroloop/errors.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop {

namespace {

constexpr int kMaxIncludeDepth = 8;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string unquote(std::string_view v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return std::string(v);
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
    Config c;
    c.parse_into(read_file(path), path.parent_path(), 0);
    return c;
}

Config Config::parse(const std::string& text, const std::filesystem::path& base_dir) {
    Config c;
    c.parse_into(text, base_dir, 0);
    return c;
}

void Config::parse_into(const std::string& text, const std::filesystem::path& base_dir, int depth) {
    if (depth > kMaxIncludeDepth) throw ConfigError("include", "includes nested too deeply");
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError("line " + std::to_string(line_no), "unterminated section");
            section = std::string(trim(body.substr(1, body.size() - 2)));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        }
        const auto key = std::string(trim(body.substr(0, eq)));
        const auto value = unquote(trim(body.substr(eq + 1)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
        if (key == "include" && section.empty()) {
            const auto path = base_dir / value;
            parse_into(read_file(path), path.parent_path(), depth + 1);
            continue;
        }
        const auto full = section.empty() ? key : section + "." + key;
        values_[full] = value;
        origin_[full] = base_dir;
    }
}

const std::string* Config::find(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    try {
        return parse_double(*v, key);
    } catch (const ParseError& e) {
        throw ConfigError(key, e.what());
    }
}

long long Config::get_int(const std::string& key, long long fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    try {
        return parse_int<long long>(*v, key);
    } catch (const ParseError& e) {
        throw ConfigError(key, e.what());
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError(key, "not a boolean: '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    if (trim(*v).empty()) return out;
    try {
        for (auto part : split(*v, ',')) out.push_back(parse_double(part, key));
    } catch (const ParseError& e) {
        throw ConfigError(key, e.what());
    }
    return out;
}

std::vector<long long> Config::get_ints(const std::string& key, const std::vector<long long>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<long long> out;
    if (trim(*v).empty()) return out;
    try {
        for (auto part : split(*v, ',')) out.push_back(parse_int<long long>(part, key));
    } catch (const ParseError& e) {
        throw ConfigError(key, e.what());
    }
    return out;
}

std::filesystem::path Config::get_path(const std::string& key, const std::filesystem::path& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    const std::filesystem::path p(*v);
    return p.is_absolute() ? p : origin_.at(key) / p;
}

std::vector<std::filesystem::path> Config::get_paths(const std::string& key,
                                                     const std::vector<std::filesystem::path>& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    std::vector<std::filesystem::path> out;
    for (auto part : split(*v, ',')) {
        const std::filesystem::path p(std::string(trim(part)));
        if (p.empty()) continue;
        out.push_back(p.is_absolute() ? p : origin_.at(key) / p);
    }
    return out;
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (!used_.count(k)) out.push_back(k);
    }
    return out;
}

std::string Config::dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
    return out.str();
}

}  // namespace neuroloop

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace neuroloop {

inline constexpr int kMinLevel = -3;
inline constexpr int kMaxLevel = 3;

// One synapse on the array. Columns [0, n_plastic) form the plastic half,
// columns [n_plastic, n_plastic + n_static) the fixed-weight half.
struct SynapseRef {
    int neuron = 0;
    int column = 0;

    friend auto operator<=>(const SynapseRef&, const SynapseRef&) = default;
};

// Where a spike comes from: an external AER input address or the output of
// an on-chip neuron.
struct Source {
    enum class Kind : std::uint8_t { input, neuron };
    Kind kind = Kind::input;
    int index = 0;

    static Source input(int address) { return {Kind::input, address}; }
    static Source neuron(int id) { return {Kind::neuron, id}; }
    friend auto operator<=>(const Source&, const Source&) = default;
};

struct ArrayShape {
    int n_neurons = 256;
    int n_plastic_cols = 256;
    int n_static_cols = 256;

    int columns() const { return n_plastic_cols + n_static_cols; }
    bool is_plastic(int column) const { return column >= 0 && column < n_plastic_cols; }
    bool is_static(int column) const { return column >= n_plastic_cols && column < columns(); }
    bool contains(SynapseRef s) const {
        return s.neuron >= 0 && s.neuron < n_neurons && s.column >= 0 && s.column < columns();
    }
};

// Programmable state of the synapse array: static weight levels, initial
// plastic states, and the routing tables that fan events out to synapses.
class ConnectivityMatrix {
public:
    ConnectivityMatrix() = default;
    explicit ConnectivityMatrix(ArrayShape shape);

    const ArrayShape& shape() const { return shape_; }

    // Level in [kMinLevel, kMaxLevel]; column must be in the static half.
    void set_static(SynapseRef s, int level);
    int static_level(SynapseRef s) const;

    void enable_plastic(SynapseRef s, double initial_state);
    bool plastic_enabled(SynapseRef s) const;
    double initial_plastic_state(SynapseRef s) const;

    void route(Source from, SynapseRef to);
    const std::vector<SynapseRef>& targets(Source from) const;

    // Reserves the next unused static column on `neuron`. Throws CapacityError
    // when the static half is full.
    int allocate_static_column(int neuron);
    int allocate_plastic_column(int neuron);

    // Adds a fixed synapse from `from` to `neuron` on a freshly allocated
    // column. Level 0 is a no-op.
    void connect_static(Source from, int neuron, int level);
    void connect_plastic(Source from, int neuron, double initial_state);

    // Adds every synapse and route of `other`. Synapses are moved onto freshly
    // allocated columns of the same neuron, so fragments built independently
    // never collide. Shapes must match.
    void merge(const ConnectivityMatrix& other);

    std::size_t static_synapse_count() const;
    std::size_t plastic_synapse_count() const;

    // All routing entries in deterministic order.
    const std::map<Source, std::vector<SynapseRef>>& routes() const { return routes_; }

private:
    std::size_t static_index(SynapseRef s) const;
    std::size_t plastic_index(SynapseRef s) const;
    void check(SynapseRef s) const;

    ArrayShape shape_{};
    std::vector<std::int8_t> static_levels_;
    std::vector<double> plastic_init_;
    std::vector<std::uint8_t> plastic_enabled_;
    std::map<Source, std::vector<SynapseRef>> routes_;
    std::vector<int> next_static_;
    std::vector<int> next_plastic_;
};

// Text format:
//   [static]   neuron,column,level
//   [plastic]  neuron,column,initial_state
//   [routing]  input_address -> neuron:column   (or nK -> neuron:column for
//              recurrent routing from neuron K)
ConnectivityMatrix read_connectivity(std::istream& in, ArrayShape shape);
ConnectivityMatrix read_connectivity_file(const std::string& path, ArrayShape shape);
void write_connectivity(std::ostream& out, const ConnectivityMatrix& m);

}  // namespace neuroloop

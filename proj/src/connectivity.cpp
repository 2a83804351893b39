#include "neuroloop/connectivity.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "neuroloop/errors.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop {

namespace {

const std::vector<SynapseRef> kNoTargets;

std::string describe(SynapseRef s) {
    return "(" + std::to_string(s.neuron) + ", " + std::to_string(s.column) + ")";
}

}  // namespace

ConnectivityMatrix::ConnectivityMatrix(ArrayShape shape)
    : shape_(shape),
      static_levels_(static_cast<std::size_t>(shape.n_neurons) * shape.n_static_cols, 0),
      plastic_init_(static_cast<std::size_t>(shape.n_neurons) * shape.n_plastic_cols, 0.0),
      plastic_enabled_(static_cast<std::size_t>(shape.n_neurons) * shape.n_plastic_cols, 0),
      next_static_(shape.n_neurons, shape.n_plastic_cols),
      next_plastic_(shape.n_neurons, 0) {
    if (shape.n_neurons <= 0 || shape.n_plastic_cols < 0 || shape.n_static_cols < 0) {
        throw ConfigError("chip", "array dimensions must be positive");
    }
}

void ConnectivityMatrix::check(SynapseRef s) const {
    if (!shape_.contains(s)) throw RoutingError("synapse " + describe(s) + " is not on the array");
}

std::size_t ConnectivityMatrix::static_index(SynapseRef s) const {
    check(s);
    if (!shape_.is_static(s.column)) {
        throw RoutingError("column " + std::to_string(s.column) + " is not a static column");
    }
    return static_cast<std::size_t>(s.neuron) * shape_.n_static_cols +
           (s.column - shape_.n_plastic_cols);
}

std::size_t ConnectivityMatrix::plastic_index(SynapseRef s) const {
    check(s);
    if (!shape_.is_plastic(s.column)) {
        throw RoutingError("column " + std::to_string(s.column) + " is not a plastic column");
    }
    return static_cast<std::size_t>(s.neuron) * shape_.n_plastic_cols + s.column;
}

void ConnectivityMatrix::set_static(SynapseRef s, int level) {
    if (level < kMinLevel || level > kMaxLevel) {
        throw DomainError("static weight level " + std::to_string(level) + " outside [-3, 3]");
    }
    static_levels_[static_index(s)] = static_cast<std::int8_t>(level);
    auto& next = next_static_[s.neuron];
    if (s.column >= next) next = s.column + 1;
}

int ConnectivityMatrix::static_level(SynapseRef s) const { return static_levels_[static_index(s)]; }

void ConnectivityMatrix::enable_plastic(SynapseRef s, double initial_state) {
    if (!(initial_state >= 0.0 && initial_state <= 1.0)) {
        throw DomainError("plastic state must lie in [0, 1]");
    }
    const auto i = plastic_index(s);
    plastic_enabled_[i] = 1;
    plastic_init_[i] = initial_state;
    auto& next = next_plastic_[s.neuron];
    if (s.column >= next) next = s.column + 1;
}

bool ConnectivityMatrix::plastic_enabled(SynapseRef s) const {
    return plastic_enabled_[plastic_index(s)] != 0;
}

double ConnectivityMatrix::initial_plastic_state(SynapseRef s) const {
    return plastic_init_[plastic_index(s)];
}

void ConnectivityMatrix::route(Source from, SynapseRef to) {
    check(to);
    if (from.index < 0) throw RoutingError("negative source index");
    if (from.kind == Source::Kind::neuron && from.index >= shape_.n_neurons) {
        throw RoutingError("source neuron " + std::to_string(from.index) + " does not exist");
    }
    routes_[from].push_back(to);
}

const std::vector<SynapseRef>& ConnectivityMatrix::targets(Source from) const {
    const auto it = routes_.find(from);
    return it == routes_.end() ? kNoTargets : it->second;
}

int ConnectivityMatrix::allocate_static_column(int neuron) {
    check({neuron, 0});
    auto& next = next_static_[neuron];
    if (next >= shape_.columns()) {
        throw CapacityError("neuron " + std::to_string(neuron) + " has no free static column");
    }
    return next++;
}

int ConnectivityMatrix::allocate_plastic_column(int neuron) {
    check({neuron, 0});
    auto& next = next_plastic_[neuron];
    if (next >= shape_.n_plastic_cols) {
        throw CapacityError("neuron " + std::to_string(neuron) + " has no free plastic column");
    }
    return next++;
}

void ConnectivityMatrix::connect_static(Source from, int neuron, int level) {
    if (level == 0) return;
    const SynapseRef s{neuron, allocate_static_column(neuron)};
    set_static(s, level);
    route(from, s);
}

void ConnectivityMatrix::connect_plastic(Source from, int neuron, double initial_state) {
    const SynapseRef s{neuron, allocate_plastic_column(neuron)};
    enable_plastic(s, initial_state);
    route(from, s);
}

void ConnectivityMatrix::merge(const ConnectivityMatrix& other) {
    const auto& o = other.shape_;
    if (o.n_neurons != shape_.n_neurons || o.n_plastic_cols != shape_.n_plastic_cols ||
        o.n_static_cols != shape_.n_static_cols) {
        throw CapacityError("cannot merge connectivity of different array shapes");
    }
    std::map<SynapseRef, SynapseRef> moved;
    for (int n = 0; n < o.n_neurons; ++n) {
        for (int c = 0; c < o.columns(); ++c) {
            const SynapseRef s{n, c};
            if (o.is_static(c)) {
                const int level = other.static_level(s);
                if (level == 0) continue;
                const SynapseRef to{n, allocate_static_column(n)};
                set_static(to, level);
                moved[s] = to;
            } else if (other.plastic_enabled(s)) {
                const SynapseRef to{n, allocate_plastic_column(n)};
                enable_plastic(to, other.initial_plastic_state(s));
                moved[s] = to;
            }
        }
    }
    for (const auto& [from, targets] : other.routes_) {
        for (const auto& t : targets) {
            const auto it = moved.find(t);
            if (it != moved.end()) route(from, it->second);
        }
    }
}

std::size_t ConnectivityMatrix::static_synapse_count() const {
    std::size_t n = 0;
    for (auto level : static_levels_) n += level != 0;
    return n;
}

std::size_t ConnectivityMatrix::plastic_synapse_count() const {
    std::size_t n = 0;
    for (auto e : plastic_enabled_) n += e != 0;
    return n;
}

namespace {

SynapseRef parse_target(std::string_view s, int line_no) {
    const auto parts = split(s, ':');
    if (parts.size() != 2) {
        throw ParseError("connectivity line " + std::to_string(line_no) + ": expected neuron:column");
    }
    return {parse_int<int>(parts[0], "neuron"), parse_int<int>(parts[1], "column")};
}

}  // namespace

ConnectivityMatrix read_connectivity(std::istream& in, ArrayShape shape) {
    ConnectivityMatrix m(shape);
    enum class Section { none, statics, plastic, routing } section = Section::none;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body == "[static]") {
            section = Section::statics;
            continue;
        }
        if (body == "[plastic]") {
            section = Section::plastic;
            continue;
        }
        if (body == "[routing]") {
            section = Section::routing;
            continue;
        }
        const auto where = "connectivity line " + std::to_string(line_no);
        switch (section) {
            case Section::none:
                throw ParseError(where + ": entry outside of a section");
            case Section::statics: {
                const auto f = split(body, ',');
                if (f.size() != 3) throw ParseError(where + ": expected neuron,column,level");
                m.set_static({parse_int<int>(f[0], "neuron"), parse_int<int>(f[1], "column")},
                             parse_int<int>(f[2], "level"));
                break;
            }
            case Section::plastic: {
                const auto f = split(body, ',');
                if (f.size() != 3) throw ParseError(where + ": expected neuron,column,state");
                m.enable_plastic({parse_int<int>(f[0], "neuron"), parse_int<int>(f[1], "column")},
                                 parse_double(f[2], "plastic state"));
                break;
            }
            case Section::routing: {
                const auto arrow = body.find("->");
                if (arrow == std::string_view::npos) throw ParseError(where + ": expected '->'");
                const auto lhs = trim(body.substr(0, arrow));
                const auto rhs = trim(body.substr(arrow + 2));
                const Source from = (!lhs.empty() && lhs.front() == 'n')
                                        ? Source::neuron(parse_int<int>(lhs.substr(1), "source neuron"))
                                        : Source::input(parse_int<int>(lhs, "input address"));
                for (auto t : split(rhs, ' ')) {
                    if (t.empty()) continue;
                    m.route(from, parse_target(t, line_no));
                }
                break;
            }
        }
    }
    return m;
}

ConnectivityMatrix read_connectivity_file(const std::string& path, ArrayShape shape) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open connectivity file " + path);
    return read_connectivity(in, shape);
}

void write_connectivity(std::ostream& out, const ConnectivityMatrix& m) {
    const auto& s = m.shape();
    out << "[static]\n";
    for (int n = 0; n < s.n_neurons; ++n) {
        for (int c = s.n_plastic_cols; c < s.columns(); ++c) {
            if (const int level = m.static_level({n, c}); level != 0) {
                out << n << ',' << c << ',' << level << '\n';
            }
        }
    }
    out << "[plastic]\n";
    for (int n = 0; n < s.n_neurons; ++n) {
        for (int c = 0; c < s.n_plastic_cols; ++c) {
            if (m.plastic_enabled({n, c})) {
                out << n << ',' << c << ',' << format_double(m.initial_plastic_state({n, c})) << '\n';
            }
        }
    }
    out << "[routing]\n";
    for (const auto& [from, targets] : m.routes()) {
        for (const auto& t : targets) {
            if (from.kind == Source::Kind::neuron) out << 'n';
            out << from.index << " -> " << t.neuron << ':' << t.column << '\n';
        }
    }
}

}  // namespace neuroloop

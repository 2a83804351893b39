#include "neuroloop/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>

#include "neuroloop/errors.hpp"

namespace neuroloop {

namespace {

std::string ordinal_name(int k) { return "ordinal_" + std::to_string(k + 1); }
std::string memory_name(int k) { return "memory_" + std::to_string(k + 1); }

TimeUs to_us(double t) { return static_cast<TimeUs>(std::llround(t * 1e6)); }

// External stimulation during one stretch of time.
struct Stimulus {
    int ordinal = -1;        // group driven for the first drive_duration
    int item = -1;           // content location with an input bump
    bool cos = false;
};

class Harness {
public:
    Harness(Chip& chip, const SequenceNetwork& net, const SequenceParams& p, std::uint64_t seed)
        : chip_(chip), net_(net), p_(p), rng_(seed), content_(net.layout.at("content")),
          counts_(static_cast<std::size_t>(content_.size), 0) {}

    // Runs `duration` seconds of stimulation. With `until_bump`, stops early
    // once a bump has held its place for t_hold and returns its location.
    int run(double duration, const Stimulus& s, bool until_bump = false) {
        const TimeUs start = chip_.now();
        const TimeUs end = start + to_us(duration);
        const TimeUs drive_end = start + to_us(p_.drive_duration);
        int held = -1;
        TimeUs held_since = 0;
        while (chip_.now() < end) {
            const TimeUs t0 = chip_.now();
            const TimeUs t1 = std::min(end, t0 + kChunk);
            std::vector<AerEvent> in;
            if (s.ordinal >= 0 && t0 < drive_end) {
                poisson(net_.ordinal_input + s.ordinal, p_.drive_rate, t0, std::min(t1, drive_end), in);
            }
            if (s.cos) poisson(net_.cos_input, p_.cos_rate, t0, t1, in);
            if (s.item >= 0) {
                for (int j = 0; j < content_.size; ++j) {
                    const double d = j - s.item;
                    const double rate = p_.item_rate * std::exp(-d * d / (2 * p_.item_sigma * p_.item_sigma));
                    poisson(net_.content_input + j, rate, t0, t1, in);
                }
            }
            sort_events(in);
            observe(chip_.advance(t1, in), t1);
            if (!until_bump) continue;
            const int b = bump();
            if (b < 0 || held < 0 || std::abs(b - held) > p_.match_radius) {
                held = b;
                held_since = t1;
            } else if (t1 - held_since >= to_us(p_.t_hold)) {
                return held;
            }
        }
        return -1;
    }

private:
    static constexpr TimeUs kChunk = 10'000;
    static constexpr int kReach = 4;  // neighbourhood of the strongest neuron used for the centroid

    void poisson(int address, double rate, TimeUs t0, TimeUs t1, std::vector<AerEvent>& out) {
        if (!(rate > 0) || t1 <= t0) return;
        std::exponential_distribution<double> gap(rate * 1e-6);
        for (double t = static_cast<double>(t0) + gap(rng_); t < static_cast<double>(t1); t += gap(rng_)) {
            out.push_back({std::min(static_cast<TimeUs>(t), t1 - 1), address, EventKind::input});
        }
    }

    void observe(const std::vector<AerEvent>& spikes, TimeUs now) {
        for (const auto& e : spikes) {
            if (!content_.contains(e.address)) continue;
            recent_.push_back(e);
            ++counts_[static_cast<std::size_t>(e.address - content_.begin)];
        }
        const TimeUs from = now - to_us(p_.bump_window);
        while (!recent_.empty() && recent_.front().timestamp < from) {
            --counts_[static_cast<std::size_t>(recent_.front().address - content_.begin)];
            recent_.pop_front();
        }
    }

    // Centroid of the strongest neuron's neighbourhood, or -1 without a bump.
    int bump() const {
        const auto top = std::max_element(counts_.begin(), counts_.end());
        if (*top < p_.bump_min_count) return -1;
        const int c = static_cast<int>(top - counts_.begin());
        double sum = 0, weight = 0;
        for (int j = std::max(0, c - kReach); j <= std::min(content_.size - 1, c + kReach); ++j) {
            sum += j * counts_[static_cast<std::size_t>(j)];
            weight += counts_[static_cast<std::size_t>(j)];
        }
        return static_cast<int>(std::lround(sum / weight));
    }

    Chip& chip_;
    const SequenceNetwork& net_;
    const SequenceParams& p_;
    std::mt19937_64 rng_;
    const Population& content_;
    std::deque<AerEvent> recent_;
    std::vector<int> counts_;
};

}  // namespace

SequenceNetwork build_sequence_network(const SequenceParams& p) {
    validate(p.chip);
    if (p.n_items < 1 || p.group_size < 1) throw DomainError("sequence network needs at least one group");
    SequenceNetwork net{p.chip, NetworkLayout(p.chip.n_neurons), ConnectivityMatrix(p.chip.shape())};
    auto& L = net.layout;
    std::vector<Population> ordinal, memory;
    for (int k = 0; k < p.n_items; ++k) ordinal.push_back(L.add(ordinal_name(k), p.group_size));
    for (int k = 0; k < p.n_items; ++k) memory.push_back(L.add(memory_name(k), p.group_size));
    const auto content = L.add("content", p.n_locations);
    const auto content_inh = L.add("content_inh", p.content_inh);
    const auto cos = L.add("cos", p.cos_size);

    net.content_input = 0;
    net.ordinal_input = p.n_locations;
    net.cos_input = p.n_locations + p.n_items;
    if (net.cos_input + 1 > p.chip.input_addresses()) {
        throw CapacityError("sequence inputs need more addresses than the chip provides");
    }

    auto& m = net.connectivity;
    WtaSpec spec = p.content;
    spec.n_exc = p.n_locations;
    spec.n_inh = p.content_inh;
    m.merge(compile_wta(spec, {content.begin, content_inh.begin}, p.chip.shape()));
    for (int j = 0; j < content.size; ++j) {
        m.connect_static(Source::input(net.content_input + j), content[j], p.content_input_level);
    }

    for (int k = 0; k < p.n_items; ++k) {
        const auto& o = ordinal[static_cast<std::size_t>(k)];
        const auto& mem = memory[static_cast<std::size_t>(k)];
        connect_all(m, o, o, p.ordinal_self);
        for (int other = 0; other < p.n_items; ++other) {
            if (other == k) continue;
            connect_all(m, o, ordinal[static_cast<std::size_t>(other)], p.ordinal_cross);
            connect_all(m, o, memory[static_cast<std::size_t>(other)], p.ordinal_to_other_memory);
        }
        connect_all(m, o, mem, p.ordinal_to_memory);
        connect_all(m, mem, mem, p.memory_self);
        if (k + 1 < p.n_items) connect_all(m, mem, ordinal[static_cast<std::size_t>(k) + 1], p.memory_to_next);
        if (k > 0) connect_all(m, mem, memory[static_cast<std::size_t>(k) - 1], p.memory_reset);
        connect_all(m, cos, o, p.cos_to_ordinal);
        for (int i = 0; i < o.size; ++i) {
            m.connect_static(Source::input(net.ordinal_input + k), o[i], p.drive_level);
            for (int j = 0; j < content.size; ++j) m.connect_plastic(Source::neuron(o[i]), content[j], 0.0);
        }
    }
    connect_all(m, cos, content, p.cos_to_content);
    for (int i = 0; i < cos.size; ++i) m.connect_static(Source::input(net.cos_input), cos[i], p.drive_level);
    return net;
}

std::vector<std::vector<double>> synapse_states(const Chip& chip, const SequenceNetwork& net,
                                                const SequenceParams& p) {
    const auto& content = net.layout.at("content");
    const auto shape = net.connectivity.shape();
    std::vector<std::vector<double>> x;
    for (int k = 0; k < p.n_items; ++k) {
        const auto& o = net.layout.at(ordinal_name(k));
        for (int i = 0; i < o.size; ++i) {
            auto& row = x.emplace_back(static_cast<std::size_t>(content.size), 0.0);
            for (const auto& s : net.connectivity.targets(Source::neuron(o[i]))) {
                if (shape.is_plastic(s.column) && content.contains(s.neuron)) {
                    row[static_cast<std::size_t>(s.neuron - content.begin)] = chip.plastic_state(s);
                }
            }
        }
    }
    return x;
}

std::vector<std::vector<double>> learned_states(const Chip& chip, const SequenceNetwork& net,
                                                const SequenceParams& p) {
    const auto all = synapse_states(chip, net, p);
    const auto& content = net.layout.at("content");
    std::vector<std::vector<double>> x(static_cast<std::size_t>(p.n_items),
                                       std::vector<double>(static_cast<std::size_t>(content.size), 0.0));
    for (std::size_t r = 0; r < all.size(); ++r) {
        auto& row = x[r / static_cast<std::size_t>(p.group_size)];
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += all[r][j] / p.group_size;
    }
    return x;
}

double learning_margin(const std::vector<std::vector<double>>& learned, const std::vector<int>& items,
                       int radius) {
    double margin = 0;
    for (std::size_t k = 0; k < items.size() && k < learned.size(); ++k) {
        const auto& row = learned[k];
        double on = 0, off = 0;
        int n_on = 0, n_off = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (std::abs(static_cast<int>(j) - items[k]) <= radius) {
                on += row[j];
                ++n_on;
            } else {
                off += row[j];
                ++n_off;
            }
        }
        const double m = (n_on ? on / n_on : 0.0) - (n_off ? off / n_off : 0.0);
        margin = k == 0 ? m : std::min(margin, m);
    }
    return margin;
}

bool replay_matches(const std::vector<int>& replay, const std::vector<int>& items, int radius) {
    if (replay.size() != items.size()) return false;
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (std::abs(replay[k] - items[k]) > radius) return false;
    }
    return true;
}

SequenceResult run_sequence_experiment(const std::vector<int>& items, const SequenceParams& p,
                                       std::uint64_t seed) {
    if (static_cast<int>(items.size()) > p.n_items) {
        throw DomainError("sequence of " + std::to_string(items.size()) + " items exceeds " +
                          std::to_string(p.n_items) + " ordinal positions");
    }
    std::set<int> seen;
    for (int loc : items) {
        if (loc < 0 || loc >= p.n_locations) {
            throw DomainError("item location " + std::to_string(loc) + " outside the content pool");
        }
        if (!seen.insert(loc).second) throw DomainError("item location " + std::to_string(loc) + " repeated");
    }

    auto net = build_sequence_network(p);
    net.chip.seed = seed;
    Chip chip(net.chip, net.connectivity);
    Harness h(chip, net, p, seed * 0x9E3779B97F4A7C15ULL + 1);
    SequenceResult r;
    r.items = items;
    if (items.empty()) {
        r.synapses = synapse_states(chip, net, p);
        r.learned = learned_states(chip, net, p);
        return r;
    }

    for (std::size_t k = 0; k < items.size(); ++k) {
        h.run(p.t_item, {static_cast<int>(k), items[k], false});
        h.run(p.cos_duration, {-1, -1, true});
        h.run(p.settle, {});
    }
    r.synapses = synapse_states(chip, net, p);
    r.learned = learned_states(chip, net, p);
    r.margin = learning_margin(r.learned, items, p.match_radius);

    chip.clear_activity();
    const TimeUs replay_start = chip.now();
    r.replay_start = static_cast<double>(replay_start) * 1e-6;
    Stimulus start{0, -1, false};
    for (int k = 0; k < p.n_items; ++k) {
        const int loc = h.run(p.replay_timeout, start, true);
        start = {};
        if (loc < 0) break;
        r.replay.push_back(loc);
        r.replay_times.push_back(static_cast<double>(chip.now() - replay_start) * 1e-6);
        if (p.idle_gap > 0) h.run(p.idle_gap, {});
        h.run(p.cos_duration, {-1, -1, true});
        h.run(p.settle, {});
    }
    r.energy = chip.energy_report();
    r.raster = chip.read_raster();
    return r;
}

}  // namespace neuroloop

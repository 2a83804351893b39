#include "neuroloop/wta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "neuroloop/errors.hpp"

namespace neuroloop {

namespace {

double profile(const WtaStimulus& s, int i, double sigma) {
    const double d = static_cast<double>(i - s.location);
    return s.rate * std::exp(-d * d / (2 * sigma * sigma));
}

// Target credited with a position, or -1 when none lies within the radius.
// Overlapping neighbourhoods go to the nearer target.
int credit(const WtaTrialParams& p, double position) {
    int best = -1;
    double best_d = 0;
    for (std::size_t k = 0; k < p.targets.size(); ++k) {
        const double d = std::abs(position - p.targets[k].location);
        if (d <= p.winner_radius && (best < 0 || d < best_d)) {
            best = static_cast<int>(k);
            best_d = d;
        }
    }
    return best;
}

}  // namespace

std::vector<double> expected_input_density(const WtaTrialParams& p) {
    const int n = p.spec.n_exc;
    std::vector<double> rate(static_cast<std::size_t>(n), 0.0);
    for (const auto& t : p.targets) {
        for (int i = 0; i < n; ++i) rate[static_cast<std::size_t>(i)] += profile(t, i, p.profile_sigma);
    }
    const double f = p.background_fraction;
    if (!(f >= 0 && f < 1)) throw DomainError("background fraction must lie in [0, 1)");
    const double total = std::accumulate(rate.begin(), rate.end(), 0.0);
    const double background = total * f / (1 - f) / n;
    for (auto& r : rate) r += background;
    return rate;
}

std::vector<AerEvent> wta_input_stream(const WtaTrialParams& p, std::uint64_t seed) {
    const auto rate = expected_input_density(p);
    std::mt19937_64 rng(seed);
    std::vector<AerEvent> events;
    const double end = p.duration;
    for (std::size_t i = 0; i < rate.size(); ++i) {
        if (!(rate[i] > 0)) continue;
        std::exponential_distribution<double> gap(rate[i]);
        for (double t = gap(rng); t < end; t += gap(rng)) {
            events.push_back({static_cast<TimeUs>(t * 1e6), static_cast<std::int32_t>(i), EventKind::input});
        }
    }
    sort_events(events);
    return events;
}

double spatial_std(const std::vector<int>& positions) {
    if (positions.size() < 2) return 0.0;
    double mean = 0;
    for (int x : positions) mean += x;
    mean /= static_cast<double>(positions.size());
    double var = 0;
    for (int x : positions) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(positions.size()));
}

WtaTrialResult run_wta_trial(const WtaTrialParams& p, std::uint64_t seed) {
    ChipConfig cfg = p.chip;
    cfg.seed = seed;
    auto conn = compile_wta(p.spec, p.layout, cfg.shape());
    if (p.spec.n_exc > cfg.input_addresses()) throw CapacityError("WTA input wider than the address space");
    for (int i = 0; i < p.spec.n_exc; ++i) {
        conn.connect_static(Source::input(i), p.layout.exc_begin + i, p.input_level);
    }
    Chip chip(cfg, std::move(conn));

    WtaTrialResult r;
    r.input = wta_input_stream(p, seed);
    chip.advance(static_cast<TimeUs>(std::llround(p.duration * 1e6)), r.input);

    r.spike_counts.assign(static_cast<std::size_t>(p.spec.n_exc), 0);
    const auto settle = static_cast<TimeUs>(std::llround(p.settle_time * 1e6));
    std::vector<int> out_pos;
    for (const auto& s : chip.read_raster()) {
        const int e = s.neuron - p.layout.exc_begin;
        const int h = s.neuron - p.layout.inh_begin;
        if (e >= 0 && e < p.spec.n_exc) {
            r.output.push_back({s.timestamp, e});
            if (s.timestamp >= settle) {
                ++r.spike_counts[static_cast<std::size_t>(e)];
                out_pos.push_back(e);
            }
        } else if (h >= 0 && h < p.spec.n_inh) {
            r.inhibitory.push_back({s.timestamp, h});
        }
    }
    std::vector<int> in_pos;
    in_pos.reserve(r.input.size());
    for (const auto& e : r.input) {
        if (e.timestamp >= settle) in_pos.push_back(static_cast<int>(e.address));
    }
    r.input_std = spatial_std(in_pos);
    r.output_std = spatial_std(out_pos);

    std::vector<int> score(p.targets.size(), 0);
    for (int i = 0; i < p.spec.n_exc; ++i) {
        const int k = credit(p, i);
        if (k >= 0) score[static_cast<std::size_t>(k)] += r.spike_counts[static_cast<std::size_t>(i)];
    }
    if (!score.empty()) {
        const auto best = std::max_element(score.begin(), score.end());
        const bool unique = *best > 0 && std::count(score.begin(), score.end(), *best) == 1;
        r.winner = unique ? static_cast<int>(best - score.begin()) : -1;
    }
    r.energy = chip.energy_report();
    return r;
}

int continuous_winner(const WtaTrialParams& p) {
    FieldParams fp = p.field;
    fp.grid_size = p.spec.n_exc;
    const auto density = expected_input_density(p);
    std::vector<double> input(density.size());
    for (std::size_t i = 0; i < density.size(); ++i) input[i] = p.field_input_gain * density[i];
    const auto kernel = sample_kernel(p.field_kernel, fp.grid_size, fp.dx);
    auto s = FieldState::at_rest(fp);
    const double dt = fp.tau / 20;
    const auto steps = static_cast<long>(std::ceil(p.duration / dt));
    for (long k = 0; k < steps; ++k) s = field_step(s, fp, kernel, input, dt);
    const auto peaks = detect_peaks(s, 0.0);
    if (peaks.empty()) return -1;
    const auto top = std::max_element(peaks.begin(), peaks.end(),
                                      [](const Peak& a, const Peak& b) { return a.value < b.value; });
    return credit(p, top->position);
}

int strongest_target(const WtaTrialParams& p) {
    if (p.targets.empty()) return -1;
    const auto it = std::max_element(p.targets.begin(), p.targets.end(),
                                     [](const WtaStimulus& a, const WtaStimulus& b) { return a.rate < b.rate; });
    return static_cast<int>(it - p.targets.begin());
}

WtaTrialParams two_target_trial(const WtaTrialParams& base, std::uint64_t seed, double strong_rate,
                                double ratio) {
    if (!(ratio >= 1) || !(strong_rate > 0)) throw DomainError("two-target trial needs rate > 0 and ratio >= 1");
    const int n = base.spec.n_exc;
    const int margin = std::max(1, n / 8);
    const int min_gap = n / 4;
    if (n - 2 * margin <= min_gap) throw DomainError("WTA too small for two separated targets");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<int> loc(margin, n - 1 - margin);
    int a = loc(rng), b = loc(rng);
    while (std::abs(a - b) < min_gap) b = loc(rng);
    WtaTrialParams p = base;
    const bool swap = std::bernoulli_distribution(0.5)(rng);
    p.targets = {{a, strong_rate}, {b, strong_rate / ratio}};
    if (swap) std::swap(p.targets[0].rate, p.targets[1].rate);
    return p;
}

}  // namespace neuroloop

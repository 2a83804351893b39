#include "neuroloop/chip.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "neuroloop/errors.hpp"
#include "neuroloop/kernels.hpp"

namespace neuroloop {

void validate(const PlasticityParams& p) {
    auto fail = [](const char* field, const char* what) {
        throw ConfigError(std::string("plasticity.") + field, what);
    };
    if (!(p.up_jump >= 0)) fail("a", "must be non-negative");
    if (!(p.down_jump >= 0)) fail("b", "must be non-negative");
    if (!(p.drift_rate >= 0)) fail("drift_rate", "must be non-negative");
    if (!(p.calcium_tau > 0)) fail("calcium_tau", "must be positive");
    if (!(p.calcium_step >= 0)) fail("calcium_step", "must be non-negative");
    if (!(p.w_low >= 0 && p.w_low < p.w_high)) fail("w_low", "need 0 <= w_low < w_high");
    if (!(p.theta_up_low <= p.theta_up_high)) fail("theta_up_low", "band is empty");
    if (!(p.theta_down_low <= p.theta_down_high)) fail("theta_down_low", "band is empty");
    if (!(p.theta_down_high <= p.theta_up_low || p.theta_up_high <= p.theta_down_low)) {
        fail("theta_down_high", "potentiation and depression bands overlap");
    }
}

NeuronParams ChipConfig::default_neuron() {
    NeuronParams p;
    p.membrane = default_synapse(20e-3);
    p.threshold = 20e-12;
    p.reset_current = 0.0;
    p.refractory_period = 4e-3;
    return p;
}

DpiParams ChipConfig::default_synapse(double tau) {
    DpiParams p;
    p.leak_current = leak_current_for(p, tau);
    p.gain_current = p.leak_current;
    return p;
}

void validate(const ChipConfig& cfg) {
    if (cfg.n_neurons <= 0) throw ConfigError("chip.n_neurons", "must be positive");
    if (cfg.n_plastic_cols < 0) throw ConfigError("chip.n_plastic_cols", "must be non-negative");
    if (cfg.n_static_cols < 0) throw ConfigError("chip.n_static_cols", "must be non-negative");
    if (cfg.n_plastic_cols + cfg.n_static_cols <= 0) {
        throw ConfigError("chip.n_static_cols", "the array needs at least one column");
    }
    if (cfg.dt_us <= 0) throw ConfigError("chip.dt_us", "must be positive");
    if (!(cfg.mismatch_cv >= 0 && cfg.mismatch_cv <= 0.5)) {
        throw ConfigError("chip.mismatch_cv", "must lie in [0, 0.5]");
    }
    if (!(cfg.energy_per_sop >= 0)) throw ConfigError("chip.energy_per_sop", "must be non-negative");
    if (!(cfg.unit_current > 0)) throw ConfigError("chip.unit_current", "must be positive");
    auto wrap = [](const char* field, auto&& fn) {
        try {
            fn();
        } catch (const DomainError& e) {
            throw ConfigError(field, e.what());
        }
    };
    wrap("chip.neuron", [&] { validate(cfg.neuron); });
    wrap("chip.exc_synapse", [&] { validate(cfg.exc_synapse, TauWindow{}, false); });
    wrap("chip.inh_synapse", [&] { validate(cfg.inh_synapse, TauWindow{}, false); });
    validate(cfg.plasticity);
}

MismatchModel MismatchModel::sample(const ArrayShape& shape, double cv, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(shape.n_neurons);
    const auto syn = n * static_cast<std::size_t>(shape.columns());
    MismatchModel m;
    if (cv == 0.0) {
        m.membrane_tau.assign(n, 1.0);
        m.exc_tau.assign(n, 1.0);
        m.inh_tau.assign(n, 1.0);
        m.threshold.assign(n, 1.0);
        m.synapse_unit.assign(syn, 1.0);
        return m;
    }
    const double sigma = std::sqrt(std::log1p(cv * cv));
    const double mu = -0.5 * sigma * sigma;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](std::size_t count) {
        std::vector<double> v(count);
        for (auto& x : v) x = std::exp(mu + sigma * normal(rng));
        return v;
    };
    m.membrane_tau = draw(n);
    m.exc_tau = draw(n);
    m.inh_tau = draw(n);
    m.threshold = draw(n);
    m.synapse_unit = draw(syn);
    return m;
}

Chip::Chip(const ChipConfig& cfg) : Chip(cfg, ConnectivityMatrix(cfg.shape())) {}

Chip::Chip(const ChipConfig& cfg, ConnectivityMatrix connectivity)
    : cfg_(cfg), connectivity_(std::move(connectivity)) {
    validate(cfg_);
    const auto& shape = connectivity_.shape();
    if (shape.n_neurons != cfg_.n_neurons || shape.n_plastic_cols != cfg_.n_plastic_cols ||
        shape.n_static_cols != cfg_.n_static_cols) {
        throw ConfigError("chip.connectivity", "array shape does not match the chip");
    }
    mismatch_ = MismatchModel::sample(shape, cfg_.mismatch_cv, cfg_.seed);

    const auto n = static_cast<std::size_t>(cfg_.n_neurons);
    membrane_.assign(n, 0.0);
    exc_.assign(n, 0.0);
    inh_.assign(n, 0.0);
    bias_.assign(n, 0.0);
    calcium_.assign(n, 0.0);
    refractory_until_.assign(n, -1);
    threshold_.resize(n);
    membrane_tau_.resize(n);
    exc_tau_.resize(n);
    inh_tau_.resize(n);
    membrane_decay_.resize(n);
    exc_decay_.resize(n);
    inh_decay_.resize(n);

    const double dt = cfg_.dt();
    const double tau_m = time_constant(cfg_.neuron.membrane);
    const double tau_e = time_constant(cfg_.exc_synapse);
    const double tau_i = time_constant(cfg_.inh_synapse);
    for (std::size_t i = 0; i < n; ++i) {
        // Mismatch scales the integrating capacitance, hence tau, and leaves
        // the DC gain Ig/Itau untouched.
        membrane_tau_[i] = tau_m * mismatch_.membrane_tau[i];
        exc_tau_[i] = tau_e * mismatch_.exc_tau[i];
        inh_tau_[i] = tau_i * mismatch_.inh_tau[i];
        threshold_[i] = cfg_.neuron.threshold * mismatch_.threshold[i];
        membrane_decay_[i] = std::exp(-dt / membrane_tau_[i]);
        exc_decay_[i] = std::exp(-dt / exc_tau_[i]);
        inh_decay_[i] = std::exp(-dt / inh_tau_[i]);
    }
    membrane_gain_ = cfg_.neuron.membrane.gain();
    calcium_decay_ = std::exp(-dt / cfg_.plasticity.calcium_tau);
    refractory_us_ = static_cast<TimeUs>(std::llround(cfg_.neuron.refractory_period * 1e6));
    meter_.energy_per_sop = cfg_.energy_per_sop;

    const auto slots = n * static_cast<std::size_t>(cfg_.n_plastic_cols);
    plastic_x_.assign(slots, 0.0);
    plastic_time_.assign(slots, 0.0);
    plastic_on_.assign(slots, 0);
    for (int i = 0; i < cfg_.n_neurons; ++i) {
        for (int c = 0; c < cfg_.n_plastic_cols; ++c) {
            const SynapseRef s{i, c};
            if (!connectivity_.plastic_enabled(s)) continue;
            const auto slot = static_cast<std::size_t>(i) * cfg_.n_plastic_cols + c;
            plastic_on_[slot] = 1;
            plastic_x_[slot] = connectivity_.initial_plastic_state(s);
        }
    }
    build_targets();
}

void Chip::build_targets() {
    const auto& shape = connectivity_.shape();
    input_targets_.assign(static_cast<std::size_t>(cfg_.input_addresses()), {});
    neuron_targets_.assign(static_cast<std::size_t>(cfg_.n_neurons), {});
    for (const auto& [from, targets] : connectivity_.routes()) {
        std::vector<Target>* list = nullptr;
        if (from.kind == Source::Kind::input) {
            if (from.index >= cfg_.input_addresses()) {
                throw RoutingError("input address " + std::to_string(from.index) +
                                   " exceeds the input space of " +
                                   std::to_string(cfg_.input_addresses()));
            }
            list = &input_targets_[static_cast<std::size_t>(from.index)];
        } else {
            list = &neuron_targets_[static_cast<std::size_t>(from.index)];
        }
        for (const auto& t : targets) {
            const double unit = cfg_.unit_current *
                                mismatch_.synapse_unit[static_cast<std::size_t>(t.neuron) * shape.columns() +
                                                       static_cast<std::size_t>(t.column)];
            const auto slot = static_cast<std::size_t>(t.neuron) * shape.n_plastic_cols;
            if (shape.is_plastic(t.column)) {
                list->push_back({t.neuron, t.column, Target::Kind::plastic, unit,
                                 slot + static_cast<std::size_t>(t.column)});
                continue;
            }
            const int level = connectivity_.static_level(t);
            if (level == 0) continue;  // zero weight: the route does not reach a live synapse
            list->push_back({t.neuron, t.column,
                             level > 0 ? Target::Kind::excitatory : Target::Kind::inhibitory,
                             std::abs(level) * unit, 0});
        }
    }
}

std::size_t Chip::check(int neuron) const {
    if (neuron < 0 || neuron >= cfg_.n_neurons) {
        throw RoutingError("neuron " + std::to_string(neuron) + " does not exist");
    }
    return static_cast<std::size_t>(neuron);
}

void Chip::set_membrane(int neuron, double current) {
    if (!(current >= 0)) throw DomainError("membrane current must be non-negative");
    membrane_[check(neuron)] = current;
}

void Chip::set_bias_current(int neuron, double current) {
    if (!(current >= 0)) throw DomainError("bias current must be non-negative");
    bias_[check(neuron)] = current;
}

std::vector<double> Chip::time_constants() const {
    std::vector<double> taus;
    taus.reserve(membrane_tau_.size() * 3);
    taus.insert(taus.end(), membrane_tau_.begin(), membrane_tau_.end());
    taus.insert(taus.end(), exc_tau_.begin(), exc_tau_.end());
    taus.insert(taus.end(), inh_tau_.begin(), inh_tau_.end());
    return taus;
}

double Chip::drifted(std::size_t slot) const {
    const double x = plastic_x_[slot];
    const double elapsed = static_cast<double>(now_us_) * 1e-6 - plastic_time_[slot];
    const double shift = cfg_.plasticity.drift_rate * elapsed;
    return x >= 0.5 ? std::min(1.0, x + shift) : std::max(0.0, x - shift);
}

double Chip::plastic_state(SynapseRef s) const {
    if (!connectivity_.shape().is_plastic(s.column)) {
        throw RoutingError("column " + std::to_string(s.column) + " is not plastic");
    }
    const auto slot = check(s.neuron) * static_cast<std::size_t>(cfg_.n_plastic_cols) +
                      static_cast<std::size_t>(s.column);
    return plastic_on_[slot] ? drifted(slot) : plastic_x_[slot];
}

double Chip::plastic_weight(SynapseRef s) const {
    return plastic_state(s) < 0.5 ? cfg_.plasticity.w_low : cfg_.plasticity.w_high;
}

void Chip::update_plasticity(SynapseRef s) {
    if (!connectivity_.shape().is_plastic(s.column)) return;
    const auto n = check(s.neuron);
    const auto slot = n * static_cast<std::size_t>(cfg_.n_plastic_cols) + static_cast<std::size_t>(s.column);
    if (!plastic_on_[slot]) return;
    const auto& p = cfg_.plasticity;
    double x = drifted(slot);
    const double ca = calcium_[n];
    if (membrane_[n] >= p.membrane_theta && ca >= p.theta_up_low && ca <= p.theta_up_high) {
        x += p.up_jump;
    } else if (ca >= p.theta_down_low && ca <= p.theta_down_high) {
        x -= p.down_jump;
    }
    plastic_x_[slot] = std::clamp(x, 0.0, 1.0);
    plastic_time_[slot] = static_cast<double>(now_us_) * 1e-6;
}

std::uint64_t Chip::deliver(const std::vector<Target>& targets) {
    const auto& p = cfg_.plasticity;
    for (const auto& t : targets) {
        const auto n = static_cast<std::size_t>(t.neuron);
        switch (t.kind) {
            case Target::Kind::excitatory:
                exc_[n] += cfg_.exc_synapse.gain() * t.jump;
                break;
            case Target::Kind::inhibitory:
                inh_[n] += cfg_.inh_synapse.gain() * t.jump;
                break;
            case Target::Kind::plastic: {
                if (!plastic_on_[t.plastic_slot]) break;
                const double w = drifted(t.plastic_slot) < 0.5 ? p.w_low : p.w_high;
                exc_[n] += cfg_.exc_synapse.gain() * w * t.jump;
                update_plasticity({t.neuron, t.column});
                break;
            }
        }
    }
    meter_.sop_count += targets.size();
    return targets.size();
}

std::uint64_t Chip::route_event(const AerEvent& e) {
    if (e.kind != EventKind::input) throw StreamError("only input events can be routed");
    if (e.address < 0 || e.address >= cfg_.input_addresses()) {
        throw RoutingError("unknown input address " + std::to_string(e.address));
    }
    return deliver(input_targets_[static_cast<std::size_t>(e.address)]);
}

void Chip::step(std::span<const AerEvent> events, std::vector<AerEvent>& out) {
    for (int n : pending_) deliver(neuron_targets_[static_cast<std::size_t>(n)]);
    pending_.clear();
    for (const auto& e : events) deliver(input_targets_[static_cast<std::size_t>(e.address)]);

    const kernels::NeuronArrays arrays{membrane_, exc_, inh_, calcium_, refractory_until_,
                                       bias_, threshold_, membrane_decay_, exc_decay_, inh_decay_};
    const kernels::StepConstants k{now_us_ + cfg_.dt_us, refractory_us_, membrane_gain_,
                                   cfg_.neuron.reset_current, calcium_decay_};
    if (cfg_.parallel_step) {
        kernels::neuron_update_parallel(arrays, k, spiked_);
    } else {
        kernels::neuron_update_serial(arrays, k, spiked_);
    }
    for (int n : spiked_) {
        out.push_back({now_us_, n, EventKind::output});
        raster_.push_back({now_us_, n});
        calcium_[static_cast<std::size_t>(n)] += cfg_.plasticity.calcium_step;
    }
    pending_.swap(spiked_);
    now_us_ += cfg_.dt_us;
}

std::vector<AerEvent> Chip::advance(TimeUs until, std::span<const AerEvent> input) {
    if (until < now_us_) throw StreamError("cannot advance backwards in time");
    const TimeUs steps = (until - now_us_ + cfg_.dt_us - 1) / cfg_.dt_us;
    const TimeUs end = now_us_ + steps * cfg_.dt_us;
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto& e = input[i];
        if (e.kind != EventKind::input) throw StreamError("output event in an input stream");
        if (i > 0 && e.timestamp < input[i - 1].timestamp) throw StreamError("input stream is not time sorted");
        if (e.timestamp < now_us_ || e.timestamp >= end) {
            throw StreamError("input event at " + std::to_string(e.timestamp) +
                              " us outside the simulated window");
        }
        if (e.address < 0 || e.address >= cfg_.input_addresses()) {
            throw RoutingError("unknown input address " + std::to_string(e.address));
        }
    }
    std::vector<AerEvent> out;
    std::size_t next = 0;
    for (TimeUs s = 0; s < steps; ++s) {
        const TimeUs step_end = now_us_ + cfg_.dt_us;
        std::size_t last = next;
        while (last < input.size() && input[last].timestamp < step_end) ++last;
        step(input.subspan(next, last - next), out);
        next = last;
    }
    return out;
}

EnergyReport Chip::energy_report() const { return {meter_.sop_count, meter_.total_energy()}; }

void Chip::clear_activity() {
    std::fill(membrane_.begin(), membrane_.end(), 0.0);
    std::fill(exc_.begin(), exc_.end(), 0.0);
    std::fill(inh_.begin(), inh_.end(), 0.0);
    std::fill(calcium_.begin(), calcium_.end(), 0.0);
    std::fill(refractory_until_.begin(), refractory_until_.end(), -1);
    pending_.clear();
}

}  // namespace neuroloop

#include "neuroloop/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "neuroloop/errors.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop {

namespace {

// Reads optional keys of one section into existing values.
class Section {
public:
    Section(const Config& c, std::string prefix) : c_(c), prefix_(std::move(prefix)) {}

    Section sub(const std::string& name) const { return {c_, key(name)}; }
    std::string key(const std::string& name) const { return prefix_.empty() ? name : prefix_ + "." + name; }
    bool has(const std::string& name) const { return c_.has(key(name)); }

    void get(const std::string& name, double& v) const { v = c_.get_double(key(name), v); }
    void get(const std::string& name, bool& v) const { v = c_.get_bool(key(name), v); }
    void get(const std::string& name, int& v) const {
        const auto x = c_.get_int(key(name), v);
        if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key(name), "out of range");
        v = static_cast<int>(x);
    }
    void get(const std::string& name, std::int64_t& v) const { v = c_.get_int(key(name), v); }
    void get(const std::string& name, std::uint64_t& v) const {
        const auto x = c_.get_int(key(name), static_cast<long long>(v));
        if (x < 0) throw ConfigError(key(name), "must be non-negative");
        v = static_cast<std::uint64_t>(x);
    }

private:
    const Config& c_;
    std::string prefix_;
};

DpiParams load_dpi(const Section& s, DpiParams p) {
    s.get("capacitance", p.capacitance);
    s.get("thermal_voltage", p.thermal_voltage);
    s.get("kappa", p.kappa);
    s.get("dark_current", p.dark_current);
    s.get("leak_current", p.leak_current);
    s.get("gain_current", p.gain_current);
    if (s.has("tau")) {
        double tau = 0;
        s.get("tau", tau);
        if (!(tau > 0)) throw ConfigError(s.key("tau"), "must be positive");
        // Without an explicit gain current the filter keeps its gain.
        const double gain = p.gain();
        p.leak_current = leak_current_for(p, tau);
        if (!s.has("gain_current")) p.gain_current = gain * p.leak_current;
    }
    return p;
}

void load_wta_into(const Section& s, WtaSpec& w) {
    s.get("n_exc", w.n_exc);
    s.get("n_inh", w.n_inh);
    s.get("a_exc", w.kernel.a_exc);
    s.get("a_inh", w.kernel.a_inh);
    s.get("sigma_exc", w.kernel.sigma_exc);
    s.get("sigma_inh", w.kernel.sigma_inh);
    s.get("self_exc", w.self_exc);
    s.get("exc_to_inh", w.exc_to_inh);
    s.get("inh_to_exc", w.inh_to_exc);
    s.get("kernel_cutoff", w.kernel_cutoff);
}

void load_field_into(const Section& s, FieldParams& f) {
    s.get("tau", f.tau);
    s.get("resting_level", f.resting_level);
    s.get("grid_size", f.grid_size);
    s.get("dx", f.dx);
    s.get("sigmoid_beta", f.sigmoid_beta);
    s.get("parallel", f.parallel);
}

void load_kernel_into(const Section& s, KernelParams& k) {
    s.get("a_exc", k.a_exc);
    s.get("a_inh", k.a_inh);
    s.get("sigma_exc", k.sigma_exc);
    s.get("sigma_inh", k.sigma_inh);
}

Boundary parse_boundary(const Config& c, const std::string& key, Boundary fallback) {
    const auto v = c.get_string(key, fallback == Boundary::periodic ? "periodic" : "zero_padded");
    if (v == "periodic") return Boundary::periodic;
    if (v == "zero_padded") return Boundary::zero_padded;
    throw ConfigError(key, "expected periodic or zero_padded, got '" + v + "'");
}

}  // namespace

ChipConfig load_chip(const Config& c, const std::string& prefix, ChipConfig p) {
    const Section s(c, prefix);
    s.get("n_neurons", p.n_neurons);
    s.get("n_plastic_cols", p.n_plastic_cols);
    s.get("n_static_cols", p.n_static_cols);
    s.get("dt_us", p.dt_us);
    s.get("mismatch_cv", p.mismatch_cv);
    s.get("seed", p.seed);
    s.get("energy_per_sop", p.energy_per_sop);
    s.get("unit_current", p.unit_current);
    s.get("parallel_step", p.parallel_step);
    const auto n = s.sub("neuron");
    p.neuron.membrane = load_dpi(n.sub("membrane"), p.neuron.membrane);
    n.get("threshold", p.neuron.threshold);
    n.get("reset_current", p.neuron.reset_current);
    n.get("refractory_period", p.neuron.refractory_period);
    p.exc_synapse = load_dpi(s.sub("exc_synapse"), p.exc_synapse);
    p.inh_synapse = load_dpi(s.sub("inh_synapse"), p.inh_synapse);
    const auto l = s.sub("plasticity");
    auto& q = p.plasticity;
    l.get("up_jump", q.up_jump);
    l.get("down_jump", q.down_jump);
    l.get("drift_rate", q.drift_rate);
    l.get("calcium_tau", q.calcium_tau);
    l.get("calcium_step", q.calcium_step);
    l.get("theta_up_low", q.theta_up_low);
    l.get("theta_up_high", q.theta_up_high);
    l.get("theta_down_low", q.theta_down_low);
    l.get("theta_down_high", q.theta_down_high);
    l.get("membrane_theta", q.membrane_theta);
    l.get("w_low", q.w_low);
    l.get("w_high", q.w_high);
    validate(p);
    return p;
}

FieldParams load_field(const Config& c, const std::string& prefix, FieldParams p) {
    load_field_into(Section(c, prefix), p);
    p.boundary = parse_boundary(c, prefix + ".boundary", p.boundary);
    validate(p);
    return p;
}

KernelParams load_kernel(const Config& c, const std::string& prefix, KernelParams k) {
    load_kernel_into(Section(c, prefix), k);
    validate(k);
    return k;
}

WtaSpec load_wta_spec(const Config& c, const std::string& prefix, WtaSpec base) {
    load_wta_into(Section(c, prefix), base);
    return base;
}

WtaTrialParams load_wta_trial(const Config& c) {
    WtaTrialParams p;
    p.chip = load_chip(c);
    const Section s(c, "wta");
    p.spec = load_wta_spec(c, "wta.spec", p.spec);
    s.get("exc_begin", p.layout.exc_begin);
    s.get("inh_begin", p.layout.inh_begin);
    s.get("profile_sigma", p.profile_sigma);
    s.get("background_fraction", p.background_fraction);
    s.get("duration", p.duration);
    s.get("input_level", p.input_level);
    s.get("winner_radius", p.winner_radius);
    s.get("settle_time", p.settle_time);
    s.get("field_input_gain", p.field_input_gain);
    p.field = load_field(c, "wta.field", p.field);
    p.field_kernel = load_kernel(c, "wta.field_kernel", p.field_kernel);
    const auto locations = c.get_ints("wta.target_locations", {});
    const auto rates = c.get_doubles("wta.target_rates", {});
    if (locations.size() != rates.size()) {
        throw ConfigError("wta.target_rates", "needs one rate per target location");
    }
    for (std::size_t i = 0; i < locations.size(); ++i) {
        p.targets.push_back({static_cast<int>(locations[i]), rates[i]});
    }
    return p;
}

BraitenbergParams load_navigation(const Config& c) {
    BraitenbergParams p;
    p.chip = load_chip(c);
    const Section s(c, "navigation");
    s.get("target_size", p.target_size);
    s.get("wta1_inh", p.wta1_inh);
    s.get("wta2_inh", p.wta2_inh);
    s.get("obstacle_size", p.obstacle_size);
    s.get("motor_size", p.motor_size);
    s.get("speed_size", p.speed_size);
    s.get("gyro_size", p.gyro_size);
    p.wta1 = load_wta_spec(c, "navigation.wta1", p.wta1);
    p.wta2 = load_wta_spec(c, "navigation.wta2", p.wta2);
    s.get("target_input_level", p.target_input_level);
    s.get("obstacle_input_level", p.obstacle_input_level);
    s.get("gyro_input_level", p.gyro_input_level);
    s.get("wta1_to_wta2", p.wta1_to_wta2);
    s.get("target_to_motor", p.target_to_motor);
    s.get("obstacle_to_motor", p.obstacle_to_motor);
    s.get("obstacle_to_speed", p.obstacle_to_speed);
    s.get("gyro_to_target", p.gyro_to_target);
    s.get("gyro_to_obstacle", p.gyro_to_obstacle);
    s.get("motor_cross", p.motor_cross);
    s.get("speed_bias", p.speed_bias);
    s.get("g_v", p.g_v);
    s.get("g_omega", p.g_omega);
    s.get("decode_window", p.decode_window);
    s.get("sensor_period", p.sensor_period);
    s.get("reach_radius", p.reach_radius);
    s.get("start_jitter", p.start_jitter);
    s.get("heading_jitter", p.heading_jitter);
    s.get("bump_window", p.bump_window);
    s.get("bump_min_count", p.bump_min_count);
    s.get("bump_merge_gap", p.bump_merge_gap);
    const auto d = s.sub("dvs");
    d.get("width", p.dvs.width);
    d.get("height", p.dvs.height);
    d.get("fov", p.dvs.fov);
    d.get("k_motion", p.dvs.k_motion);
    d.get("k_texture", p.dvs.k_texture);
    d.get("k_led", p.dvs.k_led);
    d.get("transition_width", p.dvs.transition_width);
    d.get("led_half_block", p.dvs.led_half_block);
    d.get("camera_height", p.dvs.camera_height);
    d.get("led_height", p.dvs.led_height);
    d.get("slice", p.dvs.slice);
    const auto g = s.sub("gyro");
    g.get("channels", p.gyro.channels);
    g.get("gain", p.gyro.gain);
    g.get("step", p.gyro.step);
    const auto l = s.sub("limits");
    l.get("v_max", p.limits.v_max);
    l.get("omega_max", p.limits.omega_max);
    l.get("radius", p.limits.radius);
    if (p.gyro.channels != p.gyro_size) throw ConfigError("navigation.gyro.channels", "must equal gyro_size");
    return p;
}

SequenceParams load_sequence(const Config& c) {
    SequenceParams p;
    p.chip = load_chip(c);
    const Section s(c, "sequence");
    s.get("n_items", p.n_items);
    s.get("group_size", p.group_size);
    s.get("n_locations", p.n_locations);
    s.get("content_inh", p.content_inh);
    s.get("cos_size", p.cos_size);
    p.content = load_wta_spec(c, "sequence.content", p.content);
    s.get("ordinal_self", p.ordinal_self);
    s.get("ordinal_cross", p.ordinal_cross);
    s.get("ordinal_to_memory", p.ordinal_to_memory);
    s.get("ordinal_to_other_memory", p.ordinal_to_other_memory);
    s.get("memory_self", p.memory_self);
    s.get("memory_to_next", p.memory_to_next);
    s.get("memory_reset", p.memory_reset);
    s.get("cos_to_ordinal", p.cos_to_ordinal);
    s.get("cos_to_content", p.cos_to_content);
    s.get("drive_level", p.drive_level);
    s.get("content_input_level", p.content_input_level);
    s.get("t_item", p.t_item);
    s.get("t_hold", p.t_hold);
    s.get("drive_duration", p.drive_duration);
    s.get("drive_rate", p.drive_rate);
    s.get("cos_duration", p.cos_duration);
    s.get("cos_rate", p.cos_rate);
    s.get("settle", p.settle);
    s.get("idle_gap", p.idle_gap);
    s.get("replay_timeout", p.replay_timeout);
    s.get("item_rate", p.item_rate);
    s.get("item_sigma", p.item_sigma);
    s.get("bump_window", p.bump_window);
    s.get("bump_min_count", p.bump_min_count);
    s.get("match_radius", p.match_radius);
    return p;
}

std::vector<std::uint64_t> batch_seeds(const Config& c, std::optional<std::uint64_t> override) {
    std::uint64_t first = 1;
    if (override) {
        first = *override;
    } else if (const char* env = std::getenv("NEUROLOOP_SEED"); env && *env) {
        try {
            first = parse_int<std::uint64_t>(trim(env), "NEUROLOOP_SEED");
        } catch (const ParseError& e) {
            throw ConfigError("NEUROLOOP_SEED", e.what());
        }
    } else {
        Section(c, "run").get("seed", first);
    }
    int trials = 1;
    Section(c, "run").get("trials", trials);
    if (trials < 0) throw ConfigError("run.trials", "must be non-negative");
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < trials; ++i) seeds.push_back(first + static_cast<std::uint64_t>(i));
    return seeds;
}

DpiDemoParams load_dpi_demo(const Config& c) {
    DpiDemoParams p;
    const Section s(c, "dpi");
    p.dpi = load_dpi(s.sub("circuit"), p.dpi);
    s.get("step_input", p.step_input);
    if (s.has("step_over_itau")) {
        double ratio = 0;
        s.get("step_over_itau", ratio);
        p.step_input = ratio * p.dpi.leak_current;
    }
    s.get("duration", p.duration);
    s.get("dt", p.dt);
    p.spike_times = c.get_doubles("dpi.spike_times", p.spike_times);
    s.get("spike_weight", p.spike_weight);
    s.get("unit_current", p.unit_current);
    if (!(p.duration >= 0)) throw ConfigError("dpi.duration", "must be non-negative");
    if (!(p.dt > 0)) throw ConfigError("dpi.dt", "must be positive");
    if (!(p.step_input >= 0)) throw ConfigError("dpi.step_input", "must be non-negative");
    validate(p.dpi);
    return p;
}

namespace {

template <class Kick>
DpiTrace trace(const DpiDemoParams& p, double input, Kick kick) {
    DpiTrace out;
    DpiState full, lin;
    const auto n = static_cast<long>(std::floor(p.duration / p.dt + 1e-9));
    for (long i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * p.dt;
        if (i > 0) {
            full = dpi_step_full(full, p.dpi, input, p.dt);
            lin = dpi_step_linear(lin, p.dpi, input, p.dt);
        }
        kick(t, full, lin);
        out.t.push_back(t);
        out.full.push_back(full.current);
        out.linear.push_back(lin.current);
    }
    return out;
}

}  // namespace

DpiTrace dpi_step_response(const DpiDemoParams& p) {
    return trace(p, p.step_input, [](double, DpiState&, DpiState&) {});
}

DpiTrace dpi_spike_response(const DpiDemoParams& p) {
    std::vector<double> spikes = p.spike_times;
    std::sort(spikes.begin(), spikes.end());
    std::size_t next = 0;
    return trace(p, 0.0, [&](double t, DpiState& full, DpiState& lin) {
        // Spikes are applied at the first sample at or after their time.
        while (next < spikes.size() && spikes[next] <= t + 1e-12) {
            full = dpi_inject_spike(full, p.dpi, p.spike_weight, p.unit_current);
            lin = dpi_inject_spike(lin, p.dpi, p.spike_weight, p.unit_current);
            ++next;
        }
    });
}

double dpi_analytic_step(const DpiDemoParams& p, double t) {
    return p.dpi.gain() * p.step_input * -std::expm1(-t / time_constant(p.dpi));
}

void write_dpi_csv(std::ostream& out, const DpiTrace& trace) {
    out << "t,full,linear\n";
    for (std::size_t i = 0; i < trace.t.size(); ++i) {
        out << format_double(trace.t[i]) << ',' << format_double(trace.full[i]) << ','
            << format_double(trace.linear[i]) << '\n';
    }
}

DnfExperiment load_dnf(const Config& c) {
    DnfExperiment e;
    e.field = load_field(c, "field", e.field);
    e.kernel = load_kernel(c, "kernel", e.kernel);
    const Section s(c, "input");
    s.get("amplitude", e.input_amplitude);
    s.get("sigma", e.input_sigma);
    s.get("centre", e.input_centre);
    s.get("duration", e.input_duration);
    const Section r(c, "run");
    r.get("duration", e.duration);
    r.get("dt", e.dt);
    r.get("record_every", e.record_every);
    r.get("peak_threshold", e.peak_threshold);
    if (!(e.duration >= 0)) throw ConfigError("run.duration", "must be non-negative");
    if (!(e.dt > 0)) throw ConfigError("run.dt", "must be positive");
    if (!(e.record_every >= e.dt)) throw ConfigError("run.record_every", "must be at least run.dt");
    if (!(e.input_sigma > 0)) throw ConfigError("input.sigma", "must be positive");
    return e;
}

DnfResult run_dnf(const DnfExperiment& e) {
    const int n = e.field.grid_size;
    std::vector<double> input(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double d = (i - e.input_centre) * e.field.dx;
        const double s = e.input_sigma * e.field.dx;
        input[static_cast<std::size_t>(i)] = e.input_amplitude * std::exp(-d * d / (2 * s * s));
    }
    const std::vector<double> off(static_cast<std::size_t>(n), 0.0);
    const auto kernel = sample_kernel(e.kernel, n, e.field.dx);
    const auto steps = static_cast<long>(std::llround(e.duration / e.dt));
    const auto input_steps = static_cast<long>(std::llround(e.input_duration / e.dt));
    const auto every = std::max(1L, static_cast<long>(std::llround(e.record_every / e.dt)));

    DnfResult r;
    auto s = FieldState::at_rest(e.field);
    r.frames.push_back(s);
    for (long i = 0; i < steps; ++i) {
        s = field_step(s, e.field, kernel, i < input_steps ? input : off, e.dt);
        s.t = static_cast<double>(i + 1) * e.dt;
        if ((i + 1) % every == 0) r.frames.push_back(s);
    }
    r.final_state = s;
    return r;
}

std::vector<EnergyConstant> read_energy_table(std::istream& in) {
    std::vector<EnergyConstant> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        const auto parts = split(body, ',');
        const auto where = "energy table line " + std::to_string(line_no);
        if (parts.size() != 2) throw ParseError(where + ": expected device,energy_per_sop_j");
        if (trim(parts[0]) == "device") continue;
        const double e = parse_double(trim(parts[1]), where);
        if (!(e >= 0)) throw ParseError(where + ": energy must be non-negative");
        out.push_back({std::string(trim(parts[0])), e});
    }
    return out;
}

std::vector<EnergyConstant> read_energy_table_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open energy table");
    return read_energy_table(in);
}

}  // namespace neuroloop

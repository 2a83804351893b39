#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "neuroloop/aer.hpp"
#include "neuroloop/batch.hpp"
#include "neuroloop/errors.hpp"
#include "neuroloop/experiment.hpp"
#include "neuroloop/text.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace neuroloop;

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int jobs = 0;
    bool no_plots = false;
};

struct Run {
    Config cfg;
    fs::path out;
    Options opt;

    std::ofstream file(const std::string& name) const {
        std::ofstream f(out / name);
        if (!f) throw StreamError("cannot write " + (out / name).string());
        return f;
    }
    bool plots() const { return !opt.no_plots; }
};

// Summary files are `key = value` lines.
class Summary {
public:
    template <class T>
    Summary& add(const std::string& key, const T& value) {
        std::ostringstream s;
        if constexpr (std::is_floating_point_v<T>) {
            s << format_double(value);
        } else {
            s << value;
        }
        lines_.emplace_back(key, s.str());
        return *this;
    }
    void write(const Run& r, const std::string& name) const {
        auto f = r.file(name);
        for (const auto& [k, v] : lines_) f << k << " = " << v << '\n';
        for (const auto& [k, v] : lines_) std::cout << k << " = " << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

std::string join(const std::vector<int>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + std::to_string(v[i]);
    return s;
}

void write_raster(std::ostream& out, const std::vector<RasterEntry>& raster, const NetworkLayout* layout) {
    out << (layout ? "t_us,neuron,population\n" : "t_us,neuron\n");
    for (const auto& e : raster) {
        out << e.timestamp << ',' << e.neuron;
        if (layout) {
            const auto* p = layout->owner(e.neuron);
            out << ',' << (p ? p->name : "");
        }
        out << '\n';
    }
}

void raster_svg(const fs::path& path, const std::string& title, const std::vector<RasterEntry>& raster,
                int n_neurons, double t_end, const NetworkLayout* layout) {
    svg::Plot plot(0, t_end, 0, n_neurons, 800, 480);
    plot.title(title);
    plot.axis_labels("time (s)", "neuron");
    for (const auto& e : raster) {
        std::size_t colour = 0;
        if (layout) {
            const auto& pops = layout->populations();
            for (std::size_t i = 0; i < pops.size(); ++i) {
                if (pops[i].contains(e.neuron)) colour = i;
            }
        }
        plot.dot(static_cast<double>(e.timestamp) * 1e-6, e.neuron + 0.5, 0.8, svg::colour(colour));
    }
    plot.save(path);
}

// dpi ---------------------------------------------------------------------

void cmd_dpi(const Run& r) {
    const auto p = load_dpi_demo(r.cfg);
    const auto step = dpi_step_response(p);
    const auto spikes = dpi_spike_response(p);
    {
        auto f = r.file("dpi_step.csv");
        write_dpi_csv(f, step);
    }
    {
        auto f = r.file("dpi_spikes.csv");
        write_dpi_csv(f, spikes);
    }
    {
        auto f = r.file("dpi_analytic.csv");
        f << "t,analytic\n";
        for (double t : step.t) f << format_double(t) << ',' << format_double(dpi_analytic_step(p, t)) << '\n';
    }
    const double full = step.full.back(), lin = step.linear.back();
    Summary s;
    s.add("tau_s", time_constant(p.dpi))
        .add("gain", p.dpi.gain())
        .add("input_over_itau", p.step_input / p.dpi.leak_current)
        .add("final_full_a", full)
        .add("final_linear_a", lin)
        .add("final_relative_difference", lin != 0 ? std::abs(full - lin) / std::abs(lin) : 0.0);
    s.write(r, "dpi_summary.txt");

    if (r.plots()) {
        double top = 0;
        for (double v : step.full) top = std::max(top, v);
        for (double v : step.linear) top = std::max(top, v);
        svg::Plot plot(0, p.duration, 0, top * 1.05);
        plot.title("DPI step response: full (blue) and linear (red)");
        plot.axis_labels("time (s)", "Iout (A)");
        std::vector<std::pair<double, double>> a, b;
        for (std::size_t i = 0; i < step.t.size(); ++i) {
            a.emplace_back(step.t[i], step.full[i]);
            b.emplace_back(step.t[i], step.linear[i]);
        }
        plot.polyline(a, svg::colour(0), 2);
        plot.polyline(b, svg::colour(1), 1);
        plot.save(r.out / "dpi_step.svg");
    }
}

// dnf ---------------------------------------------------------------------

void cmd_dnf(const Run& r) {
    const auto e = load_dnf(r.cfg);
    const auto res = run_dnf(e);
    {
        auto f = r.file("dnf_field.csv");
        write_field_csv_header(f, e.field.grid_size);
        for (const auto& s : res.frames) write_field_csv_row(f, s);
    }
    {
        auto f = r.file("dnf_peaks.csv");
        f << "t,position,value\n";
        for (const auto& s : res.frames) {
            for (const auto& pk : detect_peaks(s, e.peak_threshold)) {
                f << format_double(s.t) << ',' << format_double(pk.position) << ',' << format_double(pk.value) << '\n';
            }
        }
    }
    const auto peaks = detect_peaks(res.final_state, e.peak_threshold);
    double deviation = 0;
    for (double u : res.final_state.u) deviation = std::max(deviation, std::abs(u - e.field.resting_level));
    Summary s;
    s.add("final_time_s", res.final_state.t)
        .add("final_peaks", peaks.size())
        .add("final_peak_position", peaks.empty() ? -1.0 : peaks.front().position)
        .add("final_max_deviation_from_rest", deviation)
        .add("time_after_input_in_tau", (res.final_state.t - e.input_duration) / e.field.tau);
    s.write(r, "dnf_summary.txt");

    if (r.plots()) {
        double lo = e.field.resting_level, hi = 0;
        for (const auto& fr : res.frames) {
            for (double u : fr.u) {
                lo = std::min(lo, u);
                hi = std::max(hi, u);
            }
        }
        svg::Plot plot(0, e.field.grid_size - 1, lo - 0.5, hi + 0.5);
        plot.title("Field at input offset (blue) and at the end (red)");
        plot.axis_labels("position", "u");
        const auto& at_offset = res.frames[std::min(
            res.frames.size() - 1, static_cast<std::size_t>(std::llround(e.input_duration / e.record_every)))];
        for (const auto* fr : {&at_offset, &res.final_state}) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < fr->u.size(); ++i) pts.emplace_back(static_cast<double>(i), fr->u[i]);
            plot.polyline(pts, svg::colour(fr == &at_offset ? 0 : 1), 2);
        }
        plot.save(r.out / "dnf_field.svg");
    }
}

// wta ---------------------------------------------------------------------

void cmd_wta(const Run& r) {
    const bool fixed = r.cfg.has("wta.target_locations");
    const auto base = load_wta_trial(r.cfg);
    const double strong = r.cfg.get_double("wta.strong_rate", 100.0);
    const double ratio = r.cfg.get_double("wta.ratio", 1.5);
    const auto seeds = batch_seeds(r.cfg, r.opt.seed);

    struct Trial {
        WtaTrialParams params;
        WtaTrialResult result;
        int strongest = -1;
        int field_winner = -1;
    };
    const auto trials = run_batch(seeds, r.opt.jobs, [&](std::uint64_t seed) {
        Trial t;
        t.params = fixed ? base : two_target_trial(base, seed, strong, ratio);
        t.params.chip.seed = seed;
        t.result = run_wta_trial(t.params, seed);
        t.strongest = t.params.targets.empty() ? -1 : strongest_target(t.params);
        t.field_winner = t.params.targets.empty() ? -1 : continuous_winner(t.params);
        return t;
    });

    auto table = r.file("wta_trials.csv");
    table << "seed,targets,strongest,spiking_winner,field_winner,input_std,output_std,output_spikes,sop_count,"
             "energy_j\n";
    int agree = 0, narrower = 0;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& t = trials[i];
        const auto seed = seeds[i];
        std::vector<int> locations;
        for (const auto& g : t.params.targets) locations.push_back(g.location);
        table << seed << ',' << join(locations, ';') << ',' << t.strongest << ',' << t.result.winner << ','
              << t.field_winner << ',' << format_double(t.result.input_std) << ','
              << format_double(t.result.output_std) << ',' << t.result.output.size() << ','
              << t.result.energy.sop_count << ',' << format_double(t.result.energy.total_energy) << '\n';
        agree += t.result.winner == t.field_winner;
        narrower += t.result.output_std < t.result.input_std;
        {
            auto f = r.file("wta_input_seed" + std::to_string(seed) + ".csv");
            f << "t_us,neuron\n";
            for (const auto& e : t.result.input) f << e.timestamp << ',' << e.address << '\n';
        }
        {
            auto f = r.file("wta_output_seed" + std::to_string(seed) + ".csv");
            write_raster(f, t.result.output, nullptr);
        }
        if (r.plots() && i == 0) {
            svg::Plot plot(0, t.params.duration, 0, t.params.spec.n_exc, 800, 480);
            plot.title("WTA input events (grey) and output spikes (red), seed " + std::to_string(seed));
            plot.axis_labels("time (s)", "neuron");
            for (const auto& e : t.result.input) {
                plot.dot(static_cast<double>(e.timestamp) * 1e-6, e.address + 0.5, 0.7, "#999999");
            }
            for (const auto& e : t.result.output) {
                plot.dot(static_cast<double>(e.timestamp) * 1e-6, e.neuron + 0.5, 1.2, svg::colour(1));
            }
            plot.save(r.out / ("wta_raster_seed" + std::to_string(seed) + ".svg"));
        }
    }
    const double n = std::max<std::size_t>(1, trials.size());
    Summary s;
    s.add("trials", trials.size())
        .add("winner_agrees_with_field", agree / n)
        .add("output_narrower_than_input", narrower / n);
    s.write(r, "wta_summary.txt");
}

// navigate ----------------------------------------------------------------

void cmd_navigate(const Run& r) {
    const auto p = load_navigation(r.cfg);
    const double duration = r.cfg.get_double("run.duration", 60.0);
    const auto paths = r.cfg.get_paths("run.arenas", {});
    std::vector<std::pair<std::string, Arena>> arenas;
    for (const auto& path : paths) arenas.emplace_back(path.stem().string(), read_arena_file(path.string()));
    if (arenas.empty()) arenas.emplace_back("default", Arena{});
    const auto seeds = batch_seeds(r.cfg, r.opt.seed);
    fs::create_directories(r.out / "trajectories");

    auto trials = r.file("navigation_trials.csv");
    trials << "arena,seed,reached,collisions,time_to_target,min_clearance,max_target_bumps,input_events,sop_count,"
              "energy_j\n";
    auto summary = r.file("navigation_summary.csv");
    summary << "arena,trials,success_rate,mean_time_to_target,collisions,mean_energy_j\n";
    for (const auto& [name, arena] : arenas) {
        const auto results = run_batch(seeds, r.opt.jobs, [&](std::uint64_t seed) {
            return run_navigation_trial(arena, p, seed, duration);
        });
        int reached = 0, collisions = 0;
        double time = 0, energy = 0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& t = results[i];
            trials << name << ',' << seeds[i] << ',' << (t.reached ? 1 : 0) << ',' << t.collisions << ','
                   << format_double(t.time_to_target) << ',' << format_double(t.min_clearance) << ','
                   << t.max_target_bumps << ',' << t.input_events << ',' << t.energy.sop_count << ','
                   << format_double(t.energy.total_energy) << '\n';
            auto f = r.file("trajectories/" + name + "_seed" + std::to_string(seeds[i]) + ".csv");
            write_trajectory_csv(f, t.trajectory);
            reached += t.reached;
            collisions += t.collisions;
            if (t.reached) time += t.time_to_target;
            energy += t.energy.total_energy;
        }
        const double n = std::max<std::size_t>(1, results.size());
        summary << name << ',' << results.size() << ',' << format_double(reached / n) << ','
                << format_double(reached ? time / reached : -1.0) << ',' << collisions << ','
                << format_double(energy / n) << '\n';
        std::cout << name << ": reached " << reached << '/' << results.size() << ", collisions " << collisions
                  << '\n';

        if (r.plots()) {
            svg::Plot plot(0, arena.width, 0, arena.height, 560, 560, true);
            plot.title("Arena " + name + ": trajectories");
            plot.rect(0, 0, arena.width, arena.height, "black");
            for (const auto& o : arena.obstacles) plot.circle(o.x, o.y, o.radius, "#cccccc", "black");
            plot.circle(arena.target_x, arena.target_y, p.reach_radius, "none", "#2ca02c");
            for (std::size_t i = 0; i < results.size() && i < 12; ++i) {
                std::vector<std::pair<double, double>> pts;
                for (const auto& pt : results[i].trajectory) pts.emplace_back(pt.state.x, pt.state.y);
                plot.polyline(pts, svg::colour(i), 1.2);
            }
            plot.save(r.out / ("navigation_" + name + ".svg"));
        }
    }
}

// sequence ----------------------------------------------------------------

void cmd_sequence(const Run& r) {
    const auto p = load_sequence(r.cfg);
    std::vector<int> items;
    for (auto v : r.cfg.get_ints("run.items", {12, 40, 55})) items.push_back(static_cast<int>(v));
    const auto seeds = batch_seeds(r.cfg, r.opt.seed);
    const auto net = build_sequence_network(p);
    const auto results = run_batch(seeds, r.opt.jobs, [&](std::uint64_t seed) {
        return run_sequence_experiment(items, p, seed);
    });

    auto table = r.file("sequence_trials.csv");
    table << "seed,items,replay,match,margin,sop_count,energy_j\n";
    int matches = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        const auto seed = std::to_string(seeds[i]);
        const bool match = replay_matches(res.replay, items, p.match_radius);
        matches += match;
        table << seeds[i] << ',' << join(items, ';') << ',' << join(res.replay, ';') << ',' << (match ? 1 : 0) << ','
              << format_double(res.margin) << ',' << res.energy.sop_count << ','
              << format_double(res.energy.total_energy) << '\n';
        {
            auto f = r.file("sequence_raster_seed" + seed + ".csv");
            write_raster(f, res.raster, &net.layout);
        }
        {
            auto f = r.file("sequence_x_seed" + seed + ".csv");
            for (int j = 0; j < p.n_locations; ++j) f << (j ? "," : "") << "c" << j;
            f << '\n';
            for (const auto& row : res.synapses) {
                for (std::size_t j = 0; j < row.size(); ++j) f << (j ? "," : "") << format_double(row[j]);
                f << '\n';
            }
        }
        if (r.plots() && i == 0) {
            const double t_end = res.raster.empty() ? 1.0 : static_cast<double>(res.raster.back().timestamp) * 1e-6;
            raster_svg(r.out / ("sequence_raster_seed" + seed + ".svg"), "Sequence learning and replay, seed " + seed,
                       res.raster, net.layout.used(), t_end, &net.layout);
        }
    }
    Summary s;
    s.add("items", join(items, ';'))
        .add("trials", results.size())
        .add("replay_match_rate", matches / static_cast<double>(std::max<std::size_t>(1, results.size())));
    s.write(r, "sequence_summary.txt");
}

// energy ------------------------------------------------------------------

void cmd_energy(const Run& r) {
    auto chip_cfg = load_chip(r.cfg);
    const auto stream_path = r.cfg.get_path("energy.stream", {});
    if (stream_path.empty()) throw ConfigError("energy.stream", "missing AER stream path");
    const auto events = read_aer_file(stream_path.string());
    const auto conn_path = r.cfg.get_path("energy.connectivity", {});
    auto conn = conn_path.empty() ? ConnectivityMatrix(chip_cfg.shape())
                                  : read_connectivity_file(conn_path.string(), chip_cfg.shape());
    const auto table = read_energy_table_file(r.cfg.get_path("energy.table", "energy_per_sop.csv"));
    const double extra = r.cfg.get_double("energy.run_after", 0.0);

    Chip chip(chip_cfg, conn);
    TimeUs until = events.empty() ? 0 : events.back().timestamp + 1;
    until += static_cast<TimeUs>(std::llround(extra * 1e6));
    if (until > 0) chip.advance(until, events);
    const auto sops = chip.energy_report().sop_count;

    auto f = r.file("energy_report.csv");
    f << "device,energy_per_sop_j,sop_count,energy_j\n";
    for (const auto& c : table) {
        f << c.device << ',' << format_double(c.energy_per_sop) << ',' << sops << ','
          << format_double(static_cast<double>(sops) * c.energy_per_sop) << '\n';
    }
    Summary s;
    s.add("events", events.size()).add("sop_count", sops).add("simulated_s", static_cast<double>(until) * 1e-6);
    s.write(r, "energy_summary.txt");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neuromorphic chip emulator and closed-loop experiments"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "experiment config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "first seed (falls back to NEUROLOOP_SEED, then run.seed)");
        sub->add_option("--jobs", opt.jobs, "parallel trials (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--no-plots", opt.no_plots, "skip SVG output");
    };
    const std::map<std::string, std::pair<std::string, void (*)(const Run&)>> commands{
        {"dpi", {"full vs. linear DPI responses", cmd_dpi}},
        {"dnf", {"dynamic neural field run", cmd_dnf}},
        {"wta", {"spiking WTA trials against the field reference", cmd_wta}},
        {"navigate", {"closed-loop navigation trials", cmd_navigate}},
        {"sequence", {"sequence learning and replay", cmd_sequence}},
        {"energy", {"SOP count and energy of a recorded AER stream", cmd_energy}},
    };
    std::map<CLI::App*, void (*)(const Run&)> handlers;
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        add_common(sub);
        handlers[sub] = entry.second;
    }
    CLI11_PARSE(app, argc, argv);

    try {
        Run run{Config::load(opt.config), opt.out, opt};
        fs::create_directories(run.out);
        for (const auto& [sub, handler] : handlers) {
            if (sub->parsed()) handler(run);
        }
        for (const auto& key : run.cfg.unused_keys()) std::cerr << "warning: unused config key " << key << '\n';
        auto f = run.file("config_resolved.cfg");
        f << run.cfg.dump();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#pragma once

// Experiment parameters read from config files, and the two small
// experiments (DPI demo, neural field) that have no module of their own.
//
// Every loader starts from the built-in defaults and overrides whatever keys
// the config provides under its section, e.g. `chip.mismatch_cv` or
// `navigation.dvs.k_motion`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neuroloop/braitenberg.hpp"
#include "neuroloop/chip.hpp"
#include "neuroloop/config.hpp"
#include "neuroloop/fields.hpp"
#include "neuroloop/sequence.hpp"
#include "neuroloop/wta.hpp"

namespace neuroloop {

// Keys under `<prefix>.`: n_neurons, n_plastic_cols, n_static_cols, dt_us,
// mismatch_cv, seed, energy_per_sop, unit_current, parallel_step, plus the
// DPI sections `neuron.membrane`, `exc_synapse`, `inh_synapse` (capacitance,
// thermal_voltage, kappa, dark_current, leak_current, gain_current, or tau
// to set the leak), `neuron` (threshold, reset_current, refractory_period)
// and `plasticity`.
ChipConfig load_chip(const Config& c, const std::string& prefix = "chip", ChipConfig base = {});

FieldParams load_field(const Config& c, const std::string& prefix = "field", FieldParams base = {});
KernelParams load_kernel(const Config& c, const std::string& prefix = "kernel", KernelParams base = {});
WtaSpec load_wta_spec(const Config& c, const std::string& prefix, WtaSpec base = {});

// Sections `chip`, `wta`, `wta.spec`, `wta.field`, `wta.field_kernel`.
WtaTrialParams load_wta_trial(const Config& c);
// Sections `chip`, `navigation`, `navigation.dvs`, `navigation.gyro`,
// `navigation.limits`, `navigation.wta1`, `navigation.wta2`.
BraitenbergParams load_navigation(const Config& c);
// Sections `chip`, `sequence`, `sequence.content`.
SequenceParams load_sequence(const Config& c);

// Seeds of a batch: `run.trials` consecutive seeds from the first seed,
// which is `override` if given, else NEUROLOOP_SEED from the environment,
// else `run.seed` (default 1).
std::vector<std::uint64_t> batch_seeds(const Config& c, std::optional<std::uint64_t> override);

// DPI demo: the full and linear integrators side by side.
struct DpiDemoParams {
    DpiParams dpi = ChipConfig::default_synapse(20e-3);
    double step_input = 100e-12;    // A, switched on at t = 0
    double duration = 0.2;          // s
    double dt = 1e-4;               // s, output sample interval
    std::vector<double> spike_times;  // s
    double spike_weight = 1.0;
    double unit_current = kDefaultUnitCurrent;
};

// Section `dpi`, circuit in `dpi.circuit`. `dpi.step_over_itau` sets the
// step input as a multiple of the leak current.
DpiDemoParams load_dpi_demo(const Config& c);

struct DpiTrace {
    std::vector<double> t;
    std::vector<double> full;
    std::vector<double> linear;
};

// Response to the step input held for the whole duration.
DpiTrace dpi_step_response(const DpiDemoParams& p);
// Response to the spike train, no step input.
DpiTrace dpi_spike_response(const DpiDemoParams& p);
// Closed-form step response of the linear filter, Ig/Itau * Iin * (1 - exp(-t/tau)).
double dpi_analytic_step(const DpiDemoParams& p, double t);

// CSV with header `t,full,linear`.
void write_dpi_csv(std::ostream& out, const DpiTrace& trace);

// Neural field driven by a Gaussian input that is switched off after
// `input_duration`.
struct DnfExperiment {
    FieldParams field{};
    KernelParams kernel{3.0, 1.0, 3.0, 10.0};
    double input_amplitude = 8.0;
    double input_sigma = 3.0;     // grid cells
    double input_centre = 32.0;   // grid index
    double input_duration = 0.02; // s
    double duration = 1.0;        // s, total
    double dt = 1e-4;             // s
    double record_every = 1e-3;   // s
    double peak_threshold = 0.0;
};

DnfExperiment load_dnf(const Config& c);

struct DnfResult {
    std::vector<FieldState> frames;  // recorded states, starting at t = 0
    FieldState final_state;
};

DnfResult run_dnf(const DnfExperiment& e);

// Energy per SOP of one processor, as listed in the data table.
struct EnergyConstant {
    std::string device;
    double energy_per_sop = 0.0;  // J
};

// CSV with header `device,energy_per_sop_j`.
std::vector<EnergyConstant> read_energy_table(std::istream& in);
std::vector<EnergyConstant> read_energy_table_file(const std::filesystem::path& path);

}  // namespace neuroloop

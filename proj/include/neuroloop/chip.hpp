#pragma once

// Event-driven emulator of a ROLLS-like mixed-signal neuromorphic processor:
// a row of leaky integrate-and-fire neurons, each with a plastic and a
// fixed-weight half of a synapse array, AER input/output, device mismatch,
// a calcium-gated bistable learning rule, and per-SOP energy accounting.
//
// Time advances in fixed global steps. Events are applied at the start of
// the step that contains their timestamp; within a step, synaptic currents
// decay in closed form and membranes relax exactly toward their input.

#include <cstdint>
#include <span>
#include <vector>

#include "neuroloop/aer.hpp"
#include "neuroloop/connectivity.hpp"
#include "neuroloop/dynamics.hpp"

namespace neuroloop {

inline constexpr double kRollsEnergyPerSop = 77e-15;
inline constexpr double kDynapEnergyPerSop = 17e-12;

// Calcium-gated bistable "stop-learning" rule. X is the internal synaptic
// state in [0, 1]; the efficacious weight is w_low below 0.5, w_high above.
struct PlasticityParams {
    double up_jump = 0.1;     // a
    double down_jump = 0.1;   // b
    double drift_rate = 1.0;  // 1/s toward the nearest bistable state
    double calcium_tau = 0.05;
    double calcium_step = 1.0;  // increment per postsynaptic spike
    double theta_up_low = 2.0;
    double theta_up_high = 15.0;
    double theta_down_low = 0.5;
    double theta_down_high = 2.0;
    double membrane_theta = 10e-12;
    double w_low = 0.0;
    double w_high = 1.0;
};

void validate(const PlasticityParams& p);

struct ChipConfig {
    int n_neurons = 256;
    int n_plastic_cols = 256;
    int n_static_cols = 256;
    TimeUs dt_us = 100;
    double mismatch_cv = 0.10;
    std::uint64_t seed = 1;
    double energy_per_sop = kRollsEnergyPerSop;
    double unit_current = kDefaultUnitCurrent;
    NeuronParams neuron = default_neuron();
    DpiParams exc_synapse = default_synapse(20e-3);
    DpiParams inh_synapse = default_synapse(10e-3);
    PlasticityParams plasticity{};
    // Use the OpenMP neuron kernel. Results are identical to the serial one.
    bool parallel_step = false;

    ArrayShape shape() const { return {n_neurons, n_plastic_cols, n_static_cols}; }
    int input_addresses() const { return n_plastic_cols + n_static_cols; }
    double dt() const { return static_cast<double>(dt_us) * 1e-6; }

    static NeuronParams default_neuron();
    // Unity-gain DPI with the default circuit constants and the given tau.
    static DpiParams default_synapse(double tau);
};

// Throws ConfigError naming the offending field.
void validate(const ChipConfig& cfg);

// Lognormal multiplicative factors with unit mean and the configured
// coefficient of variation. cv = 0 gives factors of exactly 1.
struct MismatchModel {
    std::vector<double> membrane_tau;
    std::vector<double> exc_tau;
    std::vector<double> inh_tau;
    std::vector<double> threshold;
    std::vector<double> synapse_unit;  // n_neurons x columns, row-major

    static MismatchModel sample(const ArrayShape& shape, double cv, std::uint64_t seed);
};

struct EnergyMeter {
    std::uint64_t sop_count = 0;
    double energy_per_sop = kRollsEnergyPerSop;

    double total_energy() const { return static_cast<double>(sop_count) * energy_per_sop; }
};

struct EnergyReport {
    std::uint64_t sop_count = 0;
    double total_energy = 0.0;
};

struct RasterEntry {
    TimeUs timestamp = 0;
    int neuron = 0;

    friend bool operator==(const RasterEntry&, const RasterEntry&) = default;
};

class Chip {
public:
    Chip(const ChipConfig& cfg, ConnectivityMatrix connectivity);
    explicit Chip(const ChipConfig& cfg);

    const ChipConfig& config() const { return cfg_; }
    const ConnectivityMatrix& connectivity() const { return connectivity_; }
    TimeUs now() const { return now_us_; }
    int neurons() const { return cfg_.n_neurons; }

    // Delivers one input event immediately (at the current time) and returns
    // the number of synaptic operations performed. Throws RoutingError for an
    // address outside the input space.
    std::uint64_t route_event(const AerEvent& e);

    // Runs every step whose start lies before `until` and returns the output
    // spikes emitted. Inputs must be time sorted and fall inside the
    // simulated window.
    std::vector<AerEvent> advance(TimeUs until, std::span<const AerEvent> input = {});

    EnergyReport energy_report() const;
    const std::vector<RasterEntry>& read_raster() const { return raster_; }

    // Zeroes every dynamic current, calcium trace and pending spike while
    // keeping time, weights, plastic states and the energy meter.
    void clear_activity();

    // Direct state access, the emulator's equivalent of the on-chip ADCs and
    // bias DACs.
    double membrane(int neuron) const { return membrane_[check(neuron)]; }
    void set_membrane(int neuron, double current);
    double exc_current(int neuron) const { return exc_[check(neuron)]; }
    double inh_current(int neuron) const { return inh_[check(neuron)]; }
    double calcium(int neuron) const { return calcium_[check(neuron)]; }
    double threshold(int neuron) const { return threshold_[check(neuron)]; }
    // Constant current added to the membrane input.
    void set_bias_current(int neuron, double current);
    double bias_current(int neuron) const { return bias_[check(neuron)]; }

    double membrane_tau(int neuron) const { return membrane_tau_[check(neuron)]; }
    double exc_tau(int neuron) const { return exc_tau_[check(neuron)]; }
    double inh_tau(int neuron) const { return inh_tau_[check(neuron)]; }
    // Every mismatched DPI time constant on the chip.
    std::vector<double> time_constants() const;

    // Plastic state X with pending drift applied up to the current time.
    double plastic_state(SynapseRef s) const;
    double plastic_weight(SynapseRef s) const;

    // Presynaptic spike at a plastic synapse: applies the learning rule using
    // the postsynaptic neuron's current membrane and calcium. No-op for
    // disabled columns.
    void update_plasticity(SynapseRef s);

private:
    struct Target {
        int neuron;
        int column;
        enum class Kind : std::uint8_t { excitatory, inhibitory, plastic } kind;
        double jump;  // static: |level| * unit * mismatch; plastic: unit * mismatch
        std::size_t plastic_slot;
    };

    std::size_t check(int neuron) const;
    void build_targets();
    std::uint64_t deliver(const std::vector<Target>& targets);
    void step(std::span<const AerEvent> events, std::vector<AerEvent>& out);
    double drifted(std::size_t slot) const;

    ChipConfig cfg_;
    ConnectivityMatrix connectivity_;
    MismatchModel mismatch_;

    std::vector<std::vector<Target>> input_targets_;
    std::vector<std::vector<Target>> neuron_targets_;

    // Per neuron, structure-of-arrays for the step kernel.
    std::vector<double> membrane_;
    std::vector<double> exc_;
    std::vector<double> inh_;
    std::vector<double> bias_;
    std::vector<double> calcium_;
    std::vector<TimeUs> refractory_until_;
    std::vector<double> threshold_;
    std::vector<double> membrane_tau_;
    std::vector<double> exc_tau_;
    std::vector<double> inh_tau_;
    std::vector<double> membrane_decay_;
    std::vector<double> exc_decay_;
    std::vector<double> inh_decay_;
    double membrane_gain_ = 1.0;
    double calcium_decay_ = 1.0;
    TimeUs refractory_us_ = 0;

    // Plastic synapses, indexed by slot = neuron * n_plastic_cols + column.
    std::vector<double> plastic_x_;
    std::vector<double> plastic_time_;
    std::vector<std::uint8_t> plastic_on_;

    std::vector<int> pending_;  // spikes emitted last step, delivered next step
    std::vector<int> spiked_;   // scratch
    TimeUs now_us_ = 0;
    EnergyMeter meter_{};
    std::vector<RasterEntry> raster_;
};

}  // namespace neuroloop

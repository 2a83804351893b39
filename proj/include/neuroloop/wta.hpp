#pragma once

// Winner-take-all experiments on the chip: a compiled WTA driven by noisy
// spatially-tuned AER input, and the continuous-field reference that predicts
// which input should win.

#include <cstdint>
#include <vector>

#include "neuroloop/chip.hpp"
#include "neuroloop/fields.hpp"

namespace neuroloop {

struct WtaStimulus {
    int location = 0;   // excitatory neuron index
    double rate = 0.0;  // peak event rate (Hz) at the target neuron
};

struct WtaTrialParams {
    ChipConfig chip{};
    WtaSpec spec{};
    WtaLayout layout{};
    std::vector<WtaStimulus> targets;
    double profile_sigma = 1.5;        // spatial spread of each target, in neurons
    double background_fraction = 0.0;  // share of all events drawn uniformly
    double duration = 1.0;             // seconds
    int input_level = 3;
    int winner_radius = 3;    // neurons around a target credited to it
    double settle_time = 0.1; // spikes before this are ignored when scoring

    // Continuous reference: field over the excitatory pool driven by the
    // expected event density.
    FieldParams field{0.02, -5.0, 64, 1.0, Boundary::zero_padded, 4.0, false};
    KernelParams field_kernel{4.0, 1.5, 1.5, 30.0};
    double field_input_gain = 0.08;  // activation per Hz of expected input
};

struct WtaTrialResult {
    std::vector<AerEvent> input;       // address = excitatory neuron index
    std::vector<RasterEntry> output;   // excitatory spikes, neuron = pool index
    std::vector<RasterEntry> inhibitory;
    std::vector<int> spike_counts;     // per excitatory neuron
    int winner = -1;                   // index into targets, -1 if undecided
    double input_std = 0.0;
    double output_std = 0.0;
    EnergyReport energy{};
};

// Input events for one trial: target events drawn from Gaussian profiles,
// plus uniformly placed background events. Deterministic per seed.
std::vector<AerEvent> wta_input_stream(const WtaTrialParams& p, std::uint64_t seed);

WtaTrialResult run_wta_trial(const WtaTrialParams& p, std::uint64_t seed);

// Target index whose neighbourhood holds the largest surviving peak of the
// continuous field, or -1 if no peak forms.
int continuous_winner(const WtaTrialParams& p);

// Expected event rate per excitatory neuron.
std::vector<double> expected_input_density(const WtaTrialParams& p);

// Spatial standard deviation of the event addresses.
double spatial_std(const std::vector<int>& positions);

// Two-target trial drawn from the seed: random well-separated locations, the
// stronger target (peak `strong_rate`, the other `strong_rate / ratio`) on a
// random side.
WtaTrialParams two_target_trial(const WtaTrialParams& base, std::uint64_t seed, double strong_rate,
                                double ratio);

// Index of the strongest target.
int strongest_target(const WtaTrialParams& p);

}  // namespace neuroloop

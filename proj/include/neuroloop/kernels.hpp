#pragma once

// Data-parallel inner loops. Every kernel has a serial reference version and
// an OpenMP version that must produce bit-identical results; the tests hold
// them to that and bench/ compares their speed.

#include <cstdint>
#include <span>
#include <vector>

namespace neuroloop::kernels {

// Per-neuron state and constants for one global chip step.
struct NeuronArrays {
    std::span<double> membrane;
    std::span<double> exc;
    std::span<double> inh;
    std::span<double> calcium;
    std::span<std::int64_t> refractory_until;
    std::span<const double> bias;
    std::span<const double> threshold;
    std::span<const double> membrane_decay;
    std::span<const double> exc_decay;
    std::span<const double> inh_decay;
};

struct StepConstants {
    std::int64_t step_end = 0;   // microseconds
    std::int64_t refractory = 0; // microseconds
    double membrane_gain = 1.0;
    double reset = 0.0;
    double calcium_decay = 1.0;
};

// Relaxes every membrane toward gain * max(0, exc + bias - inh), applies
// threshold, reset and refractory hold, then decays the synaptic currents
// and calcium traces. Indices of neurons that fired are written to `spiked`
// in increasing order.
void neuron_update_serial(const NeuronArrays& a, const StepConstants& k, std::vector<int>& spiked);
void neuron_update_parallel(const NeuronArrays& a, const StepConstants& k, std::vector<int>& spiked);

// Discrete lateral interaction of a 1-D field:
//   out[i] = dx * sum_j rate[j] * kernel[|i - j|]            (zero padded)
//   out[i] = dx * sum_j rate[j] * kernel[min(|i-j|, N-|i-j|)] (periodic)
// `kernel` holds the sampled interaction for distances 0..N-1.
void lateral_serial(std::span<const double> rate, std::span<const double> kernel, double dx,
                    bool periodic, std::span<double> out);
void lateral_parallel(std::span<const double> rate, std::span<const double> kernel, double dx,
                      bool periodic, std::span<double> out);

}  // namespace neuroloop::kernels

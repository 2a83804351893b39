#include "neuroloop/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace neuroloop::kernels {

namespace {

// Values that decay into the subnormal range are zero for every purpose here
// and make the arithmetic very slow.
inline double flush(double x) { return std::abs(x) < std::numeric_limits<double>::min() ? 0.0 : x; }

inline bool update_one(const NeuronArrays& a, const StepConstants& k, std::size_t n) {
    bool fired = false;
    if (k.step_end <= a.refractory_until[n]) {
        a.membrane[n] = k.reset;
    } else {
        const double drive = std::max(0.0, a.exc[n] + a.bias[n] - a.inh[n]);
        const double steady = k.membrane_gain * drive;
        double m = steady + (a.membrane[n] - steady) * a.membrane_decay[n];
        if (m >= a.threshold[n]) {
            m = k.reset;
            a.refractory_until[n] = k.step_end + k.refractory;
            fired = true;
        }
        a.membrane[n] = flush(m);
    }
    a.exc[n] = flush(a.exc[n] * a.exc_decay[n]);
    a.inh[n] = flush(a.inh[n] * a.inh_decay[n]);
    a.calcium[n] = flush(a.calcium[n] * k.calcium_decay);
    return fired;
}

inline std::size_t distance(std::size_t i, std::size_t j, std::size_t n, bool periodic) {
    const std::size_t d = i > j ? i - j : j - i;
    return periodic ? std::min(d, n - d) : d;
}

}  // namespace

void neuron_update_serial(const NeuronArrays& a, const StepConstants& k, std::vector<int>& spiked) {
    spiked.clear();
    const std::size_t n = a.membrane.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (update_one(a, k, i)) spiked.push_back(static_cast<int>(i));
    }
}

void neuron_update_parallel(const NeuronArrays& a, const StepConstants& k, std::vector<int>& spiked) {
    spiked.clear();
    const auto n = static_cast<std::ptrdiff_t>(a.membrane.size());
    std::vector<unsigned char> fired(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        fired[static_cast<std::size_t>(i)] = update_one(a, k, static_cast<std::size_t>(i)) ? 1 : 0;
    }
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (fired[static_cast<std::size_t>(i)]) spiked.push_back(static_cast<int>(i));
    }
}

void lateral_serial(std::span<const double> rate, std::span<const double> kernel, double dx,
                    bool periodic, std::span<double> out) {
    const std::size_t n = rate.size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += rate[j] * kernel[distance(i, j, n, periodic)];
        out[i] = dx * acc;
    }
}

void lateral_parallel(std::span<const double> rate, std::span<const double> kernel, double dx,
                      bool periodic, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(rate.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t j = 0; j < n; ++j) {
            acc += rate[static_cast<std::size_t>(j)] *
                   kernel[distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                                   static_cast<std::size_t>(n), periodic)];
        }
        out[static_cast<std::size_t>(i)] = dx * acc;
    }
}

}  // namespace neuroloop::kernels

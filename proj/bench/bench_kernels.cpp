// Serial vs OpenMP kernels: neuron update over the chip array and the
// lateral interaction of a neural field.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "neuroloop/kernels.hpp"

namespace {

using namespace neuroloop::kernels;

struct Population {
    std::vector<double> membrane, exc, inh, calcium, bias, threshold, membrane_decay, exc_decay, inh_decay;
    std::vector<std::int64_t> refractory_until;

    explicit Population(std::size_t n)
        : membrane(n), exc(n), inh(n), calcium(n), bias(n), threshold(n, 20e-12), membrane_decay(n, 0.995),
          exc_decay(n, 0.995), inh_decay(n, 0.99), refractory_until(n, 0) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            membrane[i] = 15e-12 * u(rng);
            exc[i] = 10e-12 * u(rng);
            inh[i] = 5e-12 * u(rng);
            bias[i] = 18e-12 * u(rng);
        }
    }

    NeuronArrays arrays() {
        return {membrane, exc, inh, calcium, refractory_until, bias, threshold, membrane_decay, exc_decay, inh_decay};
    }
};

template <void (*Update)(const NeuronArrays&, const StepConstants&, std::vector<int>&)>
void neuron_update(benchmark::State& state) {
    Population pop(static_cast<std::size_t>(state.range(0)));
    const auto a = pop.arrays();
    StepConstants k{0, 4000, 1.0, 0.0, 0.99};
    std::vector<int> spiked;
    for (auto _ : state) {
        k.step_end += 100;
        Update(a, k, spiked);
        benchmark::DoNotOptimize(spiked.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <void (*Lateral)(std::span<const double>, std::span<const double>, double, bool, std::span<double>)>
void lateral(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<double> rate(n), kernel(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        rate[i] = static_cast<double>(i % 7) / 7.0;
        kernel[i] = 1.0 / (1.0 + static_cast<double>(i));
    }
    for (auto _ : state) {
        Lateral(rate, kernel, 0.1, true, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

BENCHMARK(neuron_update<neuron_update_serial>)->Name("neuron_update/serial")->RangeMultiplier(4)->Range(256, 65536);
BENCHMARK(neuron_update<neuron_update_parallel>)->Name("neuron_update/parallel")->RangeMultiplier(4)->Range(256, 65536);
BENCHMARK(lateral<lateral_serial>)->Name("lateral/serial")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(lateral<lateral_parallel>)->Name("lateral/parallel")->RangeMultiplier(4)->Range(64, 4096);

}  // namespace

BENCHMARK_MAIN();

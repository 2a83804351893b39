#pragma once

// Seed-parallel trial batches. Each trial owns all of its state, so trials
// run concurrently; results come back in seed order whatever the schedule.

#include <cstdint>
#include <exception>
#include <vector>

#include <omp.h>

namespace neuroloop {

// Runs fn(seed) for every seed on up to `jobs` threads (0 = OpenMP default).
// If trials throw, one of the exceptions is rethrown after the batch.
template <class Fn>
auto run_batch(const std::vector<std::uint64_t>& seeds, int jobs, Fn fn) {
    using Result = decltype(fn(std::uint64_t{}));
    std::vector<Result> out(seeds.size());
    std::exception_ptr error;
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
    const auto n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = fn(seeds[static_cast<std::size_t>(i)]);
        } catch (...) {
#pragma omp critical(neuroloop_batch_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace neuroloop

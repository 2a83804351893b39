#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "neuroloop/errors.hpp"
#include "neuroloop/wta.hpp"

using namespace neuroloop;

TEST_CASE("input stream is deterministic, sorted and within the pool") {
    WtaTrialParams p;
    p.targets = {{20, 100}, {44, 60}};
    p.background_fraction = 0.2;
    const auto a = wta_input_stream(p, 3);
    CHECK(a == wta_input_stream(p, 3));
    CHECK(a != wta_input_stream(p, 4));
    CHECK(is_time_sorted(a));
    for (const auto& e : a) {
        CHECK(e.address >= 0);
        CHECK(e.address < 64);
        CHECK(e.timestamp < 1'000'000);
    }
}

TEST_CASE("background fraction sets the share of uniform events") {
    WtaTrialParams p;
    p.targets = {{32, 100}};
    p.background_fraction = 0.2;
    const auto rate = expected_input_density(p);
    double total = 0;
    for (double r : rate) total += r;
    const double background = rate.front() * 64;  // the profile is negligible 32 cells away
    CHECK(background / total == doctest::Approx(0.2).epsilon(1e-6));
    p.background_fraction = 1.0;
    CHECK_THROWS_AS(expected_input_density(p), DomainError);
}

TEST_CASE("spatial standard deviation") {
    CHECK(spatial_std({}) == 0);
    CHECK(spatial_std({4, 4, 4}) == 0);
    CHECK(spatial_std({0, 2}) == doctest::Approx(1.0));
}

TEST_CASE("continuous field picks the stronger of two targets") {
    WtaTrialParams p;
    p.targets = {{20, 100}, {44, 60}};
    CHECK(continuous_winner(p) == 0);
    p.targets = {{20, 60}, {44, 100}};
    CHECK(continuous_winner(p) == 1);
    p.targets = {{20, 1}, {44, 1}};
    CHECK(continuous_winner(p) == -1);  // too weak to form a peak
}

TEST_CASE("two-target trials are separated and randomized") {
    WtaTrialParams base;
    int strong_first = 0;
    for (std::uint64_t s = 1; s <= 40; ++s) {
        const auto p = two_target_trial(base, s, 100, 1.5);
        REQUIRE(p.targets.size() == 2);
        CHECK(std::abs(p.targets[0].location - p.targets[1].location) >= 16);
        const int k = strongest_target(p);
        CHECK(p.targets[static_cast<std::size_t>(k)].rate == 100);
        CHECK(p.targets[static_cast<std::size_t>(1 - k)].rate == doctest::Approx(100 / 1.5));
        strong_first += k == 0;
    }
    CHECK(strong_first > 5);
    CHECK(strong_first < 35);
}

TEST_CASE("spiking WTA keeps the stronger input and silences the weaker") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        WtaTrialParams p;
        p.targets = {{20, 100}, {44, 60}};
        const auto r = run_wta_trial(p, seed);
        CHECK(r.winner == 0);
        int a = 0, b = 0;
        for (const auto& e : r.output) {
            if (e.timestamp < 500'000) continue;
            if (std::abs(e.neuron - 20) <= 3) ++a;
            if (std::abs(e.neuron - 44) <= 3) ++b;
        }
        CHECK(a > 20);
        CHECK(a > 2 * b);
    }
}

TEST_CASE("WTA output is narrower than noisy input") {
    WtaTrialParams p;
    p.targets = {{30, 100}};
    p.background_fraction = 0.2;
    const auto r = run_wta_trial(p, 9);
    CHECK(r.output_std < r.input_std);
    CHECK(r.winner == 0);
    CHECK(r.energy.sop_count > 0);
}

TEST_CASE("trial is reproducible") {
    WtaTrialParams p;
    p.targets = {{20, 100}, {44, 60}};
    p.duration = 0.3;
    const auto a = run_wta_trial(p, 2);
    const auto b = run_wta_trial(p, 2);
    CHECK(a.output == b.output);
    CHECK(a.spike_counts == b.spike_counts);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "neuroloop/errors.hpp"
#include "neuroloop/sequence.hpp"

using namespace neuroloop;

TEST_CASE("sequence network fills the chip") {
    const SequenceParams p;
    const auto net = build_sequence_network(p);
    CHECK(net.layout.used() == 256);
    CHECK(net.layout.at("ordinal_1").begin == 0);
    CHECK(net.layout.at("memory_1").begin == 80);
    CHECK(net.layout.at("content").begin == 160);
    CHECK(net.layout.at("cos").size == 16);
    // Every ordinal neuron has one plastic synapse on every content neuron.
    CHECK(net.connectivity.plastic_synapse_count() == 5u * 16u * 64u);

    SequenceParams big = p;
    big.n_items = 6;
    CHECK_THROWS_AS(build_sequence_network(big), CapacityError);
}

TEST_CASE("nothing is stored before learning") {
    const SequenceParams p;
    const auto net = build_sequence_network(p);
    const Chip chip(net.chip, net.connectivity);
    for (const auto& row : learned_states(chip, net, p)) {
        REQUIRE(row.size() == 64);
        for (double x : row) CHECK(x == 0.0);
    }
}

TEST_CASE("learning margin and replay matching") {
    std::vector<std::vector<double>> x(2, std::vector<double>(10, 0.0));
    x[0][2] = 1.0;
    x[0][3] = 1.0;
    x[1][7] = 1.0;
    x[1][0] = 0.5;
    // Item 0 at 2: on {1, 2, 3} mean 2/3, off mean 0. Item 1 at 7: on {6, 7, 8}
    // mean 1/3, off mean 0.5/7.
    CHECK(learning_margin(x, {2, 7}, 1) == doctest::Approx(1.0 / 3 - 0.5 / 7));
    CHECK(learning_margin(x, {}, 1) == 0.0);
    CHECK(replay_matches({12, 41, 54}, {12, 40, 55}, 2));
    CHECK_FALSE(replay_matches({12, 44, 55}, {12, 40, 55}, 2));
    CHECK_FALSE(replay_matches({12, 40}, {12, 40, 55}, 2));
}

TEST_CASE("invalid sequences are rejected") {
    const SequenceParams p;
    CHECK_THROWS_AS(run_sequence_experiment({1, 2, 3, 4, 5, 6}, p, 1), DomainError);
    CHECK_THROWS_AS(run_sequence_experiment({10, 10}, p, 1), DomainError);
    CHECK_THROWS_AS(run_sequence_experiment({64}, p, 1), DomainError);
    CHECK_THROWS_AS(run_sequence_experiment({-1}, p, 1), DomainError);
}

TEST_CASE("empty sequence replays nothing") {
    const auto r = run_sequence_experiment({}, SequenceParams{}, 1);
    CHECK(r.replay.empty());
    CHECK(r.margin == 0.0);
}

TEST_CASE("three items are learned and replayed in order") {
    const SequenceParams p;
    const std::vector<int> items{12, 40, 55};
    const auto r = run_sequence_experiment(items, p, 1);
    CHECK(replay_matches(r.replay, items, p.match_radius));
    CHECK(r.margin >= 0.3);
    // Unused ordinal positions learn nothing.
    for (double x : r.learned[3]) CHECK(x == 0.0);
    REQUIRE(r.replay_times.size() == r.replay.size());
    for (std::size_t k = 1; k < r.replay_times.size(); ++k) CHECK(r.replay_times[k] > r.replay_times[k - 1]);
    CHECK(r.energy.sop_count > 0);

    REQUIRE(r.synapses.size() == static_cast<std::size_t>(p.n_items * p.group_size));
    for (const auto& row : r.synapses) CHECK(row.size() == static_cast<std::size_t>(p.n_locations));
    for (int k = 0; k < p.n_items; ++k) {
        for (int j = 0; j < p.n_locations; ++j) {
            double sum = 0;
            for (int g = 0; g < p.group_size; ++g) sum += r.synapses[k * p.group_size + g][j];
            CHECK(r.learned[k][j] == doctest::Approx(sum / p.group_size).epsilon(1e-12));
        }
    }

    const auto again = run_sequence_experiment(items, p, 1);
    CHECK(again.replay == r.replay);
    CHECK(again.raster == r.raster);
}

TEST_CASE("replay order survives slower presentation and idle gaps") {
    SequenceParams p;
    const std::vector<int> items{50, 8, 30};
    p.t_item *= 2;
    CHECK(replay_matches(run_sequence_experiment(items, p, 2).replay, items, p.match_radius));
    p = SequenceParams{};
    p.idle_gap = 2.0;
    CHECK(replay_matches(run_sequence_experiment(items, p, 2).replay, items, p.match_radius));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "neuroloop/braitenberg.hpp"
#include "neuroloop/errors.hpp"

using namespace neuroloop;

namespace {

Arena one_obstacle() {
    Arena a;
    a.obstacles = {{2.0, 2.0, 0.2}};
    return a;
}

int level_between(const ConnectivityMatrix& m, int from, int to) {
    for (const auto& s : m.targets(Source::neuron(from))) {
        if (s.neuron == to) return m.static_level(s);
    }
    return 0;
}

}  // namespace

TEST_CASE("arena validation") {
    CHECK_NOTHROW(validate(Arena{}));
    CHECK_NOTHROW(validate(one_obstacle()));
    Arena a = one_obstacle();
    a.target_x = 2.05;
    CHECK_THROWS_AS(validate(a), ConfigError);
    a = one_obstacle();
    a.obstacles.push_back({3.9, 1.0, 0.2});
    CHECK_THROWS_AS(validate(a), ConfigError);
    a = Arena{};
    a.start_x = -0.1;
    CHECK_THROWS_AS(validate(a), ConfigError);
}

TEST_CASE("arena text format round-trips") {
    Arena a = one_obstacle();
    a.obstacles.push_back({1.0, 3.0, 0.15});
    a.led_rate = 50;
    std::stringstream s;
    write_arena(s, a);
    const Arena b = read_arena(s);
    CHECK(b.width == a.width);
    CHECK(b.led_rate == 50);
    REQUIRE(b.obstacles.size() == 2);
    CHECK(b.obstacles[1].x == 1.0);
    CHECK(b.obstacles[1].radius == 0.15);
    std::istringstream bad("obstacle 1 2\n");
    CHECK_THROWS_AS(read_arena(bad), ParseError);
}

TEST_CASE("unicycle step") {
    RobotState r;
    r.theta = std::numbers::pi / 2;
    const RobotLimits lim{0.3, 2.0, 0.08};
    const auto s = robot_step(r, 0.2, 0.5, 0.1, lim);
    CHECK(s.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.y == doctest::Approx(0.02));
    CHECK(s.theta == doctest::Approx(std::numbers::pi / 2 + 0.05));
    const auto c = robot_step(r, 5.0, -9.0, 0.1, lim);
    CHECK(c.v == 0.3);
    CHECK(c.omega == -2.0);
    CHECK(wrap_angle(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
    CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("collisions freeze the robot") {
    const Arena a = one_obstacle();
    const RobotLimits lim{0.3, 2.0, 0.08};
    RobotState r;
    r.x = 1.70;
    r.y = 2.0;
    const auto free = robot_step(a, r, 0.1, 0.0, 0.1, lim);
    CHECK_FALSE(free.collision);
    CHECK(free.state.x == doctest::Approx(1.71));
    r.x = 1.715;
    const auto hit = robot_step(a, r, 0.3, 0.0, 0.1, lim);
    CHECK(hit.collision);
    CHECK(hit.state.x == 1.715);
    CHECK(hit.state.v == 0.0);
    CHECK(collides(a, 0.05, 1.0, 0.08));  // wall
    CHECK_FALSE(collides(a, 0.5, 1.0, 0.08));
}

TEST_CASE("pinhole camera geometry") {
    const DvsModel m;
    CHECK(m.focal() == doctest::Approx(64.0 / std::tan(std::numbers::pi / 6)));
    CHECK(m.column(0.0) == 64.0);
    CHECK(m.column(0.2) == doctest::Approx(86.4713).epsilon(1e-5));
    CHECK(m.column(-m.fov / 2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("static robot sees only the LED, above the horizon") {
    DvsModel m;
    Arena a = Arena{};
    a.obstacles = {{2.0, 1.3, 0.2}};
    RobotState r{0.5, 2.0, 0.0, 0.0, 0.0};
    std::mt19937_64 rng(7);
    const auto ev = simulate_dvs(m, a, r, 0.0, 1.0, rng);
    // 200 transitions of 1 ms, 600 events/s on each of 9 pixels.
    CHECK(std::abs(static_cast<double>(ev.size()) - 1080.0) < 5 * std::sqrt(1080.0));
    for (const auto& e : ev) {
        CHECK(e.y < m.height / 2);
        CHECK(std::abs(e.x - 64) <= 1);
    }
    a.led_rate = 0;
    CHECK(simulate_dvs(m, a, r, 0.0, 1.0, rng).empty());
}

TEST_CASE("an obstacle on the line of sight hides the LED") {
    const DvsModel m;
    const RobotState r{0.5, 2.0, 0.0, 0.0, 0.0};
    std::mt19937_64 rng(1);
    CHECK(simulate_dvs(m, one_obstacle(), r, 0.0, 0.5, rng).empty());
}

TEST_CASE("turning makes obstacles fire below the horizon, in proportion to k_motion") {
    DvsModel m;
    m.k_texture = 0;
    Arena a = one_obstacle();
    a.led_rate = 0;
    RobotState r{0.5, 2.0, 0.0, 0.0, 0.3};
    auto count = [&](double k) {
        m.k_motion = k;
        std::mt19937_64 rng(3);
        std::size_t n = 0;
        for (int i = 0; i < 20; ++i) {
            for (const auto& e : simulate_dvs(m, a, r, 0.01 * i, 0.01, rng)) {
                CHECK(e.y >= m.height / 2);
                ++n;
            }
        }
        return static_cast<double>(n);
    };
    const double base = count(300);
    CHECK(base > 100);
    CHECK(count(600) / base == doctest::Approx(2.0).epsilon(0.15));
    r.omega = 0;
    CHECK(count(300) < 0.2 * base);  // looming alone is much weaker
}

TEST_CASE("gyro events scale with the turn rate") {
    GyroModel g;
    std::mt19937_64 rng(5);
    CHECK(gyro_events(g, 0.0, 0.0, 0.1, rng).empty());
    const auto ev = gyro_events(g, -0.2, 0.0, 0.1, rng);
    // 8 channels x 5000 events/s per rad/s x 0.2 rad/s x 0.1 s.
    CHECK(std::abs(static_cast<double>(ev.size()) - 800.0) < 5 * std::sqrt(800.0));
    CHECK(is_time_sorted(ev));
    g.step = 0.1;
    const auto stepped = gyro_events(g, 0.15, 0.0, 0.1, rng);
    for (const auto& e : stepped) CHECK(e.address <= 1);
}

TEST_CASE("layout places populations contiguously and refuses overflow") {
    NetworkLayout L(20);
    const auto a = L.add("a", 8);
    const auto b = L.add("b", 12);
    CHECK(a.begin == 0);
    CHECK(b.begin == 8);
    CHECK(b[3] == 11);
    CHECK(L.used() == 20);
    CHECK(L.owner(9)->name == "b");
    CHECK(L.owner(20) == nullptr);
    CHECK_THROWS_AS(L.add("c", 1), CapacityError);
    NetworkLayout M(20);
    M.add("a", 1);
    CHECK_THROWS_AS(M.add("a", 1), CapacityError);
    CHECK_THROWS_AS(L.at("missing"), std::out_of_range);
}

TEST_CASE("connect_all skips self connections") {
    ConnectivityMatrix m(ArrayShape{8, 4, 8});
    const Population p{"p", 0, 3};
    connect_all(m, p, p, 2);
    CHECK(m.static_synapse_count() == 6);
    CHECK(level_between(m, 0, 1) == 2);
    CHECK(level_between(m, 1, 1) == 0);
}

TEST_CASE("motor decoding uses mean per-neuron rates") {
    BraitenbergParams p;
    const auto net = build_braitenberg(p);
    const auto& speed = net.layout.at("speed");
    const auto& right = net.layout.at("motor_r");
    std::vector<AerEvent> spikes;
    for (int k = 0; k < 80; ++k) {
        spikes.push_back({1000 * k, speed[k % speed.size], EventKind::output});
        spikes.push_back({1000 * k, right[k % right.size], EventKind::output});
    }
    spikes.push_back({-1, speed[0], EventKind::output});  // outside the window
    const auto cmd = decode_motors(spikes, 99'999, 0.1, net.layout, 0.002, 0.004);
    CHECK(cmd.v == doctest::Approx(0.1));       // 50 Hz x 0.002
    CHECK(cmd.omega == doctest::Approx(0.2));   // 50 Hz x 0.004, turning right
    CHECK_THROWS_AS(decode_motors(spikes, 0, 0.0, net.layout, 1, 1), DomainError);
}

TEST_CASE("bump counting") {
    const std::vector<int> c{0, 3, 4, 0, 0, 2, 3, 0, 3, 0};
    CHECK(count_bumps(c, 3) == 3);
    CHECK(count_bumps(c, 2) == 3);
    CHECK(count_bumps(c, 3, 1) == 2);
    CHECK(count_bumps(c, 3, 4) == 1);
    CHECK(count_bumps(std::vector<int>(5, 0), 1) == 0);
}

TEST_CASE("Braitenberg network fills the chip and is wired for turning away") {
    const BraitenbergParams p;
    const auto net = build_braitenberg(p);
    CHECK(net.layout.used() == 256);
    const auto& m = net.connectivity;
    const auto& wta2 = net.layout.at("target_wta2");
    const auto& obstacle = net.layout.at("obstacle");
    const auto& left = net.layout.at("motor_l");
    const auto& right = net.layout.at("motor_r");
    // Target on the right excites Motor-R, on the left Motor-L.
    CHECK(level_between(m, wta2[63], right[0]) == 3);
    CHECK(level_between(m, wta2[0], left[0]) == 3);
    CHECK(level_between(m, wta2[63], left[0]) == 0);
    // Obstacle on the left turns right, hardest near the image centre.
    CHECK(level_between(m, obstacle[31], right[0]) == 3);
    CHECK(level_between(m, obstacle[0], right[0]) == 1);
    CHECK(level_between(m, obstacle[40], left[0]) > 0);
    CHECK(level_between(m, obstacle[40], right[0]) == 0);
    const auto& gyro = net.layout.at("gyro");
    CHECK(level_between(m, gyro[0], net.layout.at("target_wta1")[5]) == p.gyro_to_target);
    CHECK(level_between(m, gyro[0], obstacle[5]) == p.gyro_to_obstacle);

    BraitenbergParams big = p;
    big.motor_size = 17;
    CHECK_THROWS_AS(build_braitenberg(big), CapacityError);
}

TEST_CASE("DVS pixels map to target or obstacle inputs by image half") {
    const BraitenbergParams p;
    const auto net = build_braitenberg(p);
    CHECK(dvs_address(net, p.dvs, {0, 0, 0}) == net.target_input);
    CHECK(dvs_address(net, p.dvs, {0, 127, 63}) == net.target_input + 63);
    CHECK(dvs_address(net, p.dvs, {0, 2, 64}) == net.obstacle_input + 1);
}

TEST_CASE("gyro activity suppresses the target layer") {
    const BraitenbergParams p;
    auto net = build_braitenberg(p);
    const auto& wta1 = net.layout.at("target_wta1");
    auto spikes = [&](bool gyro_on) {
        Chip chip(net.chip, net.connectivity);
        std::mt19937_64 rng(11);
        std::vector<AerEvent> in;
        std::poisson_distribution<int> led(30);
        for (TimeUs t = 0; t < 500'000; t += 5'000) {
            for (int c = 30; c <= 32; ++c) {
                for (int k = led(rng); k > 0; --k) in.push_back({t, net.target_input + c, EventKind::input});
            }
        }
        if (gyro_on) {
            for (const auto& e : gyro_events(p.gyro, p.limits.omega_max, 0.0, 0.5, rng)) {
                in.push_back({e.timestamp, net.gyro_input + e.address, EventKind::input});
            }
        }
        sort_events(in);
        int n = 0;
        for (const auto& e : chip.advance(500'000, in)) n += wta1.contains(e.address);
        return n;
    };
    const int silent = spikes(false);
    CHECK(silent > 0);
    CHECK(spikes(true) < silent);
}

TEST_CASE("navigation trial basics") {
    const BraitenbergParams p;
    const auto none = run_navigation_trial(Arena{}, p, 1, 0.0);
    CHECK(none.trajectory.empty());
    CHECK_FALSE(none.reached);

    const auto a = run_navigation_trial(one_obstacle(), p, 4, 3.0);
    const auto b = run_navigation_trial(one_obstacle(), p, 4, 3.0);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
        CHECK(a.trajectory[i].state.x == b.trajectory[i].state.x);
        CHECK(a.trajectory[i].state.theta == b.trajectory[i].state.theta);
    }
    CHECK(a.raster == b.raster);
    CHECK(a.energy.total_energy == doctest::Approx(a.energy.sop_count * kRollsEnergyPerSop).epsilon(1e-12));
    CHECK(a.trajectory.front().t == 0.0);
    CHECK(a.trajectory.back().t == doctest::Approx(3.0));

    Arena bad;
    bad.target_x = 5;
    CHECK_THROWS_AS(run_navigation_trial(bad, p, 1, 1.0), ConfigError);
}

TEST_CASE("empty arena: target straight ahead is reached without collisions") {
    const BraitenbergParams p;
    for (std::uint64_t seed : {1, 2}) {
        const auto r = run_navigation_trial(Arena{}, p, seed, 60.0);
        CHECK(r.reached);
        CHECK(r.collisions == 0);
        CHECK(r.max_target_bumps <= 1);
        const auto& end = r.trajectory.back().state;
        CHECK(std::hypot(end.x - 3.5, end.y - 2.0) <= p.reach_radius);
    }
}

TEST_CASE("robot steers around a centred obstacle") {
    const BraitenbergParams p;
    const Arena a = one_obstacle();
    for (std::uint64_t seed : {1, 2, 4}) {
        const auto r = run_navigation_trial(a, p, seed, 60.0);
        double lateral = 0;
        bool passed = false;
        for (const auto& pt : r.trajectory) {
            if (pt.state.x >= 2.0) {
                passed = true;
                lateral = std::max(lateral, std::abs(pt.state.y - 2.0));
            }
        }
        if (!passed) continue;
        CHECK(lateral > 0.2 + p.limits.radius);
        CHECK(r.min_clearance > 0);
    }
}

TEST_CASE("clutter costs more energy than an empty arena") {
    BraitenbergParams p;
    Arena empty;
    empty.target_x = 3.9;  // out of reach within the trial
    Arena clutter = empty;
    clutter.obstacles = {{1.5, 1.7, 0.15}, {2.2, 2.25, 0.15}, {2.9, 1.8, 0.15}};
    const auto e = run_navigation_trial(empty, p, 3, 4.0);
    const auto c = run_navigation_trial(clutter, p, 3, 4.0);
    CHECK(e.trajectory.back().t == doctest::Approx(c.trajectory.back().t));
    CHECK(e.energy.total_energy < c.energy.total_energy);
}

TEST_CASE("trajectory CSV") {
    std::ostringstream out;
    write_trajectory_csv(out, {{0.5, {1, 2, 0.25, 0.1, -0.5}, true}});
    CHECK(out.str() == "t,x,y,theta,v,omega,collision_flag\n0.5,1,2,0.25,0.1,-0.5,1\n");
}

#include "neuroloop/braitenberg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <random>

#include "neuroloop/errors.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop {

namespace {

// Signed distance of neuron i from the centre of a population of n, in units
// of half the population.
double eccentricity(int i, int n) { return (i - 0.5 * (n - 1)) / (0.5 * n); }

}  // namespace

BraitenbergNetwork build_braitenberg(const BraitenbergParams& p) {
    validate(p.chip);
    BraitenbergNetwork net{p.chip, NetworkLayout(p.chip.n_neurons), ConnectivityMatrix(p.chip.shape())};
    auto& L = net.layout;
    const auto wta1 = L.add("target_wta1", p.target_size);
    const auto wta1_inh = L.add("target_wta1_inh", p.wta1_inh);
    const auto wta2 = L.add("target_wta2", p.target_size);
    const auto wta2_inh = L.add("target_wta2_inh", p.wta2_inh);
    const auto obstacle = L.add("obstacle", p.obstacle_size);
    const auto motor_l = L.add("motor_l", p.motor_size);
    const auto motor_r = L.add("motor_r", p.motor_size);
    const auto speed = L.add("speed", p.speed_size);
    const auto gyro = L.add("gyro", p.gyro_size);

    net.target_input = 0;
    net.obstacle_input = p.target_size;
    net.gyro_input = p.target_size + p.obstacle_size;
    if (net.gyro_input + p.gyro_size > p.chip.input_addresses()) {
        throw CapacityError("sensor inputs need more addresses than the chip provides");
    }

    auto& m = net.connectivity;
    const auto shape = p.chip.shape();
    WtaSpec s1 = p.wta1;
    s1.n_exc = p.target_size;
    s1.n_inh = p.wta1_inh;
    m.merge(compile_wta(s1, {wta1.begin, wta1_inh.begin}, shape));
    WtaSpec s2 = p.wta2;
    s2.n_exc = p.target_size;
    s2.n_inh = p.wta2_inh;
    m.merge(compile_wta(s2, {wta2.begin, wta2_inh.begin}, shape));

    for (int i = 0; i < p.target_size; ++i) {
        m.connect_static(Source::input(net.target_input + i), wta1[i], p.target_input_level);
        m.connect_static(Source::neuron(wta1[i]), wta2[i], p.wta1_to_wta2);
        const double e = eccentricity(i, p.target_size);
        const int level = static_cast<int>(std::lround(p.target_to_motor * std::abs(e)));
        connect_all(m, Population{"", wta2[i], 1}, e > 0 ? motor_r : motor_l, level);
    }
    for (int i = 0; i < p.obstacle_size; ++i) {
        m.connect_static(Source::input(net.obstacle_input + i), obstacle[i], p.obstacle_input_level);
        const double e = eccentricity(i, p.obstacle_size);
        const int level =
            p.obstacle_to_motor - static_cast<int>(std::floor(p.obstacle_to_motor * std::min(std::abs(e), 0.999)));
        connect_all(m, Population{"", obstacle[i], 1}, e < 0 ? motor_r : motor_l, level);
    }
    connect_all(m, obstacle, speed, p.obstacle_to_speed);
    connect_all(m, motor_l, motor_r, p.motor_cross);
    connect_all(m, motor_r, motor_l, p.motor_cross);
    for (int c = 0; c < p.gyro_size; ++c) {
        m.connect_static(Source::input(net.gyro_input + c), gyro[c], p.gyro_input_level);
    }
    connect_all(m, gyro, wta1, p.gyro_to_target);
    connect_all(m, gyro, obstacle, p.gyro_to_obstacle);
    return net;
}

int dvs_address(const BraitenbergNetwork& net, const DvsModel& dvs, const DvsEvent& e) {
    const bool upper = e.y < dvs.height / 2;
    const auto& pop = net.layout.at(upper ? "target_wta1" : "obstacle");
    const int i = std::clamp(e.x * pop.size / dvs.width, 0, pop.size - 1);
    return (upper ? net.target_input : net.obstacle_input) + i;
}

MotorCommand decode_motors(std::span<const AerEvent> spikes, TimeUs now, double window, const NetworkLayout& layout,
                           double g_v, double g_omega) {
    if (!(window > 0)) throw DomainError("decode window must be positive");
    const auto& l = layout.at("motor_l");
    const auto& r = layout.at("motor_r");
    const auto& s = layout.at("speed");
    const TimeUs from = now - static_cast<TimeUs>(std::llround(window * 1e6));
    long nl = 0, nr = 0, ns = 0;
    for (const auto& e : spikes) {
        if (e.timestamp <= from || e.timestamp > now) continue;
        nl += l.contains(e.address);
        nr += r.contains(e.address);
        ns += s.contains(e.address);
    }
    auto rate = [&](long n, const Population& p) { return p.size > 0 ? n / (window * p.size) : 0.0; };
    return {g_v * rate(ns, s), g_omega * (rate(nr, r) - rate(nl, l))};
}

int count_bumps(std::span<const int> counts, int min_count, int max_gap) {
    int bumps = 0;
    std::ptrdiff_t last = -1;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < min_count) continue;
        const auto pos = static_cast<std::ptrdiff_t>(i);
        if (last < 0 || pos - last > max_gap + 1) ++bumps;
        last = pos;
    }
    return bumps;
}

NavigationResult run_navigation_trial(const Arena& arena, const BraitenbergParams& p, std::uint64_t seed,
                                      double duration) {
    validate(arena);
    NavigationResult res;
    if (!(duration > 0)) return res;
    if (!(p.sensor_period > 0)) throw ConfigError("navigation.sensor_period", "must be positive");
    if (!(p.decode_window > 0)) throw ConfigError("navigation.decode_window", "must be positive");
    if (!(p.bump_window > 0 && p.bump_window <= p.decode_window)) {
        throw ConfigError("navigation.bump_window", "must be positive and at most the decode window");
    }

    auto net = build_braitenberg(p);
    net.chip.seed = seed;
    Chip chip(net.chip, std::move(net.connectivity));
    const auto& speed = net.layout.at("speed");
    for (int i = 0; i < speed.size; ++i) chip.set_bias_current(speed[i], p.speed_bias);
    const auto& wta2 = net.layout.at("target_wta2");

    std::mt19937_64 rng(seed * 0x2545F4914F6CDD1DULL + 17);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    RobotState robot;
    robot.x = arena.start_x + p.start_jitter * jitter(rng);
    robot.y = arena.start_y + p.start_jitter * jitter(rng);
    robot.theta = wrap_angle(arena.start_theta + p.heading_jitter * jitter(rng));

    const auto period_us = static_cast<TimeUs>(std::llround(p.sensor_period * 1e6));
    const auto end_us = static_cast<TimeUs>(std::llround(duration * 1e6));
    const auto window_us = static_cast<TimeUs>(std::llround(p.decode_window * 1e6));
    const auto bump_us = static_cast<TimeUs>(std::llround(p.bump_window * 1e6));
    std::deque<AerEvent> recent;
    std::vector<AerEvent> input;
    std::vector<int> counts(static_cast<std::size_t>(wta2.size));

    auto clearance = [&](const RobotState& r) {
        double c = std::numeric_limits<double>::infinity();
        for (const auto& o : arena.obstacles) c = std::min(c, std::hypot(r.x - o.x, r.y - o.y) - o.radius - p.limits.radius);
        return c;
    };
    res.min_clearance = clearance(robot);
    res.trajectory.push_back({0.0, robot, false});

    for (TimeUs t0 = 0; t0 < end_us; t0 += period_us) {
        const double t = static_cast<double>(t0) * 1e-6;
        if (std::hypot(robot.x - arena.target_x, robot.y - arena.target_y) <= p.reach_radius) {
            res.reached = true;
            res.time_to_target = t;
            break;
        }
        const TimeUs t1 = std::min(t0 + period_us, end_us);
        const double dt = static_cast<double>(t1 - t0) * 1e-6;

        input.clear();
        for (const auto& e : simulate_dvs(p.dvs, arena, robot, t, dt, rng)) {
            input.push_back({std::clamp(e.timestamp, t0, t1 - 1), dvs_address(net, p.dvs, e), EventKind::input});
        }
        for (const auto& e : gyro_events(p.gyro, robot.omega, t, dt, rng)) {
            input.push_back({std::clamp(e.timestamp, t0, t1 - 1), net.gyro_input + e.address, EventKind::input});
        }
        sort_events(input);
        res.input_events += input.size();

        for (const auto& e : chip.advance(t1, input)) recent.push_back(e);
        while (!recent.empty() && recent.front().timestamp <= t1 - window_us) recent.pop_front();

        std::fill(counts.begin(), counts.end(), 0);
        for (const auto& e : recent) {
            if (e.timestamp > t1 - bump_us && wta2.contains(e.address)) {
                ++counts[static_cast<std::size_t>(e.address - wta2.begin)];
            }
        }
        res.max_target_bumps =
            std::max(res.max_target_bumps, count_bumps(counts, p.bump_min_count, p.bump_merge_gap));

        const std::vector<AerEvent> window(recent.begin(), recent.end());
        const auto cmd = decode_motors(window, t1, p.decode_window, net.layout, p.g_v, p.g_omega);
        const auto step = robot_step(arena, robot, cmd.v, cmd.omega, dt, p.limits);
        robot = step.state;
        res.min_clearance = std::min(res.min_clearance, clearance(robot));
        res.trajectory.push_back({static_cast<double>(t1) * 1e-6, robot, step.collision});
        if (step.collision) {
            ++res.collisions;
            break;
        }
    }
    if (!res.reached && res.collisions == 0 &&
        std::hypot(robot.x - arena.target_x, robot.y - arena.target_y) <= p.reach_radius) {
        res.reached = true;
        res.time_to_target = res.trajectory.back().t;
    }
    res.energy = chip.energy_report();
    res.raster = chip.read_raster();
    return res;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryPoint>& trajectory) {
    out << "t,x,y,theta,v,omega,collision_flag\n";
    for (const auto& p : trajectory) {
        out << format_double(p.t) << ',' << format_double(p.state.x) << ',' << format_double(p.state.y) << ','
            << format_double(p.state.theta) << ',' << format_double(p.state.v) << ','
            << format_double(p.state.omega) << ',' << (p.collision ? 1 : 0) << '\n';
    }
}

}  // namespace neuroloop

#pragma once

// Closed-loop obstacle avoidance and target acquisition: DVS and gyro events
// drive a Braitenberg-style network on the chip, whose motor populations set
// the robot's turn rate and speed.
//
// Motor-R and Motor-L are turn-direction populations: omega is proportional
// to rate(Motor-R) - rate(Motor-L), and a positive omega turns the robot to
// the right. A target in the right image half therefore excites Motor-R,
// and an obstacle in the left image half also excites Motor-R (turn away).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "neuroloop/arena.hpp"
#include "neuroloop/chip.hpp"
#include "neuroloop/fields.hpp"
#include "neuroloop/layout.hpp"
#include "neuroloop/sensors.hpp"

namespace neuroloop {

struct BraitenbergParams {
    ChipConfig chip{};
    int target_size = 64;  // Target-WTA-1 and Target-WTA-2 excitatory pools
    int wta1_inh = 4;
    int wta2_inh = 4;
    int obstacle_size = 64;
    int motor_size = 16;
    int speed_size = 16;
    int gyro_size = 8;

    // Lateral structure of the two target layers; pool sizes come from above.
    WtaSpec wta1{64, 4, {2.0, 0.0, 1.5, 8.0}, 2, 1, -1, 3.0};
    WtaSpec wta2{64, 4, {3.0, 0.0, 1.5, 8.0}, 3, 2, -3, 3.0};

    int target_input_level = 2;    // DVS upper half -> WTA-1
    int obstacle_input_level = 1;  // DVS lower half -> Obstacle
    int gyro_input_level = 3;      // gyro events -> Gyro
    int wta1_to_wta2 = 3;
    int target_to_motor = 3;    // peak level at the image edge, 0 near the centre
    int obstacle_to_motor = 3;  // peak level at the image centre
    int obstacle_to_speed = -1;
    int gyro_to_target = -1;    // Gyro -> Target-WTA-1
    int gyro_to_obstacle = -3;  // Gyro -> Obstacle
    int motor_cross = 0;  // Motor-L <-> Motor-R mutual connection
    double speed_bias = 36e-12;  // A, constant drive of the Speed population

    double g_v = 0.002;       // m/s per Hz of mean Speed rate
    double g_omega = 0.004;   // rad/s per Hz of Motor-R minus Motor-L rate
    double decode_window = 0.1;   // s
    // Target-WTA-2 bump detection: spikes in the last bump_window (at most
    // decode_window), at least bump_min_count per neuron, runs closer than
    // bump_merge_gap silent neurons joined.
    double bump_window = 0.02;  // s
    int bump_min_count = 3;
    int bump_merge_gap = 2;
    double sensor_period = 0.01;  // s
    double reach_radius = 0.1;    // m
    double start_jitter = 0.05;   // m, uniform in each coordinate
    double heading_jitter = 0.1;  // rad, uniform

    DvsModel dvs{};
    GyroModel gyro{};
    RobotLimits limits{0.3, 0.5, 0.08};
};

struct BraitenbergNetwork {
    ChipConfig chip;
    NetworkLayout layout;
    ConnectivityMatrix connectivity;
    // Chip input addresses.
    int target_input = 0;    // one per Target-WTA-1 neuron
    int obstacle_input = 0;  // one per Obstacle neuron
    int gyro_input = 0;      // one per gyro channel
};

// Throws CapacityError if the populations do not fit the chip.
BraitenbergNetwork build_braitenberg(const BraitenbergParams& p);

// Chip input address for a DVS pixel event: upper-half pixels feed
// Target-WTA-1, lower-half pixels the Obstacle layer, by column.
int dvs_address(const BraitenbergNetwork& net, const DvsModel& dvs, const DvsEvent& e);

struct MotorCommand {
    double v = 0.0;
    double omega = 0.0;
};

// Mean per-neuron rates over (now - window, now]; omega from Motor-R minus
// Motor-L, v from Speed.
MotorCommand decode_motors(std::span<const AerEvent> spikes, TimeUs now, double window, const NetworkLayout& layout,
                           double g_v, double g_omega);

struct TrajectoryPoint {
    double t = 0.0;
    RobotState state{};
    bool collision = false;
};

struct NavigationResult {
    std::vector<TrajectoryPoint> trajectory;
    bool reached = false;
    int collisions = 0;
    double time_to_target = -1.0;  // s, negative if not reached
    double min_clearance = 0.0;    // m, closest approach of the robot edge to any obstacle
    int max_target_bumps = 0;      // most Target-WTA-2 bumps seen at any sensor step
    EnergyReport energy{};
    std::uint64_t input_events = 0;
    std::vector<RasterEntry> raster;
};

// Runs the sensor-network-motor loop at the sensor period until the target
// is within reach, a collision happens, or the duration elapses.
NavigationResult run_navigation_trial(const Arena& arena, const BraitenbergParams& p, std::uint64_t seed,
                                      double duration);

// `t,x,y,theta,v,omega,collision_flag`
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryPoint>& trajectory);

// Number of separated activity groups among the given per-neuron counts:
// runs of neurons with at least `min_count` spikes, where runs separated by
// at most `max_gap` neurons count as one.
int count_bumps(std::span<const int> counts, int min_count, int max_gap = 0);

}  // namespace neuroloop

#pragma once

// Event-based sensors for the arena robot: a geometric Poisson model of a
// Dynamic Vision Sensor and a gyroscope that emits events at a rate
// proportional to the turn rate.
//
// The DVS sees two kinds of things. Obstacles are textured cylinders
// standing on the floor, visible below the horizon (lower image half). Their
// silhouette edges and, more weakly, the texture on their surface fire at a
// rate proportional to the apparent angular speed of that part of the image,
// so a static scene seen by a static robot is silent. The target is
// an elevated blinking LED: its pixel block fires at a fixed rate during
// each on/off transition, above the horizon (upper image half), unless an
// obstacle stands on the line of sight.

#include <cstdint>
#include <random>
#include <vector>

#include "neuroloop/aer.hpp"
#include "neuroloop/arena.hpp"

namespace neuroloop {

struct DvsModel {
    int width = 128;
    int height = 128;
    double fov = 1.0471975511965976;  // horizontal field of view, rad (60 deg)
    double k_motion = 300.0;    // events per edge pixel per radian of edge motion
    double k_texture = 75.0;    // events per surface pixel per radian of motion
    double k_led = 600.0;       // events/s per LED pixel during a transition
    double transition_width = 1e-3;  // s
    int led_half_block = 1;     // LED block is (2h+1) x (2h+1) pixels
    double camera_height = 0.10;  // m
    double led_height = 0.30;     // m
    double slice = 1e-3;          // geometry is re-evaluated every slice, s

    double focal() const;  // pixels
    // Image column of a bearing (positive = right of the optical axis).
    double column(double bearing) const;
};

struct DvsEvent {
    TimeUs timestamp = 0;
    int x = 0;  // column, 0 = left
    int y = 0;  // row, 0 = top

    friend bool operator==(const DvsEvent&, const DvsEvent&) = default;
};

// Events emitted while the robot moves for dt seconds from state r at time t0
// with its current (v, omega). Time-sorted.
std::vector<DvsEvent> simulate_dvs(const DvsModel& m, const Arena& a, const RobotState& r, double t0, double dt,
                                   std::mt19937_64& rng);

struct GyroModel {
    int channels = 8;
    double gain = 5000.0;  // events/s per channel per rad/s
    double step = 0.0;    // rad/s; channel c responds to |omega| above c * step
};

// Gyro events with addresses 0..channels-1. Channel c fires at rate
// gain * max(0, |omega| - c * step), so with a nonzero step the number of
// active channels grows with the turn rate.
std::vector<AerEvent> gyro_events(const GyroModel& g, double omega, double t0, double dt, std::mt19937_64& rng);

}  // namespace neuroloop

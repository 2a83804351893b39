#pragma once

// Flat rectangular arena with circular obstacles and a blinking LED target,
// and a differential-drive (unicycle) robot moving in it.
//
// Coordinates are screen-like: x to the right, y downwards, heading theta
// measured from +x toward +y. A positive turn rate is therefore a clockwise
// (rightward) turn as seen from above, which matches the camera image where
// larger pixel columns lie to the right.

#include <iosfwd>
#include <string>
#include <vector>

namespace neuroloop {

struct Circle {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;
};

struct Arena {
    double width = 4.0;   // m
    double height = 4.0;  // m
    std::vector<Circle> obstacles;
    double target_x = 3.5;
    double target_y = 2.0;
    double led_rate = 100.0;  // blink frequency, Hz; 0 = LED off
    // Initial robot pose.
    double start_x = 0.5;
    double start_y = 2.0;
    double start_theta = 0.0;
};

// Throws ConfigError if the target or start lies inside an obstacle or any
// object lies outside the walls.
void validate(const Arena& a);

// Plain-text arena description, one statement per line:
//
//   size 4 4
//   start 0.5 2.0 0.0
//   target 3.5 2.0 100     # x y led_rate
//   obstacle 2.0 2.0 0.25  # x y radius, repeatable
Arena read_arena(std::istream& in);
Arena read_arena_file(const std::string& path);
void write_arena(std::ostream& out, const Arena& a);

struct RobotLimits {
    double v_max = 0.3;      // m/s
    double omega_max = 2.0;  // rad/s
    double radius = 0.08;    // m, collision footprint
};

struct RobotState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;  // (-pi, pi]
    double v = 0.0;
    double omega = 0.0;
};

double wrap_angle(double a);

// Unicycle Euler step with commands clamped to the limits:
// x += v cos(theta) dt, y += v sin(theta) dt, theta += omega dt.
RobotState robot_step(const RobotState& r, double v_cmd, double omega_cmd, double dt, const RobotLimits& lim);

// True if a disc of the given radius at (x, y) touches a wall or obstacle.
bool collides(const Arena& a, double x, double y, double radius);

struct StepOutcome {
    RobotState state;
    bool collision = false;
};

// Kinematic step inside the arena. A step that would end in contact leaves
// the position where it was, stops the robot and reports the collision.
StepOutcome robot_step(const Arena& a, const RobotState& r, double v_cmd, double omega_cmd, double dt,
                       const RobotLimits& lim);

}  // namespace neuroloop

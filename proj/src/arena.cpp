#include "neuroloop/arena.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "neuroloop/errors.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop {

void validate(const Arena& a) {
    if (!(a.width > 0 && a.height > 0)) throw ConfigError("arena.size", "arena dimensions must be positive");
    if (!(a.led_rate >= 0)) throw ConfigError("arena.target", "LED rate must be non-negative");
    auto inside = [&](double x, double y, double r) {
        return x - r >= 0 && y - r >= 0 && x + r <= a.width && y + r <= a.height;
    };
    for (std::size_t i = 0; i < a.obstacles.size(); ++i) {
        const auto& o = a.obstacles[i];
        const auto field = "arena.obstacle[" + std::to_string(i) + "]";
        if (!(o.radius > 0)) throw ConfigError(field, "obstacle radius must be positive");
        if (!inside(o.x, o.y, o.radius)) throw ConfigError(field, "obstacle outside the arena");
        if (std::hypot(a.target_x - o.x, a.target_y - o.y) <= o.radius) {
            throw ConfigError(field, "target lies inside an obstacle");
        }
        if (std::hypot(a.start_x - o.x, a.start_y - o.y) <= o.radius) {
            throw ConfigError(field, "start lies inside an obstacle");
        }
    }
    if (!inside(a.target_x, a.target_y, 0)) throw ConfigError("arena.target", "target outside the arena");
    if (!inside(a.start_x, a.start_y, 0)) throw ConfigError("arena.start", "start outside the arena");
}

Arena read_arena(std::istream& in) {
    Arena a;
    a.obstacles.clear();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(strip_comment(line));
        if (body.empty()) continue;
        std::vector<std::string_view> words;
        for (auto w : split(body, ' ')) {
            if (!trim(w).empty()) words.push_back(trim(w));
        }
        const auto where = "arena line " + std::to_string(line_no);
        auto num = [&](std::size_t i) { return parse_double(words.at(i), where); };
        auto need = [&](std::size_t n) {
            if (words.size() != n + 1) {
                throw ParseError(where + ": '" + std::string(words[0]) + "' takes " + std::to_string(n) + " values");
            }
        };
        const auto key = words[0];
        if (key == "size") {
            need(2);
            a.width = num(1);
            a.height = num(2);
        } else if (key == "start") {
            need(3);
            a.start_x = num(1);
            a.start_y = num(2);
            a.start_theta = num(3);
        } else if (key == "target") {
            need(3);
            a.target_x = num(1);
            a.target_y = num(2);
            a.led_rate = num(3);
        } else if (key == "obstacle") {
            need(3);
            a.obstacles.push_back({num(1), num(2), num(3)});
        } else {
            throw ParseError(where + ": unknown statement '" + std::string(key) + "'");
        }
    }
    validate(a);
    return a;
}

Arena read_arena_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open arena file");
    return read_arena(in);
}

void write_arena(std::ostream& out, const Arena& a) {
    out << "size " << format_double(a.width) << ' ' << format_double(a.height) << '\n';
    out << "start " << format_double(a.start_x) << ' ' << format_double(a.start_y) << ' '
        << format_double(a.start_theta) << '\n';
    out << "target " << format_double(a.target_x) << ' ' << format_double(a.target_y) << ' '
        << format_double(a.led_rate) << '\n';
    for (const auto& o : a.obstacles) {
        out << "obstacle " << format_double(o.x) << ' ' << format_double(o.y) << ' ' << format_double(o.radius)
            << '\n';
    }
}

double wrap_angle(double a) {
    constexpr double pi = std::numbers::pi;
    a = std::remainder(a, 2 * pi);  // [-pi, pi]
    return a <= -pi ? a + 2 * pi : a;
}

RobotState robot_step(const RobotState& r, double v_cmd, double omega_cmd, double dt, const RobotLimits& lim) {
    if (!(dt > 0)) throw DomainError("robot step needs dt > 0");
    RobotState n = r;
    n.v = std::clamp(v_cmd, -lim.v_max, lim.v_max);
    n.omega = std::clamp(omega_cmd, -lim.omega_max, lim.omega_max);
    n.x += n.v * std::cos(r.theta) * dt;
    n.y += n.v * std::sin(r.theta) * dt;
    n.theta = wrap_angle(r.theta + n.omega * dt);
    return n;
}

bool collides(const Arena& a, double x, double y, double radius) {
    if (x - radius < 0 || y - radius < 0 || x + radius > a.width || y + radius > a.height) return true;
    return std::any_of(a.obstacles.begin(), a.obstacles.end(),
                       [&](const Circle& o) { return std::hypot(x - o.x, y - o.y) < o.radius + radius; });
}

StepOutcome robot_step(const Arena& a, const RobotState& r, double v_cmd, double omega_cmd, double dt,
                       const RobotLimits& lim) {
    StepOutcome out{robot_step(r, v_cmd, omega_cmd, dt, lim), false};
    if (collides(a, out.state.x, out.state.y, lim.radius)) {
        out.state.x = r.x;
        out.state.y = r.y;
        out.state.v = 0;
        out.collision = true;
    }
    return out;
}

}  // namespace neuroloop

#include "neuroloop/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace neuroloop {

namespace {

TimeUs to_us(double t) { return static_cast<TimeUs>(std::floor(t * 1e6)); }

// True if the segment from (px, py) to (qx, qy) passes through an obstacle.
bool occluded(const Arena& a, double px, double py, double qx, double qy) {
    const double dx = qx - px, dy = qy - py;
    const double len2 = dx * dx + dy * dy;
    for (const auto& o : a.obstacles) {
        const double u = len2 > 0 ? std::clamp(((o.x - px) * dx + (o.y - py) * dy) / len2, 0.0, 1.0) : 0.0;
        if (std::hypot(px + u * dx - o.x, py + u * dy - o.y) < o.radius) return true;
    }
    return false;
}

int poisson(double mean, std::mt19937_64& rng) {
    if (!(mean > 0)) return 0;
    return std::poisson_distribution<int>(mean)(rng);
}

}  // namespace

double DvsModel::focal() const { return 0.5 * width / std::tan(0.5 * fov); }

double DvsModel::column(double bearing) const { return 0.5 * width + focal() * std::tan(bearing); }

std::vector<DvsEvent> simulate_dvs(const DvsModel& m, const Arena& a, const RobotState& r, double t0, double dt,
                                   std::mt19937_64& rng) {
    std::vector<DvsEvent> out;
    if (!(dt > 0)) return out;
    const double f = m.focal();
    const int horizon = m.height / 2;
    const double half_fov = 0.5 * m.fov;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    auto emit = [&](double begin, double length, int col, int row_lo, int row_hi, int count) {
        std::uniform_int_distribution<int> row(row_lo, row_hi);
        for (int k = 0; k < count; ++k) {
            out.push_back({to_us(begin + length * unit(rng)), col, row(rng)});
        }
    };

    const int slices = std::max(1, static_cast<int>(std::ceil(dt / m.slice - 1e-9)));
    const double h = dt / slices;
    for (int s = 0; s < slices; ++s) {
        const double ts = t0 + s * h;
        const double tau = (s + 0.5) * h;
        const double theta = r.theta + r.omega * tau;
        const double px = r.x + r.v * std::cos(r.theta) * tau;
        const double py = r.y + r.v * std::sin(r.theta) * tau;

        for (const auto& o : a.obstacles) {
            const double d = std::hypot(o.x - px, o.y - py);
            if (d <= o.radius) continue;
            const double bc = wrap_angle(std::atan2(o.y - py, o.x - px) - theta);
            const double alpha = std::asin(o.radius / d);
            const double bc_rate = -r.omega + r.v * std::sin(bc) / d;
            const double alpha_rate = o.radius * r.v * std::cos(bc) / (d * std::sqrt(d * d - o.radius * o.radius));
            const int bottom =
                std::min(m.height - 1, horizon + static_cast<int>(std::floor(f * m.camera_height / (d - o.radius))));
            const int rows = bottom - horizon + 1;
            const double lo = std::max(bc - alpha, -half_fov), hi = std::min(bc + alpha, half_fov);
            if (m.k_texture > 0 && lo < hi) {
                const int c0 = std::clamp(static_cast<int>(std::ceil(m.column(lo))), 0, m.width - 1);
                const int c1 = std::clamp(static_cast<int>(std::floor(m.column(hi))) - 1, -1, m.width - 1);
                for (int c = c0; c <= c1; ++c) {
                    const double b = std::atan((c + 0.5 - 0.5 * m.width) / f);
                    const double rate = m.k_texture * std::abs(-r.omega + r.v * std::sin(b) / d);
                    emit(ts, h, c, horizon, bottom, poisson(rate * rows * h, rng));
                }
            }
            for (int side : {-1, 1}) {
                const double edge = bc + side * alpha;
                if (std::abs(edge) >= half_fov) continue;
                const int col = std::clamp(static_cast<int>(std::floor(m.column(edge))), 0, m.width - 1);
                const double rate = m.k_motion * std::abs(bc_rate + side * alpha_rate);
                emit(ts, h, col, horizon, bottom, poisson(rate * rows * h, rng));
            }
        }

        if (a.led_rate > 0) {
            const double d = std::hypot(a.target_x - px, a.target_y - py);
            const double bearing = wrap_angle(std::atan2(a.target_y - py, a.target_x - px) - theta);
            if (d > 0 && std::abs(bearing) < half_fov && !occluded(a, px, py, a.target_x, a.target_y)) {
                const int col = std::clamp(static_cast<int>(std::floor(m.column(bearing))), 0, m.width - 1);
                const int centre_row = std::clamp(
                    horizon - 1 - static_cast<int>(std::floor(f * (m.led_height - m.camera_height) / d)), 0,
                    horizon - 1);
                const int c_lo = std::max(0, col - m.led_half_block), c_hi = std::min(m.width - 1, col + m.led_half_block);
                const int r_lo = std::max(0, centre_row - m.led_half_block);
                const int r_hi = std::min(horizon - 1, centre_row + m.led_half_block);
                const int pixels = (c_hi - c_lo + 1) * (r_hi - r_lo + 1);
                const double half_period = 0.5 / a.led_rate;
                const auto k_first = static_cast<long>(std::floor((ts - m.transition_width) / half_period));
                const auto k_last = static_cast<long>(std::floor((ts + h) / half_period));
                for (long k = std::max(0L, k_first); k <= k_last; ++k) {
                    const double w0 = std::max(ts, k * half_period);
                    const double w1 = std::min(ts + h, k * half_period + m.transition_width);
                    if (!(w1 > w0)) continue;
                    const int count = poisson(m.k_led * (w1 - w0) * pixels, rng);
                    std::uniform_int_distribution<int> pick_col(c_lo, c_hi);
                    for (int e = 0; e < count; ++e) {
                        const int c = pick_col(rng);
                        emit(w0, w1 - w0, c, r_lo, r_hi, 1);
                    }
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const DvsEvent& x, const DvsEvent& y) { return x.timestamp < y.timestamp; });
    return out;
}

std::vector<AerEvent> gyro_events(const GyroModel& g, double omega, double t0, double dt, std::mt19937_64& rng) {
    std::vector<AerEvent> out;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int c = 0; c < g.channels; ++c) {
        const int n = poisson(g.gain * std::max(0.0, std::abs(omega) - c * g.step) * dt, rng);
        for (int k = 0; k < n; ++k) out.push_back({to_us(t0 + dt * unit(rng)), c, EventKind::input});
    }
    sort_events(out);
    return out;
}

}  // namespace neuroloop

#include "neuroloop/fields.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <ostream>
#include <string>

#include "neuroloop/errors.hpp"
#include "neuroloop/kernels.hpp"
#include "neuroloop/text.hpp"

namespace neuroloop {

void validate(const FieldParams& p) {
    if (!(p.tau > 0)) throw DomainError("field tau must be positive");
    if (!(p.resting_level < 0)) throw DomainError("field resting level must be negative");
    if (p.grid_size < 3) throw DomainError("field grid needs at least 3 cells");
    if (!(p.dx > 0)) throw DomainError("field dx must be positive");
    if (!(p.sigmoid_beta > 0)) throw DomainError("sigmoid beta must be positive");
}

bool validate(const KernelParams& k, bool warn) {
    if (!(k.a_exc >= 0 && k.a_inh >= 0)) throw DomainError("kernel amplitudes must be non-negative");
    if (!(k.sigma_exc > 0 && k.sigma_inh > 0)) throw DomainError("kernel widths must be positive");
    const bool hat = k.sigma_inh > k.sigma_exc;
    if (!hat && warn) std::cerr << "warning: kernel is not Mexican-hat shaped (sigma_inh <= sigma_exc)\n";
    return hat;
}

FieldState FieldState::at_rest(const FieldParams& p) {
    validate(p);
    return {std::vector<double>(static_cast<std::size_t>(p.grid_size), p.resting_level), 0.0};
}

double mexican_hat(const KernelParams& k, double distance) {
    const double d2 = distance * distance;
    return k.a_exc * std::exp(-d2 / (2 * k.sigma_exc * k.sigma_exc)) -
           k.a_inh * std::exp(-d2 / (2 * k.sigma_inh * k.sigma_inh));
}

double sigmoid(double u, double beta) { return 1.0 / (1.0 + std::exp(-beta * u)); }

std::vector<double> sample_kernel(const KernelParams& k, int n, double dx) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) w[static_cast<std::size_t>(d)] = mexican_hat(k, d * dx);
    return w;
}

FieldState field_step(const FieldState& s, const FieldParams& p, const KernelParams& k,
                      std::span<const double> input, double dt) {
    return field_step(s, p, sample_kernel(k, p.grid_size, p.dx), input, dt);
}

FieldState field_step(const FieldState& s, const FieldParams& p, std::span<const double> kernel,
                      std::span<const double> input, double dt) {
    validate(p);
    const auto n = static_cast<std::size_t>(p.grid_size);
    if (s.u.size() != n || input.size() != n || kernel.size() != n) {
        throw DomainError("field, input and kernel sizes must equal the grid size");
    }
    if (!(dt > 0) || dt > p.tau / 10) {
        throw StabilityError("field step dt must lie in (0, tau/10]");
    }
    std::vector<double> rate(n), lateral(n);
    for (std::size_t i = 0; i < n; ++i) rate[i] = sigmoid(s.u[i], p.sigmoid_beta);
    const bool periodic = p.boundary == Boundary::periodic;
    if (p.parallel) {
        kernels::lateral_parallel(rate, kernel, p.dx, periodic, lateral);
    } else {
        kernels::lateral_serial(rate, kernel, p.dx, periodic, lateral);
    }
    FieldState next{std::vector<double>(n), s.t + dt};
    const double rate_dt = dt / p.tau;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(input[i])) throw StabilityError("field input is not finite");
        const double u = s.u[i] + rate_dt * (-s.u[i] + p.resting_level + input[i] + lateral[i]);
        if (!std::isfinite(u)) throw StabilityError("field activation diverged");
        next.u[i] = u;
    }
    return next;
}

std::vector<Peak> detect_peaks(const FieldState& s, double threshold) {
    std::vector<Peak> peaks;
    const auto n = s.u.size();
    std::size_t i = 0;
    while (i < n) {
        if (!(s.u[i] > threshold)) {
            ++i;
            continue;
        }
        double weight = 0, moment = 0, top = s.u[i];
        while (i < n && s.u[i] > threshold) {
            const double w = s.u[i] - threshold;
            weight += w;
            moment += w * static_cast<double>(i);
            top = std::max(top, s.u[i]);
            ++i;
        }
        peaks.push_back({moment / weight, top});
    }
    return peaks;
}

void write_field_csv_header(std::ostream& out, int n) {
    out << 't';
    for (int i = 0; i < n; ++i) out << ",u_" << i;
    out << '\n';
}

void write_field_csv_row(std::ostream& out, const FieldState& s) {
    out << format_double(s.t);
    for (double u : s.u) out << ',' << format_double(u);
    out << '\n';
}

int quantize_level(double weight) {
    const double r = std::round(weight);  // halfway cases go away from zero
    return static_cast<int>(std::clamp(r, static_cast<double>(kMinLevel), static_cast<double>(kMaxLevel)));
}

ConnectivityMatrix compile_wta(const WtaSpec& spec, const WtaLayout& layout, const ArrayShape& shape) {
    if (spec.n_exc <= 0 || spec.n_inh < 0) throw CapacityError("WTA pools must be non-empty");
    validate(spec.kernel, false);
    auto overflow = [&](int begin, int count, const char* pool) {
        if (begin < 0 || begin + count > shape.n_neurons) {
            throw CapacityError(std::string("WTA ") + pool + " pool [" + std::to_string(begin) + ", " +
                                std::to_string(begin + count) + ") overflows " +
                                std::to_string(shape.n_neurons) + " neurons by " +
                                std::to_string(begin + count - shape.n_neurons));
        }
    };
    overflow(layout.exc_begin, spec.n_exc, "excitatory");
    overflow(layout.inh_begin, spec.n_inh, "inhibitory");
    const bool overlap = layout.exc_begin < layout.inh_begin + spec.n_inh &&
                         layout.inh_begin < layout.exc_begin + spec.n_exc;
    if (overlap && spec.n_inh > 0) throw CapacityError("WTA excitatory and inhibitory pools overlap");

    ConnectivityMatrix m(shape);
    const double reach = spec.kernel_cutoff * spec.kernel.sigma_exc;
    for (int post = 0; post < spec.n_exc; ++post) {
        const int post_id = layout.exc_begin + post;
        for (int pre = 0; pre < spec.n_exc && spec.kernel.a_exc > 0; ++pre) {
            const int d = std::abs(pre - post);
            int level = 0;
            if (d == 0) {
                level = spec.self_exc;
            } else if (d <= reach) {
                const double w = spec.kernel.a_exc *
                                 std::exp(-static_cast<double>(d * d) /
                                          (2 * spec.kernel.sigma_exc * spec.kernel.sigma_exc));
                level = std::max(0, quantize_level(w));
            }
            m.connect_static(Source::neuron(layout.exc_begin + pre), post_id, level);
        }
        for (int k = 0; k < spec.n_inh; ++k) {
            m.connect_static(Source::neuron(layout.inh_begin + k), post_id, -std::abs(spec.inh_to_exc));
        }
    }
    for (int k = 0; k < spec.n_inh; ++k) {
        for (int pre = 0; pre < spec.n_exc; ++pre) {
            m.connect_static(Source::neuron(layout.exc_begin + pre), layout.inh_begin + k,
                             std::abs(spec.exc_to_inh));
        }
    }
    return m;
}

}  // namespace neuroloop

#include "neuroloop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "neuroloop/errors.hpp"

namespace neuroloop {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

double raw_tau(const DpiParams& p) {
    return p.capacitance * p.thermal_voltage / (p.kappa * p.leak_current);
}

void check_circuit(const DpiParams& p) {
    require(p.capacitance > 0, "DPI capacitance must be positive");
    require(p.thermal_voltage > 0, "thermal voltage must be positive");
    require(p.kappa > 0 && p.kappa < 1, "kappa must lie in (0, 1)");
    require(p.dark_current > 0, "dark current must be positive");
    require(p.leak_current > 0, "leak current must be positive");
    require(p.gain_current > 0, "gain current must be positive");
}

}  // namespace

bool validate(const DpiParams& p, const TauWindow& window, bool warn) {
    check_circuit(p);
    const double tau = raw_tau(p);
    if (tau < window.hard_min || tau > window.hard_max) {
        std::ostringstream msg;
        msg << "time constant " << tau << " s outside [" << window.hard_min << ", "
            << window.hard_max << "] s";
        throw DomainError(msg.str());
    }
    const bool in_soft = tau >= window.soft_min && tau <= window.soft_max;
    if (!in_soft && warn) {
        std::cerr << "warning: DPI time constant " << tau << " s outside the " << window.soft_min
                  << "-" << window.soft_max << " s band\n";
    }
    return in_soft;
}

double time_constant(const DpiParams& p) {
    check_circuit(p);
    return raw_tau(p);
}

double leak_current_for(const DpiParams& p, double tau) {
    require(tau > 0, "time constant must be positive");
    return p.capacitance * p.thermal_voltage / (p.kappa * tau);
}

DpiState dpi_step_full(const DpiState& s, const DpiParams& p, double input, double dt,
                       double floor) {
    require(dt > 0, "dt must be positive");
    require(input >= 0, "input current must be non-negative");
    const double tau = time_constant(p);
    const double ig = p.gain_current;
    const double drive = ig * input / p.leak_current - ig;

    auto deriv = [&](double i) {
        const double reg = std::max(i, p.dark_current);
        return (drive - i) / (tau * (1.0 + ig / reg));
    };

    const double max_h = tau / 100.0;
    const auto n = static_cast<long>(std::ceil(dt / max_h));
    const double h = dt / static_cast<double>(n);
    double i = s.current;
    for (long k = 0; k < n; ++k) {
        const double k1 = deriv(i);
        const double k2 = deriv(i + 0.5 * h * k1);
        const double k3 = deriv(i + 0.5 * h * k2);
        const double k4 = deriv(i + h * k3);
        i += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        i = std::max(i, floor);
    }
    return {i, s.last_update_time + dt};
}

DpiState dpi_step_linear(const DpiState& s, const DpiParams& p, double input, double dt) {
    require(dt > 0, "dt must be positive");
    const double tau = time_constant(p);
    const double steady = p.gain() * input;
    const double x = dt / tau;
    return {s.current * std::exp(-x) - steady * std::expm1(-x), s.last_update_time + dt};
}

DpiState dpi_inject_spike(const DpiState& s, const DpiParams& p, double weight,
                          double unit_current) {
    require(weight >= 0, "spike weight must be non-negative");
    if (weight == 0) return s;
    return {s.current + weight * p.gain() * unit_current, s.last_update_time};
}

void validate(const NeuronParams& p) {
    validate(p.membrane, TauWindow{}, false);
    require(p.reset_current >= 0, "reset current must be non-negative");
    require(p.threshold > p.reset_current, "threshold must exceed the reset current");
    require(p.refractory_period >= 0, "refractory period must be non-negative");
}

NeuronStep neuron_step(const NeuronState& n, const NeuronParams& p, double input_current,
                       double dt) {
    require(dt > 0, "dt must be positive");
    NeuronState next = n;
    const double t_end = n.membrane.last_update_time + dt;
    if (t_end <= n.refractory_until) {
        next.membrane = {p.reset_current, t_end};
        return {next, false};
    }
    next.membrane = dpi_step_linear(n.membrane, p.membrane, input_current, dt);
    if (next.membrane.current >= p.threshold) {
        next.membrane.current = p.reset_current;
        next.refractory_until = t_end + p.refractory_period;
        next.last_spike_time = t_end;
        return {next, true};
    }
    return {next, false};
}

}  // namespace neuroloop

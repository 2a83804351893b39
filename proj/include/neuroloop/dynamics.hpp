#pragma once

// Behavioral models of the differential pair integrator (DPI) circuit.
//
// A DPI is a first-order log-domain low-pass filter. Its full transfer
// function is the nonlinear ODE
//
//     tau * (1 + Ig / Iout) * dIout/dt + Iout = Ig * Iin / Itau - Ig
//
// which, for Iin >> Itau and Iout >> Ig, reduces to the linear filter
//
//     tau * dIout/dt + Iout = (Ig / Itau) * Iin,
//
// with tau = C * Ut / (kappa * Itau). The same circuit models synapses
// (input = spike pulses) and leaky integrate-and-fire membranes.
//
// All quantities are SI: amperes, farads, volts, seconds.

#include <optional>

namespace neuroloop {

inline constexpr double kDefaultThermalVoltage = 0.025;
inline constexpr double kDefaultKappa = 0.7;
inline constexpr double kDefaultDarkCurrent = 0.5e-12;
inline constexpr double kDefaultUnitCurrent = 10e-12;

struct DpiParams {
    double capacitance = 1e-12;
    double thermal_voltage = kDefaultThermalVoltage;
    double kappa = kDefaultKappa;
    double dark_current = kDefaultDarkCurrent;
    double leak_current = 1e-12;  // Itau
    double gain_current = 1e-12;  // Ig

    // Steady-state gain Ig / Itau of the linear filter.
    double gain() const { return gain_current / leak_current; }
};

// Admissible range of the derived time constant. Values outside the hard
// window are rejected; values outside the soft window only warn.
struct TauWindow {
    double hard_min = 1e-3;
    double hard_max = 1.0;
    double soft_min = 5e-3;
    double soft_max = 0.5;
};

// Throws DomainError on invalid parameters. Returns false (and logs a
// warning to stderr when `warn` is set) if tau lies outside the soft window.
bool validate(const DpiParams& p, const TauWindow& window = {}, bool warn = true);

// tau = C * Ut / (kappa * Itau). Throws DomainError on invalid parameters.
double time_constant(const DpiParams& p);

// Inverse of time_constant: the leak current that yields `tau` for the other
// circuit parameters of `p`.
double leak_current_for(const DpiParams& p, double tau);

struct DpiState {
    double current = 0.0;           // Iout
    double last_update_time = 0.0;  // seconds
};

// Advances the nonlinear ODE by `dt` with classical RK4 sub-steps no longer
// than tau/100. The 1/Iout singularity is regularized by max(Iout, I0).
// Output is clamped at `floor`.
DpiState dpi_step_full(const DpiState& s, const DpiParams& p, double input, double dt,
                       double floor = 0.0);

// Exact exponential update of the linear filter for an input held constant
// over [t, t + dt].
DpiState dpi_step_linear(const DpiState& s, const DpiParams& p, double input, double dt);

// Same as dpi_step_linear with a precomputed decay factor exp(-dt/tau). Used
// in the chip step loop where dt is fixed.
inline double dpi_relax(double current, double steady_state, double decay) {
    return steady_state + (current - steady_state) * decay;
}

// Impulse approximation of a spike: Iout += weight * (Ig/Itau) * unit_current.
DpiState dpi_inject_spike(const DpiState& s, const DpiParams& p, double weight,
                          double unit_current = kDefaultUnitCurrent);

struct NeuronParams {
    DpiParams membrane{};
    double threshold = 20e-12;
    double reset_current = 0.0;
    double refractory_period = 2e-3;
};

void validate(const NeuronParams& p);

struct NeuronState {
    DpiState membrane{};
    double refractory_until = 0.0;
    std::optional<double> last_spike_time;
};

struct NeuronStep {
    NeuronState state;
    bool spiked = false;
};

// Leaky integrate-and-fire update. The membrane is held at the reset value
// while refractory; the threshold is tested at the end of the step.
NeuronStep neuron_step(const NeuronState& n, const NeuronParams& p, double input_current,
                       double dt);

}  // namespace neuroloop

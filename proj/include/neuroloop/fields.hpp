#pragma once

// One-dimensional dynamic neural fields,
//
//     tau * du/dt = -u + h + I(x, t) + sum_x' f(u(x')) w(|x - x'|) dx,
//
// with a difference-of-Gaussians ("Mexican hat") interaction kernel and a
// logistic output nonlinearity, plus the compiler that lays a winner-take-all
// version of the same connectivity out on the chip's static synapses.

#include <iosfwd>
#include <span>
#include <vector>

#include "neuroloop/connectivity.hpp"

namespace neuroloop {

enum class Boundary { zero_padded, periodic };

struct FieldParams {
    double tau = 0.01;
    double resting_level = -5.0;  // h
    int grid_size = 64;
    double dx = 1.0;
    Boundary boundary = Boundary::zero_padded;
    double sigmoid_beta = 4.0;
    bool parallel = false;  // OpenMP lateral-interaction kernel
};

// Throws DomainError unless h < 0, N >= 3, tau > 0, beta > 0, dx > 0.
void validate(const FieldParams& p);

struct KernelParams {
    double a_exc = 0.0;
    double a_inh = 0.0;
    double sigma_exc = 1.0;
    double sigma_inh = 2.0;
};

// Returns false (and warns on stderr when asked) if the kernel is not
// Mexican-hat shaped (sigma_inh > sigma_exc > 0); throws on negative
// amplitudes or non-positive widths.
bool validate(const KernelParams& k, bool warn = true);

struct FieldState {
    std::vector<double> u;
    double t = 0.0;

    static FieldState at_rest(const FieldParams& p);
};

double mexican_hat(const KernelParams& k, double distance);
double sigmoid(double u, double beta);

// Kernel sampled at distances 0, dx, ..., (N-1)dx.
std::vector<double> sample_kernel(const KernelParams& k, int n, double dx);

// One explicit Euler step. Throws StabilityError if dt > tau/10 or the state
// stops being finite.
FieldState field_step(const FieldState& s, const FieldParams& p, const KernelParams& k,
                      std::span<const double> input, double dt);

// Same step with a kernel already sampled by sample_kernel.
FieldState field_step(const FieldState& s, const FieldParams& p, std::span<const double> kernel,
                      std::span<const double> input, double dt);

struct Peak {
    double position = 0.0;  // grid index, activation-weighted centroid
    double value = 0.0;     // maximum activation in the region

    friend bool operator==(const Peak&, const Peak&) = default;
};

// Contiguous regions with u > threshold, ordered by position.
std::vector<Peak> detect_peaks(const FieldState& s, double threshold);

// Trajectory export: header `t,u_0,...,u_{N-1}` then one row per state.
void write_field_csv_header(std::ostream& out, int n);
void write_field_csv_row(std::ostream& out, const FieldState& s);

// Spiking winner-take-all population: an excitatory pool representing the
// feature dimension and a smaller inhibitory pool implementing the
// surround inhibition of the kernel.
struct WtaSpec {
    int n_exc = 64;
    int n_inh = 16;
    KernelParams kernel{3.0, 0.0, 1.5, 8.0};
    int self_exc = 3;
    int exc_to_inh = 1;
    int inh_to_exc = -2;
    // Exc->exc connections with |i - j| beyond this many sigmas are dropped.
    double kernel_cutoff = 4.0;
};

// Neuron placement of one WTA on the chip.
struct WtaLayout {
    int exc_begin = 0;
    int inh_begin = 64;
};

// Round to the nearest static level, ties away from zero, saturating at the
// level range.
int quantize_level(double weight);

// Builds the WTA's static synapses and recurrent routes. Lateral excitation
// follows the positive Gaussian of the kernel over index distance, with the
// self connection at `self_exc`; a zero a_exc disables all of it. Throws
// CapacityError if the populations or their fan-in exceed the array.
ConnectivityMatrix compile_wta(const WtaSpec& spec, const WtaLayout& layout, const ArrayShape& shape);

}  // namespace neuroloop

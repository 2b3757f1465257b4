#pragma once

// The memory-kernel density engine. Given a wavefunction history it
// accumulates K(x,t) = int_tau^t dt' / |psi(x,t')|^2 and produces the
// non-equilibrium density in two forms:
//
//   linear:      rho = |psi|^2 (1 + c K)
//   exponential: rho = |psi|^2 exp(c int_tau^t dt' / rho(t'))   (self-consistent)
//
// The linear form is the workhorse; the exponential form is solved by
// fixed-point iteration and agrees with the linear one to second order in c
// (exactly, for stationary histories). Near nodes the kernel integrand is
// clamped at 1/node_floor and the point is flagged in the regularized mask.

#include <functional>
#include <optional>
#include <vector>

#include "qhydro/types.hpp"

namespace qhydro {

struct MemoryState {
    double c = 0.0;
    double tau = 0.0;
    Grid1D grid;
    double t0 = 0.0;   // == tau
    double dt = 0.0;
    std::vector<std::vector<double>> kernel;             // [time][x], kernel[0] == 0
    std::vector<std::vector<std::uint8_t>> regularized;  // [time][x]

    int n_times() const { return static_cast<int>(kernel.size()); }
    double time(int it) const { return t0 + dt * static_cast<double>(it); }
};

struct NoneqDensity {
    enum class Source { linear, exponential };
    Source source = Source::linear;
    ScalarSeries values;
    // True where the kernel was regularized or (exponential form only) where
    // the fixed point is non-contractive and the linear value was carried.
    std::vector<std::vector<std::uint8_t>> mask;
    std::optional<double> negativity_time;  // earliest t with min_x rho < 0
};

// c = drho/dt|_0 + rho_eq(0) div v(0), evaluated at one spatial point.
// rho0 participates only in the finiteness validation.
double compute_c(double rho0, double drho0_dt, double rho_eq0, double div_v0);

// Cumulative trapezoid of 1/max(|psi|^2, node_floor) over the stored slices of
// [tau, t]. tau and t must land on stored sample times (1e-9 relative).
MemoryState memory_kernel(const ComplexSeries& history, double tau, double t,
                          double node_floor = kDefaultNodeFloor);

// Linear-form density over every stored slice of [tau, end of history].
NoneqDensity noneq_density(const ComplexSeries& history, double c, double tau,
                           double node_floor = kDefaultNodeFloor);

// Exponential (self-consistent) form by fixed-point iteration seeded with
// |psi|^2. Contraction is checked per grid point via |c| K; points at or past
// the contraction bound carry the linear value and are masked.
NoneqDensity noneq_density_exp(const ComplexSeries& history, double c, double tau,
                               double node_floor = kDefaultNodeFloor, int max_iter = 200,
                               double fp_tol = 1e-13);

struct PositivityReport {
    bool negative_found = false;
    double t = 0.0;
    double x = 0.0;
    double min_value = 0.0;  // most negative value found, or global min if none
};

// Earliest (t, x) with rho < 0 over unmasked points, or a certificate
// (negative_found == false) that min rho >= 0 on the computed window.
PositivityReport positivity_scan(const NoneqDensity& density);

// Trapezoid kernel for a pointwise sampled history: n_samples uniform samples
// of psi_of_t over [tau, t]. Shares the clamping rule with memory_kernel.
double point_kernel(const std::function<complex(double)>& psi_of_t, double tau, double t,
                    int n_samples, double node_floor = kDefaultNodeFloor,
                    bool* regularized = nullptr);

}  // namespace qhydro

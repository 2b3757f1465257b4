#pragma once

// Madelung decomposition of sampled wavefunctions and residual checks of the
// hydrodynamic identities: continuity, Hamilton-Jacobi, the equation of
// motion, the along-trajectory exponential solution, and the second-order
// density equation.
//
// All derivatives are Eulerian second-order stencils (see stencils.hpp);
// convective derivatives are assembled as d/dt + v d/dx on the sampled tables,
// never by re-sampling trajectories.

#include <functional>
#include <span>
#include <vector>

#include "qhydro/types.hpp"

namespace qhydro {

// Polar decomposition of one sampled slice. The phase is unwrapped left to
// right starting from the leftmost non-node point and pinned to (-pi, pi]
// there (times hbar); node points carry phase/velocity from the nearest valid
// neighbor and are flagged in node_mask.
HydroSlice madelung_decompose(const ComplexField& psi, const PhysicalParams& params,
                              double node_floor = kDefaultNodeFloor);

// sqrt(rho) e^{i S / hbar} on the slice's grid; inverse of madelung_decompose
// away from nodes.
std::vector<complex> reconstruct_wavefunction(const HydroSlice& slice,
                                              const PhysicalParams& params);

// Q = -(hbar^2 / 2m) (d2/dx2 sqrt(rho)) / sqrt(rho). Points with
// rho < node_floor are masked and carry the nearest valid value.
MaskedField quantum_potential(const Grid1D& grid, std::span<const double> rho,
                              const PhysicalParams& params,
                              double node_floor = kDefaultNodeFloor);

// Bracketed cross-check form: Q = -(hbar^2 / 4m) [ rho''/rho - (ln rho)'^2 / 2 ].
MaskedField quantum_potential_alt(const Grid1D& grid, std::span<const double> rho,
                                  const PhysicalParams& params,
                                  double node_floor = kDefaultNodeFloor);

// ---------------------------------------------------------------------------
// Residual fields. Each returns the full residual table plus its max-abs.
// ---------------------------------------------------------------------------

struct ResidualField {
    ScalarSeries field;
    double max_abs = 0.0;
};

// r = d rho/dt + v d rho/dx + rho dv/dx  (convective continuity form)
ResidualField continuity_residual(const ScalarSeries& rho, const ScalarSeries& v);

// r = dS/dt + (dS/dx)^2 / 2m + V + Q
ResidualField hamilton_jacobi_residual(const ScalarSeries& S, const ScalarSeries& v,
                                       const ScalarSeries& Q, std::span<const double> V,
                                       const PhysicalParams& params);

// vdot = -d(Q+V)/dx / m, one slice.
std::vector<double> acceleration_field(const Grid1D& grid, std::span<const double> Q,
                                       std::span<const double> V, const PhysicalParams& params);

// r = rho:ddot + rho:dot (dv/dx) + rho (dvdot/dx), dots convective.
ResidualField second_order_residual(const ScalarSeries& rho, const ScalarSeries& v,
                                    const ScalarSeries& vdot);

// Max |field| over the series excluding `t_margin` slices at each end and
// `x_margin` points at each edge; `include` (optional) restricts further.
double max_abs_interior(const ScalarSeries& s, int t_margin, int x_margin,
                        const std::function<bool(int, int)>& include = {});

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

// RK4 on xdot = v(x, t) with bilinear interpolation of the sampled velocity
// table; starts at the table's t0. Leaves positions truncated (flagged) if the
// point exits the grid.
Trajectory integrate_trajectory(double x0, const ScalarSeries& v, double dt, int n_steps);

struct ExpSolutionCheck {
    double max_discrepancy = 0.0;
    bool node_flagged = false;   // comparison masked at flagged samples
};

// max_t | rho(x(t), t) - rho(x(0), t0) exp(-int div v along the path) |
ExpSolutionCheck exponential_solution_check(const ScalarSeries& rho, const ScalarSeries& v,
                                            const Trajectory& traj,
                                            double node_floor = kDefaultNodeFloor);

// ---------------------------------------------------------------------------
// Series-level decomposition
// ---------------------------------------------------------------------------

struct HydroSeries {
    ScalarSeries rho;
    ScalarSeries S;
    ScalarSeries v;
    ScalarSeries div_v;
    ScalarSeries Q;
    std::vector<std::vector<std::uint8_t>> node_mask;  // [time][x]
};

// Decomposes every slice and aligns the phase across slices (the per-slice
// (-pi, pi] pin is lifted by multiples of 2 pi hbar so S is continuous in t).
HydroSeries decompose_series(const ComplexSeries& psi, const PhysicalParams& params,
                             double node_floor = kDefaultNodeFloor);

// vdot slices from the decomposed Q and an external potential.
ScalarSeries acceleration_series(const HydroSeries& h, std::span<const double> V,
                                 const PhysicalParams& params);

}  // namespace qhydro

#include "qhydro/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qhydro/stencils.hpp"

namespace qhydro {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Nearest unmasked index for every masked index (ties go left).
void carry_from_nearest(std::vector<double>& f, const std::vector<std::uint8_t>& mask) {
    const int n = static_cast<int>(f.size());
    std::vector<int> left(static_cast<size_t>(n), -1), right(static_cast<size_t>(n), -1);
    int last = -1;
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<size_t>(i)]) last = i;
        left[static_cast<size_t>(i)] = last;
    }
    last = -1;
    for (int i = n - 1; i >= 0; --i) {
        if (!mask[static_cast<size_t>(i)]) last = i;
        right[static_cast<size_t>(i)] = last;
    }
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<size_t>(i)]) continue;
        const int l = left[static_cast<size_t>(i)];
        const int r = right[static_cast<size_t>(i)];
        int pick;
        if (l < 0) pick = r;
        else if (r < 0) pick = l;
        else pick = (i - l <= r - i) ? l : r;
        f[static_cast<size_t>(i)] = f[static_cast<size_t>(pick)];
    }
}

}  // namespace

HydroSlice madelung_decompose(const ComplexField& psi, const PhysicalParams& params,
                              double node_floor) {
    psi.validate();
    params.validate();
    if (!(node_floor > 0.0)) throw validation_error("node_floor: must be > 0");

    const int n = psi.grid.n_points;
    HydroSlice out;
    out.grid = psi.grid;
    out.time = psi.time;
    out.rho_eq.resize(static_cast<size_t>(n));
    out.node_mask.resize(static_cast<size_t>(n));

    int first_valid = -1;
    for (int i = 0; i < n; ++i) {
        const double rho = std::norm(psi.values[static_cast<size_t>(i)]);
        if (!std::isfinite(rho)) throw validation_error("madelung_decompose: non-finite amplitude");
        out.rho_eq[static_cast<size_t>(i)] = rho;
        out.node_mask[static_cast<size_t>(i)] = rho < node_floor ? 1 : 0;
        if (!out.node_mask[static_cast<size_t>(i)] && first_valid < 0) first_valid = i;
    }
    if (first_valid < 0)
        throw validation_error("madelung_decompose: empty field (all points below node_floor)");

    // Unwrapped phase, walked rightward from the leftmost non-node point and
    // pinned to the principal value there. Node points are filled afterwards.
    out.S.assign(static_cast<size_t>(n), 0.0);
    double prev = std::arg(psi.values[static_cast<size_t>(first_valid)]);
    out.S[static_cast<size_t>(first_valid)] = prev;
    for (int i = first_valid + 1; i < n; ++i) {
        if (out.node_mask[static_cast<size_t>(i)]) continue;
        const double raw = std::arg(psi.values[static_cast<size_t>(i)]);
        double delta = raw - std::remainder(prev, kTwoPi);
        delta = std::remainder(delta, kTwoPi);
        prev += delta;
        out.S[static_cast<size_t>(i)] = prev;
    }
    carry_from_nearest(out.S, out.node_mask);
    for (auto& s : out.S) s *= params.hbar;

    const double h = psi.grid.spacing();
    out.v = ddx(out.S, h);
    for (auto& vi : out.v) vi /= params.mass;
    carry_from_nearest(out.v, out.node_mask);
    out.div_v = ddx(out.v, h);

    MaskedField q = quantum_potential(psi.grid, out.rho_eq, params, node_floor);
    out.Q = std::move(q.values);
    return out;
}

std::vector<complex> reconstruct_wavefunction(const HydroSlice& slice,
                                              const PhysicalParams& params) {
    std::vector<complex> psi(slice.rho_eq.size());
    for (size_t i = 0; i < psi.size(); ++i) {
        const double amp = std::sqrt(std::max(slice.rho_eq[i], 0.0));
        const double phase = slice.S[i] / params.hbar;
        psi[i] = amp * complex{std::cos(phase), std::sin(phase)};
    }
    return psi;
}

namespace {

MaskedField qpotential_impl(const Grid1D& grid, std::span<const double> rho,
                            const PhysicalParams& params, double node_floor, bool bracketed) {
    grid.validate();
    params.validate();
    if (rho.size() != static_cast<size_t>(grid.n_points))
        throw shape_error("quantum_potential: density size does not match grid");
    if (grid.n_points < 4) throw validation_error("quantum_potential: need at least 4 points");
    for (double r : rho)
        if (r < 0.0 || !std::isfinite(r))
            throw std::domain_error("quantum_potential: density must be finite and >= 0");

    const int n = grid.n_points;
    const double h = grid.spacing();
    MaskedField out;
    out.values.resize(static_cast<size_t>(n));
    out.mask.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        out.mask[static_cast<size_t>(i)] = rho[static_cast<size_t>(i)] < node_floor ? 1 : 0;

    if (!bracketed) {
        std::vector<double> root(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) root[static_cast<size_t>(i)] = std::sqrt(rho[static_cast<size_t>(i)]);
        const std::vector<double> d2 = d2dx2(root, h);
        const double coeff = -params.hbar * params.hbar / (2.0 * params.mass);
        for (int i = 0; i < n; ++i) {
            const size_t s = static_cast<size_t>(i);
            out.values[s] = coeff * d2[s] / std::max(root[s], std::sqrt(node_floor));
        }
    } else {
        std::vector<double> lnr(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            lnr[static_cast<size_t>(i)] = std::log(std::max(rho[static_cast<size_t>(i)], node_floor));
        const std::vector<double> d2 = d2dx2(std::vector<double>(rho.begin(), rho.end()), h);
        const std::vector<double> dln = ddx(lnr, h);
        const double coeff = -params.hbar * params.hbar / (4.0 * params.mass);
        for (int i = 0; i < n; ++i) {
            const size_t s = static_cast<size_t>(i);
            out.values[s] = coeff * (d2[s] / std::max(rho[s], node_floor) - 0.5 * dln[s] * dln[s]);
        }
    }
    carry_from_nearest(out.values, out.mask);
    return out;
}

}  // namespace

MaskedField quantum_potential(const Grid1D& grid, std::span<const double> rho,
                              const PhysicalParams& params, double node_floor) {
    return qpotential_impl(grid, rho, params, node_floor, false);
}

MaskedField quantum_potential_alt(const Grid1D& grid, std::span<const double> rho,
                                  const PhysicalParams& params, double node_floor) {
    return qpotential_impl(grid, rho, params, node_floor, true);
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

ResidualField continuity_residual(const ScalarSeries& rho, const ScalarSeries& v) {
    rho.validate();
    v.validate();
    require_aligned(rho, v, "continuity_residual(rho, v)");
    if (rho.n_times() < 3) throw shape_error("continuity_residual: need at least 3 time slices");

    const int nt = rho.n_times();
    const int nx = rho.grid.n_points;
    const double h = rho.grid.spacing();

    ResidualField out;
    out.field.grid = rho.grid;
    out.field.t0 = rho.t0;
    out.field.dt = rho.dt;
    out.field.values.assign(static_cast<size_t>(nt), std::vector<double>(static_cast<size_t>(nx)));

    for (int it = 0; it < nt; ++it) {
        const auto& rrow = rho.values[static_cast<size_t>(it)];
        const auto& vrow = v.values[static_cast<size_t>(it)];
        const std::vector<double> drdx = ddx(rrow, h);
        const std::vector<double> dvdx = ddx(vrow, h);
        auto& rowout = out.field.values[static_cast<size_t>(it)];
        for (int ix = 0; ix < nx; ++ix) {
            const size_t s = static_cast<size_t>(ix);
            const double r = ddt_at(rho.values, it, ix, rho.dt) + vrow[s] * drdx[s] +
                             rrow[s] * dvdx[s];
            rowout[s] = r;
            out.max_abs = std::max(out.max_abs, std::abs(r));
        }
    }
    return out;
}

ResidualField hamilton_jacobi_residual(const ScalarSeries& S, const ScalarSeries& v,
                                       const ScalarSeries& Q, std::span<const double> V,
                                       const PhysicalParams& params) {
    S.validate();
    v.validate();
    Q.validate();
    require_aligned(S, v, "hamilton_jacobi_residual(S, v)");
    require_aligned(S, Q, "hamilton_jacobi_residual(S, Q)");
    if (V.size() != static_cast<size_t>(S.grid.n_points))
        throw shape_error("hamilton_jacobi_residual: potential size does not match grid");
    if (S.n_times() < 3)
        throw shape_error("hamilton_jacobi_residual: need at least 3 time slices");

    const int nt = S.n_times();
    const int nx = S.grid.n_points;

    ResidualField out;
    out.field.grid = S.grid;
    out.field.t0 = S.t0;
    out.field.dt = S.dt;
    out.field.values.assign(static_cast<size_t>(nt), std::vector<double>(static_cast<size_t>(nx)));

    for (int it = 0; it < nt; ++it) {
        const auto& vrow = v.values[static_cast<size_t>(it)];
        const auto& qrow = Q.values[static_cast<size_t>(it)];
        auto& rowout = out.field.values[static_cast<size_t>(it)];
        for (int ix = 0; ix < nx; ++ix) {
            const size_t s = static_cast<size_t>(ix);
            // (dS/dx)^2 / 2m written through v = (dS/dx)/m.
            const double kinetic = 0.5 * params.mass * vrow[s] * vrow[s];
            const double r = ddt_at(S.values, it, ix, S.dt) + kinetic + V[s] + qrow[s];
            rowout[s] = r;
            out.max_abs = std::max(out.max_abs, std::abs(r));
        }
    }
    return out;
}

std::vector<double> acceleration_field(const Grid1D& grid, std::span<const double> Q,
                                       std::span<const double> V, const PhysicalParams& params) {
    grid.validate();
    if (Q.size() != static_cast<size_t>(grid.n_points) ||
        V.size() != static_cast<size_t>(grid.n_points))
        throw shape_error("acceleration_field: field sizes do not match grid");
    std::vector<double> total(Q.size());
    for (size_t i = 0; i < Q.size(); ++i) total[i] = Q[i] + V[i];
    std::vector<double> grad = ddx(total, grid.spacing());
    for (auto& g : grad) g = -g / params.mass;
    return grad;
}

ResidualField second_order_residual(const ScalarSeries& rho, const ScalarSeries& v,
                                    const ScalarSeries& vdot) {
    rho.validate();
    v.validate();
    vdot.validate();
    require_aligned(rho, v, "second_order_residual(rho, v)");
    require_aligned(rho, vdot, "second_order_residual(rho, vdot)");
    if (rho.n_times() < 5)
        throw shape_error("second_order_residual: need at least 5 time slices");

    const int nt = rho.n_times();
    const int nx = rho.grid.n_points;
    const double h = rho.grid.spacing();

    // First convective derivative of rho on the full table.
    std::vector<std::vector<double>> rho_dot(static_cast<size_t>(nt),
                                             std::vector<double>(static_cast<size_t>(nx)));
    for (int it = 0; it < nt; ++it) {
        const std::vector<double> drdx = ddx(rho.values[static_cast<size_t>(it)], h);
        const auto& vrow = v.values[static_cast<size_t>(it)];
        for (int ix = 0; ix < nx; ++ix) {
            const size_t s = static_cast<size_t>(ix);
            rho_dot[static_cast<size_t>(it)][s] =
                ddt_at(rho.values, it, ix, rho.dt) + vrow[s] * drdx[s];
        }
    }

    ResidualField out;
    out.field.grid = rho.grid;
    out.field.t0 = rho.t0;
    out.field.dt = rho.dt;
    out.field.values.assign(static_cast<size_t>(nt), std::vector<double>(static_cast<size_t>(nx)));

    for (int it = 0; it < nt; ++it) {
        const size_t st = static_cast<size_t>(it);
        const std::vector<double> drdotdx = ddx(rho_dot[st], h);
        const std::vector<double> dvdx = ddx(v.values[st], h);
        const std::vector<double> dvdotdx = ddx(vdot.values[st], h);
        const auto& vrow = v.values[st];
        const auto& rrow = rho.values[st];
        auto& rowout = out.field.values[st];
        for (int ix = 0; ix < nx; ++ix) {
            const size_t s = static_cast<size_t>(ix);
            const double rho_ddot = ddt_at(rho_dot, it, ix, rho.dt) + vrow[s] * drdotdx[s];
            const double r = rho_ddot + rho_dot[st][s] * dvdx[s] + rrow[s] * dvdotdx[s];
            rowout[s] = r;
            out.max_abs = std::max(out.max_abs, std::abs(r));
        }
    }
    return out;
}

double max_abs_interior(const ScalarSeries& s, int t_margin, int x_margin,
                        const std::function<bool(int, int)>& include) {
    double best = 0.0;
    for (int it = t_margin; it < s.n_times() - t_margin; ++it)
        for (int ix = x_margin; ix < s.grid.n_points - x_margin; ++ix) {
            if (include && !include(it, ix)) continue;
            best = std::max(best, std::abs(s.at(it, ix)));
        }
    return best;
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

namespace {

double bilinear(const ScalarSeries& f, double x, double t) {
    const Grid1D& grid = f.grid;
    const double ft = std::clamp((t - f.t0) / f.dt, 0.0, static_cast<double>(f.n_times() - 1));
    const int it = std::min(static_cast<int>(ft), f.n_times() - 2);
    const double wt = ft - static_cast<double>(it);
    const double fx =
        std::clamp((x - grid.x_min) / grid.spacing(), 0.0, static_cast<double>(grid.n_points - 1));
    const int ix = std::min(static_cast<int>(fx), grid.n_points - 2);
    const double wx = fx - static_cast<double>(ix);
    const double lo = f.at(it, ix) * (1.0 - wx) + f.at(it, ix + 1) * wx;
    const double hi = f.at(it + 1, ix) * (1.0 - wx) + f.at(it + 1, ix + 1) * wx;
    return lo * (1.0 - wt) + hi * wt;
}

}  // namespace

Trajectory integrate_trajectory(double x0, const ScalarSeries& v, double dt, int n_steps) {
    v.validate();
    if (v.n_times() < 2) throw shape_error("integrate_trajectory: need at least 2 time slices");
    if (!v.grid.contains(x0)) throw validation_error("integrate_trajectory: x0 outside grid");
    if (!(dt > 0.0)) throw validation_error("integrate_trajectory: dt must be > 0");

    Trajectory traj;
    traj.x0 = x0;
    traj.times.reserve(static_cast<size_t>(n_steps + 1));
    traj.positions.reserve(static_cast<size_t>(n_steps + 1));

    double x = x0;
    double t = v.t0;
    traj.times.push_back(t);
    traj.positions.push_back(x);
    for (int step = 0; step < n_steps; ++step) {
        const double k1 = bilinear(v, x, t);
        const double k2 = bilinear(v, x + 0.5 * dt * k1, t + 0.5 * dt);
        const double k3 = bilinear(v, x + 0.5 * dt * k2, t + 0.5 * dt);
        const double k4 = bilinear(v, x + dt * k3, t + dt);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
        if (!v.grid.contains(x)) {
            traj.truncated = true;
            break;
        }
        traj.times.push_back(t);
        traj.positions.push_back(x);
    }
    return traj;
}

ExpSolutionCheck exponential_solution_check(const ScalarSeries& rho, const ScalarSeries& v,
                                            const Trajectory& traj, double node_floor) {
    rho.validate();
    v.validate();
    require_aligned(rho, v, "exponential_solution_check(rho, v)");
    if (traj.times.size() < 2)
        throw shape_error("exponential_solution_check: trajectory too short");
    const double t_end = rho.time(rho.n_times() - 1);
    if (traj.times.front() < rho.t0 - 1e-12 || traj.times.back() > t_end + 1e-12)
        throw coverage_error("exponential_solution_check: trajectory outside series time range");

    // div v along the path, by differencing the interpolated velocity.
    const double h = rho.grid.spacing();
    auto div_v_at = [&](double x, double t) {
        const double xl = std::max(x - h, v.grid.x_min);
        const double xr = std::min(x + h, v.grid.x_max);
        return (bilinear(v, xr, t) - bilinear(v, xl, t)) / (xr - xl);
    };

    ExpSolutionCheck out;
    const double rho0 = bilinear(rho, traj.positions.front(), traj.times.front());
    double integral = 0.0;
    double prev_div = div_v_at(traj.positions.front(), traj.times.front());
    for (size_t k = 0; k < traj.times.size(); ++k) {
        if (k > 0) {
            const double cur_div = div_v_at(traj.positions[k], traj.times[k]);
            integral += 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev_div + cur_div);
            prev_div = cur_div;
        }
        const double rho_here = bilinear(rho, traj.positions[k], traj.times[k]);
        if (rho_here < node_floor || rho0 < node_floor) {
            out.node_flagged = true;  // comparison masked at nodes
            continue;
        }
        const double predicted = rho0 * std::exp(-integral);
        out.max_discrepancy = std::max(out.max_discrepancy, std::abs(rho_here - predicted));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Series-level decomposition
// ---------------------------------------------------------------------------

HydroSeries decompose_series(const ComplexSeries& psi, const PhysicalParams& params,
                             double node_floor) {
    psi.validate();
    const int nt = psi.n_times();
    const int nx = psi.grid.n_points;

    HydroSeries out;
    for (ScalarSeries* s : {&out.rho, &out.S, &out.v, &out.div_v, &out.Q}) {
        s->grid = psi.grid;
        s->t0 = psi.t0;
        s->dt = psi.dt;
        s->values.assign(static_cast<size_t>(nt), std::vector<double>(static_cast<size_t>(nx)));
    }
    out.node_mask.assign(static_cast<size_t>(nt),
                         std::vector<std::uint8_t>(static_cast<size_t>(nx)));

    std::vector<double> prev_S;
    std::vector<std::uint8_t> prev_mask;
    for (int it = 0; it < nt; ++it) {
        HydroSlice slice = madelung_decompose(psi.slice(it), params, node_floor);
        // Lift the per-slice phase pin so S is continuous in time: match the
        // previous slice at the first point valid in both (assumes the phase
        // moves by less than pi hbar per step there).
        if (it > 0) {
            int ix = 0;
            while (ix < nx && (slice.node_mask[static_cast<size_t>(ix)] ||
                               prev_mask[static_cast<size_t>(ix)]))
                ++ix;
            if (ix < nx) {
                const double here = slice.S[static_cast<size_t>(ix)];
                const double target = prev_S[static_cast<size_t>(ix)];
                const double lift =
                    kTwoPi * params.hbar * std::round((target - here) / (kTwoPi * params.hbar));
                if (lift != 0.0)
                    for (auto& sv : slice.S) sv += lift;
            }
        }
        prev_S = slice.S;
        prev_mask = slice.node_mask;
        const size_t st = static_cast<size_t>(it);
        out.rho.values[st] = std::move(slice.rho_eq);
        out.S.values[st] = std::move(slice.S);
        out.v.values[st] = std::move(slice.v);
        out.div_v.values[st] = std::move(slice.div_v);
        out.Q.values[st] = std::move(slice.Q);
        out.node_mask[st] = std::move(slice.node_mask);
    }
    return out;
}

ScalarSeries acceleration_series(const HydroSeries& h, std::span<const double> V,
                                 const PhysicalParams& params) {
    ScalarSeries out;
    out.grid = h.Q.grid;
    out.t0 = h.Q.t0;
    out.dt = h.Q.dt;
    out.values.reserve(h.Q.values.size());
    for (const auto& qrow : h.Q.values)
        out.values.push_back(acceleration_field(h.Q.grid, qrow, V, params));
    return out;
}

}  // namespace qhydro

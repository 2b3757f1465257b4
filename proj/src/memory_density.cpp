#include "qhydro/memory_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace qhydro {

namespace {

// Contraction bound for the exponential fixed point: iterate only where
// |c| K stays below this.
constexpr double kContractionBound = 0.9;

int locate_slice(const ComplexSeries& h, double t, const char* what) {
    const double f = (t - h.t0) / h.dt;
    const int idx = static_cast<int>(std::lround(f));
    const double eps = 1e-9 * std::max(1.0, std::abs(t));
    if (idx < 0 || idx >= h.n_times() || std::abs(h.time(idx) - t) > eps)
        throw coverage_error(std::string(what) +
                             ": requested time not covered by the stored history");
    return idx;
}

}  // namespace

double compute_c(double rho0, double drho0_dt, double rho_eq0, double div_v0) {
    if (!std::isfinite(rho0) || !std::isfinite(drho0_dt) || !std::isfinite(rho_eq0) ||
        !std::isfinite(div_v0))
        throw validation_error("compute_c: non-finite initial data");
    return drho0_dt + rho_eq0 * div_v0;
}

MemoryState memory_kernel(const ComplexSeries& history, double tau, double t, double node_floor) {
    history.validate();
    if (!(node_floor > 0.0)) throw validation_error("node_floor: must be > 0");
    if (tau > t) throw validation_error("memory_kernel: tau must be <= t");
    const int i0 = locate_slice(history, tau, "memory_kernel");
    const int i1 = locate_slice(history, t, "memory_kernel");

    const int nx = history.grid.n_points;
    const int nt = i1 - i0 + 1;

    MemoryState state;
    state.tau = tau;
    state.grid = history.grid;
    state.t0 = history.time(i0);
    state.dt = history.dt;
    state.kernel.assign(static_cast<size_t>(nt), std::vector<double>(static_cast<size_t>(nx), 0.0));
    state.regularized.assign(static_cast<size_t>(nt),
                             std::vector<std::uint8_t>(static_cast<size_t>(nx), 0));

    std::vector<double> prev(static_cast<size_t>(nx));
    for (int ix = 0; ix < nx; ++ix) {
        const double rho = std::norm(history.values[static_cast<size_t>(i0)][static_cast<size_t>(ix)]);
        if (rho < node_floor) state.regularized[0][static_cast<size_t>(ix)] = 1;
        prev[static_cast<size_t>(ix)] = 1.0 / std::max(rho, node_floor);
    }
    for (int k = 1; k < nt; ++k) {
        const auto& slice = history.values[static_cast<size_t>(i0 + k)];
        auto& krow = state.kernel[static_cast<size_t>(k)];
        const auto& kprev = state.kernel[static_cast<size_t>(k - 1)];
        auto& reg = state.regularized[static_cast<size_t>(k)];
        const auto& reg_prev = state.regularized[static_cast<size_t>(k - 1)];
        for (int ix = 0; ix < nx; ++ix) {
            const size_t s = static_cast<size_t>(ix);
            const double rho = std::norm(slice[s]);
            const bool clamped = rho < node_floor;
            const double cur = 1.0 / std::max(rho, node_floor);
            krow[s] = kprev[s] + 0.5 * history.dt * (prev[s] + cur);
            reg[s] = static_cast<std::uint8_t>(reg_prev[s] | (clamped ? 1 : 0));
            prev[s] = cur;
        }
    }
    return state;
}

namespace {

NoneqDensity assemble_density(const ComplexSeries& history, int i0,
                              const std::vector<std::vector<double>>& rho,
                              std::vector<std::vector<std::uint8_t>> mask,
                              NoneqDensity::Source source) {
    NoneqDensity out;
    out.source = source;
    out.values.grid = history.grid;
    out.values.t0 = history.time(i0);
    out.values.dt = history.dt;
    out.values.values = rho;
    out.mask = std::move(mask);
    for (int it = 0; it < static_cast<int>(rho.size()); ++it) {
        for (double r : rho[static_cast<size_t>(it)]) {
            if (r < 0.0) {
                out.negativity_time = out.values.time(it);
                break;
            }
        }
        if (out.negativity_time) break;
    }
    return out;
}

}  // namespace

NoneqDensity noneq_density(const ComplexSeries& history, double c, double tau,
                           double node_floor) {
    const double t_end = history.time(history.n_times() - 1);
    MemoryState state = memory_kernel(history, tau, t_end, node_floor);
    state.c = c;
    const int i0 = locate_slice(history, tau, "noneq_density");

    const int nt = state.n_times();
    const int nx = history.grid.n_points;
    std::vector<std::vector<double>> rho(static_cast<size_t>(nt),
                                         std::vector<double>(static_cast<size_t>(nx)));
    for (int it = 0; it < nt; ++it) {
        const auto& slice = history.values[static_cast<size_t>(i0 + it)];
        const auto& krow = state.kernel[static_cast<size_t>(it)];
        auto& rrow = rho[static_cast<size_t>(it)];
        for (int ix = 0; ix < nx; ++ix) {
            const size_t s = static_cast<size_t>(ix);
            rrow[s] = std::norm(slice[s]) * (1.0 + c * krow[s]);
        }
    }
    return assemble_density(history, i0, rho, std::move(state.regularized),
                            NoneqDensity::Source::linear);
}

NoneqDensity noneq_density_exp(const ComplexSeries& history, double c, double tau,
                               double node_floor, int max_iter, double fp_tol) {
    const double t_end = history.time(history.n_times() - 1);
    MemoryState seed = memory_kernel(history, tau, t_end, node_floor);
    seed.c = c;
    const int i0 = locate_slice(history, tau, "noneq_density_exp");
    const int nt = seed.n_times();
    const int nx = history.grid.n_points;

    // Equilibrium density table and the contraction test per grid point.
    std::vector<std::vector<double>> rho_eq(static_cast<size_t>(nt),
                                            std::vector<double>(static_cast<size_t>(nx)));
    for (int it = 0; it < nt; ++it)
        for (int ix = 0; ix < nx; ++ix)
            rho_eq[static_cast<size_t>(it)][static_cast<size_t>(ix)] =
                std::norm(history.values[static_cast<size_t>(i0 + it)][static_cast<size_t>(ix)]);

    std::vector<std::uint8_t> contractive(static_cast<size_t>(nx), 1);
    auto mask = seed.regularized;
    for (int ix = 0; ix < nx; ++ix) {
        const size_t s = static_cast<size_t>(ix);
        bool ok = true;
        for (int it = 0; it < nt; ++it) {
            if (std::abs(c) * seed.kernel[static_cast<size_t>(it)][s] >= kContractionBound ||
                seed.regularized[static_cast<size_t>(it)][s]) {
                ok = false;
                break;
            }
        }
        contractive[s] = ok ? 1 : 0;
        if (!ok)
            for (int it = 0; it < nt; ++it) mask[static_cast<size_t>(it)][s] = 1;
    }

    // Non-contractive columns carry the linear value.
    std::vector<std::vector<double>> rho(static_cast<size_t>(nt),
                                         std::vector<double>(static_cast<size_t>(nx)));
    for (int it = 0; it < nt; ++it)
        for (int ix = 0; ix < nx; ++ix) {
            const size_t s = static_cast<size_t>(ix);
            rho[static_cast<size_t>(it)][s] =
                rho_eq[static_cast<size_t>(it)][s] *
                (1.0 + c * seed.kernel[static_cast<size_t>(it)][s]);
        }

    if (c != 0.0) {
        // Fixed point on the contractive columns. The reciprocal-density
        // integral uses the logarithmic-mean rule per interval, which is exact
        // when rho is linear in t (so stationary histories solve in closed
        // form); it is second-order accurate otherwise.
        std::vector<double> work(static_cast<size_t>(nt));
        double last_residual = 0.0;
        double prev_residual = std::numeric_limits<double>::infinity();
        int grew = 0;
        for (int iter = 0; iter < max_iter; ++iter) {
            double residual = 0.0;
            for (int ix = 0; ix < nx; ++ix) {
                const size_t s = static_cast<size_t>(ix);
                if (!contractive[s]) continue;
                double integral = 0.0;
                work[0] = rho_eq[0][s];  // rho(tau) = rho_eq(tau): empty kernel
                for (int it = 1; it < nt; ++it) {
                    const double lo = std::max(rho[static_cast<size_t>(it - 1)][s], node_floor);
                    const double hi = std::max(rho[static_cast<size_t>(it)][s], node_floor);
                    double mean_rec;
                    if (std::abs(hi - lo) <= 1e-12 * std::max(lo, hi))
                        mean_rec = 2.0 / (lo + hi);
                    else
                        mean_rec = (std::log(hi) - std::log(lo)) / (hi - lo);
                    integral += history.dt * mean_rec;
                    work[static_cast<size_t>(it)] =
                        rho_eq[static_cast<size_t>(it)][s] * std::exp(c * integral);
                }
                for (int it = 1; it < nt; ++it) {
                    const size_t st = static_cast<size_t>(it);
                    residual = std::max(residual, std::abs(work[st] - rho[st][s]));
                    rho[st][s] = work[st];
                }
            }
            last_residual = residual;
            if (residual < fp_tol) break;
            if (residual > prev_residual) {
                if (++grew >= 3)
                    throw convergence_error(
                        "noneq_density_exp: fixed point diverging, residual " +
                        std::to_string(residual));
            } else {
                grew = 0;
            }
            prev_residual = residual;
            if (iter + 1 == max_iter)
                throw convergence_error("noneq_density_exp: no contraction within " +
                                        std::to_string(max_iter) + " iterations, last residual " +
                                        std::to_string(last_residual));
        }
    }

    return assemble_density(history, i0, rho, std::move(mask),
                            NoneqDensity::Source::exponential);
}

PositivityReport positivity_scan(const NoneqDensity& density) {
    PositivityReport report;
    report.min_value = std::numeric_limits<double>::infinity();
    const ScalarSeries& s = density.values;
    for (int it = 0; it < s.n_times(); ++it) {
        for (int ix = 0; ix < s.grid.n_points; ++ix) {
            if (!density.mask.empty() && density.mask[static_cast<size_t>(it)][static_cast<size_t>(ix)])
                continue;
            const double r = s.at(it, ix);
            report.min_value = std::min(report.min_value, r);
            if (r < 0.0 && !report.negative_found) {
                report.negative_found = true;
                report.t = s.time(it);
                report.x = s.grid.x(ix);
            }
        }
        if (report.negative_found) break;
    }
    if (report.negative_found) {
        // min_value so far only covers scanned slices; report the value at the hit.
        double worst = 0.0;
        const int it_hit = static_cast<int>(std::lround((report.t - s.t0) / std::max(s.dt, 1e-300)));
        for (int ix = 0; ix < s.grid.n_points; ++ix) {
            if (!density.mask.empty() &&
                density.mask[static_cast<size_t>(it_hit)][static_cast<size_t>(ix)])
                continue;
            worst = std::min(worst, s.at(it_hit, ix));
        }
        report.min_value = worst;
    }
    return report;
}

double point_kernel(const std::function<complex(double)>& psi_of_t, double tau, double t,
                    int n_samples, double node_floor, bool* regularized) {
    if (!(node_floor > 0.0)) throw validation_error("node_floor: must be > 0");
    if (tau > t) throw validation_error("point_kernel: tau must be <= t");
    if (regularized) *regularized = false;
    if (tau == t) return 0.0;
    if (n_samples < 2) throw validation_error("point_kernel: need at least 2 samples");

    const double step = (t - tau) / static_cast<double>(n_samples - 1);
    double kernel = 0.0;
    double rho = std::norm(psi_of_t(tau));
    if (rho < node_floor && regularized) *regularized = true;
    double prev = 1.0 / std::max(rho, node_floor);
    for (int i = 1; i < n_samples; ++i) {
        const double ti = tau + step * static_cast<double>(i);
        rho = std::norm(psi_of_t(ti));
        if (rho < node_floor && regularized) *regularized = true;
        const double cur = 1.0 / std::max(rho, node_floor);
        kernel += 0.5 * step * (prev + cur);
        prev = cur;
    }
    return kernel;
}

}  // namespace qhydro

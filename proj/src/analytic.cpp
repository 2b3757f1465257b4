#include "qhydro/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qhydro/quadrature.hpp"

namespace qhydro {

namespace {
constexpr double kPi = std::numbers::pi;
const complex kI{0.0, 1.0};
}  // namespace

// ---------------------------------------------------------------------------
// BoxSystem
// ---------------------------------------------------------------------------

void BoxSystem::validate() const {
    if (!(L > 0.0)) throw validation_error("box.L: must be > 0");
    if (n1 <= 0 || n2 <= 0) throw validation_error("box.n1/n2: modes must be positive integers");
    if (n1 == n2) throw validation_error("box.n1/n2: modes must differ");
}

double BoxSystem::omega_mode(int n, const PhysicalParams& p) const {
    return static_cast<double>(n) * static_cast<double>(n) * kPi * kPi * p.hbar /
           (2.0 * p.mass * L * L);
}

double BoxSystem::omega1(const PhysicalParams& p) const {
    return omega1_override ? *omega1_override : omega_mode(n1, p);
}

double BoxSystem::omega2(const PhysicalParams& p) const {
    return omega2_override ? *omega2_override : omega_mode(n2, p);
}

complex box_psi(const BoxSystem& sys, const PhysicalParams& p, double x, double t) {
    if (x < 0.0 || x > sys.L) throw validation_error("box_psi: x outside [0, L]");
    const double s1 = std::sin(static_cast<double>(sys.n1) * kPi * x / sys.L);
    const double s2 = std::sin(static_cast<double>(sys.n2) * kPi * x / sys.L);
    const complex e1 = std::exp(-kI * sys.omega1(p) * t);
    const complex e2 = std::exp(-kI * sys.omega2(p) * t);
    return (s1 * e1 + s2 * e2) / std::sqrt(sys.L);
}

double box_equilibrium_density(const BoxSystem& sys, const PhysicalParams& p, double x, double t) {
    if (x < 0.0 || x > sys.L) throw validation_error("box density: x outside [0, L]");
    const double s1 = std::sin(static_cast<double>(sys.n1) * kPi * x / sys.L);
    const double s2 = std::sin(static_cast<double>(sys.n2) * kPi * x / sys.L);
    return (s1 * s1 + s2 * s2 + 2.0 * s1 * s2 * std::cos(sys.delta_omega(p) * t)) / sys.L;
}

namespace {

// Branch-continuous antiderivative of 1/(a + b cos(theta)) up to the constant
// factor 2/sqrt(a^2-b^2): G(theta) = atan(k tan(theta/2)) + m*pi on the m-th
// branch of the tangent, with k = sqrt((a-b)/(a+b)).
double beat_antiderivative(double theta, double k) {
    const double m = std::floor((theta + kPi) / (2.0 * kPi));
    const double half = 0.5 * (theta - 2.0 * kPi * m);  // in [-pi/2, pi/2)
    return std::atan2(k * std::sin(half), std::cos(half)) + m * kPi;
}

}  // namespace

double box_kernel_closed(const BoxSystem& sys, const PhysicalParams& p, double x, double t,
                         double delta_tau, double denom_tol) {
    sys.validate();
    if (!(delta_tau >= 0.0)) throw validation_error("box_kernel_closed: delta_tau must be >= 0");
    if (x < 0.0 || x > sys.L) throw validation_error("box_kernel_closed: x outside [0, L]");
    if (delta_tau == 0.0) return 0.0;

    const double s1 = std::sin(static_cast<double>(sys.n1) * kPi * x / sys.L);
    const double s2 = std::sin(static_cast<double>(sys.n2) * kPi * x / sys.L);
    const double a = s1 * s1 + s2 * s2;
    const double b = 2.0 * s1 * s2;
    const double den = s1 * s1 - s2 * s2;
    if (std::abs(den) <= denom_tol)
        throw pole_error(
            "box_kernel_closed: |sin^2(n1 pi x/L) - sin^2(n2 pi x/L)| below tolerance; "
            "use the quadrature path (windowed_density / noneq_density)");

    const double dw = sys.delta_omega(p);
    if (std::abs(dw) * delta_tau < 1e-12) {
        const double mid = a + b * std::cos(dw * (t - 0.5 * delta_tau));
        return sys.L * delta_tau / mid;
    }

    const double root = std::abs(den);                       // sqrt((a-b)(a+b))
    const double k = std::sqrt((a - b) / (a + b));           // both factors are squares
    const double g_hi = beat_antiderivative(dw * t, k);
    const double g_lo = beat_antiderivative(dw * (t - delta_tau), k);
    return (2.0 * sys.L / (dw * root)) * (g_hi - g_lo);
}

double box_noneq_closed(const BoxSystem& sys, const PhysicalParams& p, double x, double t,
                        double delta_tau, double c, double denom_tol) {
    const double rho_eq = box_equilibrium_density(sys, p, x, t);
    if (delta_tau == 0.0) return rho_eq;  // empty memory window
    const double kernel = box_kernel_closed(sys, p, x, t, delta_tau, denom_tol);
    return rho_eq * (1.0 + c * kernel);
}

// ---------------------------------------------------------------------------
// Stationary eigenstate
// ---------------------------------------------------------------------------

double stationary_omega(int n, double L, const PhysicalParams& p) {
    return static_cast<double>(n) * static_cast<double>(n) * kPi * kPi * p.hbar /
           (2.0 * p.mass * L * L);
}

complex stationary_psi(int n, double L, const PhysicalParams& p, double x, double t) {
    if (x < 0.0 || x > L) throw validation_error("stationary_psi: x outside [0, L]");
    const double amp = std::sqrt(2.0 / L) * std::sin(static_cast<double>(n) * kPi * x / L);
    return amp * std::exp(-kI * stationary_omega(n, L, p) * t);
}

// ---------------------------------------------------------------------------
// Free Gaussian packet
// ---------------------------------------------------------------------------

complex gaussian_psi(const GaussianPacket& g, const PhysicalParams& p, double x, double t) {
    const double s2 = g.sigma0 * g.sigma0;
    const double beta = p.hbar * t / (2.0 * p.mass * s2);
    const double u = x - g.x_c;
    const complex one_ib{1.0, beta};
    const complex num = complex{-u * u, 4.0 * s2 * g.k0 * u - 4.0 * beta * s2 * s2 * g.k0 * g.k0};
    const complex expo = num / (4.0 * s2 * one_ib);
    const double norm = std::pow(2.0 * kPi * s2, -0.25);
    return norm / std::sqrt(one_ib) * std::exp(expo);
}

double gaussian_sigma(const GaussianPacket& g, const PhysicalParams& p, double t) {
    const double beta = p.hbar * t / (2.0 * p.mass * g.sigma0 * g.sigma0);
    return g.sigma0 * std::sqrt(1.0 + beta * beta);
}

// ---------------------------------------------------------------------------
// NumericProvider
// ---------------------------------------------------------------------------

NumericProvider::NumericProvider(ComplexSeries series) : series_(std::move(series)) {
    series_.validate();
}

complex NumericProvider::psi(double x, double t) const {
    const Grid1D& grid = series_.grid;
    if (x < grid.x_min || x > grid.x_max)
        throw validation_error("numeric provider: x outside stored grid");
    const double t_end = series_.time(series_.n_times() - 1);
    const double t_eps = 1e-9 * std::max(1.0, std::abs(t_end));
    if (t < series_.t0 - t_eps || t > t_end + t_eps)
        throw coverage_error("numeric provider: t outside stored history");

    const double ft = std::clamp((t - series_.t0) / series_.dt, 0.0,
                                 static_cast<double>(series_.n_times() - 1));
    const int it = std::min(static_cast<int>(ft), series_.n_times() - 2);
    const double wt = ft - static_cast<double>(it);

    const double fx = std::clamp((x - grid.x_min) / grid.spacing(), 0.0,
                                 static_cast<double>(grid.n_points - 1));
    const int ix = std::min(static_cast<int>(fx), grid.n_points - 2);
    const double wx = fx - static_cast<double>(ix);

    auto at = [&](int jt, int jx) {
        return series_.values[static_cast<size_t>(jt)][static_cast<size_t>(jx)];
    };
    const complex lo = at(it, ix) * (1.0 - wx) + at(it, ix + 1) * wx;
    const complex hi = at(it + 1, ix) * (1.0 - wx) + at(it + 1, ix + 1) * wx;
    return lo * (1.0 - wt) + hi * wt;
}

ComplexSeries sample_history(const WaveProvider& w, const Grid1D& grid, double t0, double dt,
                             int n_slices) {
    grid.validate();
    if (n_slices < 1) throw validation_error("sample_history: need at least one slice");
    if (n_slices > 1 && !(dt > 0.0)) throw validation_error("sample_history: dt must be > 0");
    ComplexSeries out;
    out.grid = grid;
    out.t0 = t0;
    out.dt = dt;
    out.values.assign(static_cast<size_t>(n_slices),
                      std::vector<complex>(static_cast<size_t>(grid.n_points)));
    for (int it = 0; it < n_slices; ++it) {
        const double t = t0 + dt * static_cast<double>(it);
        auto& row = out.values[static_cast<size_t>(it)];
        for (int ix = 0; ix < grid.n_points; ++ix)
            row[static_cast<size_t>(ix)] = w.psi(grid.x(ix), t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Crank-Nicolson evolver
// ---------------------------------------------------------------------------

double field_norm(const ComplexField& f) {
    const double h = f.grid.spacing();
    double acc = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) {
        const double w = (i == 0 || i + 1 == f.values.size()) ? 0.5 : 1.0;
        acc += w * std::norm(f.values[i]);
    }
    return acc * h;
}

ComplexSeries evolve_numeric(const ComplexField& psi0, std::span<const double> V, double dt,
                             int n_steps, const PhysicalParams& p, double norm_tol) {
    psi0.validate();
    p.validate();
    if (!(dt > 0.0)) throw validation_error("evolve_numeric: dt must be > 0");
    if (n_steps < 1) throw validation_error("evolve_numeric: n_steps must be >= 1");
    const int n = psi0.grid.n_points;
    if (V.size() != static_cast<size_t>(n))
        throw shape_error("evolve_numeric: potential size does not match grid");

    const double h = psi0.grid.spacing();
    const double kappa = p.hbar * p.hbar / (2.0 * p.mass * h * h);
    const complex lambda = kI * dt / (2.0 * p.hbar);
    const complex off = -lambda * kappa;

    ComplexSeries out;
    out.grid = psi0.grid;
    out.t0 = psi0.time;
    out.dt = dt;
    out.values.reserve(static_cast<size_t>(n_steps + 1));

    std::vector<complex> psi = psi0.values;
    psi.front() = 0.0;  // Dirichlet walls
    psi.back() = 0.0;
    out.values.push_back(psi);

    const double norm0 = field_norm(ComplexField{psi0.grid, psi0.time, psi});

    const int m = n - 2;  // interior unknowns
    std::vector<complex> diag(static_cast<size_t>(m)), rhs(static_cast<size_t>(m)),
        scratch(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        diag[static_cast<size_t>(i)] =
            1.0 + lambda * (2.0 * kappa + V[static_cast<size_t>(i + 1)]);

    for (int step = 0; step < n_steps; ++step) {
        for (int i = 0; i < m; ++i) {
            const size_t g = static_cast<size_t>(i + 1);
            const complex hpsi = -kappa * (psi[g - 1] + psi[g + 1]) +
                                 (2.0 * kappa + V[g]) * psi[g];
            rhs[static_cast<size_t>(i)] = psi[g] - lambda * hpsi;
        }
        // Thomas solve for the interior of (I + lambda H) psi_new = rhs.
        scratch[0] = off / diag[0];
        rhs[0] = rhs[0] / diag[0];
        for (int i = 1; i < m; ++i) {
            const size_t s = static_cast<size_t>(i);
            const complex denom = diag[s] - off * scratch[s - 1];
            scratch[s] = off / denom;
            rhs[s] = (rhs[s] - off * rhs[s - 1]) / denom;
        }
        for (int i = m - 2; i >= 0; --i) {
            const size_t s = static_cast<size_t>(i);
            rhs[s] -= scratch[s] * rhs[s + 1];
        }
        for (int i = 0; i < m; ++i) psi[static_cast<size_t>(i + 1)] = rhs[static_cast<size_t>(i)];
        psi.front() = 0.0;
        psi.back() = 0.0;
        out.values.push_back(psi);

        const double norm = field_norm(ComplexField{psi0.grid, 0.0, psi});
        if (std::abs(norm - norm0) > norm_tol * std::max(1.0, norm0))
            throw convergence_error("evolve_numeric: norm drift " +
                                    std::to_string(std::abs(norm - norm0)) + " at step " +
                                    std::to_string(step + 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// First-order truncated evolution
// ---------------------------------------------------------------------------

HamiltonianSpec HamiltonianSpec::box(double L, std::vector<int> modes,
                                     std::vector<complex> coefficients, const PhysicalParams& p) {
    HamiltonianSpec h;
    h.L = L;
    h.modes = std::move(modes);
    h.coefficients = std::move(coefficients);
    h.energies.reserve(h.modes.size());
    for (int n : h.modes)
        h.energies.push_back(static_cast<double>(n) * static_cast<double>(n) * kPi * kPi *
                             p.hbar * p.hbar / (2.0 * p.mass * L * L));
    h.validate();
    return h;
}

void HamiltonianSpec::validate() const {
    if (!(L > 0.0)) throw validation_error("hamiltonian.L: must be > 0");
    if (modes.empty() || modes.size() != energies.size() || modes.size() != coefficients.size())
        throw shape_error("hamiltonian: modes/energies/coefficients must have equal nonzero size");
    for (int n : modes)
        if (n <= 0) throw validation_error("hamiltonian.modes: must be positive integers");
    double total = 0.0;
    for (const complex& a : coefficients) total += std::norm(a);
    if (std::abs(total - 1.0) > 1e-12)
        throw validation_error("hamiltonian.coefficients: sum |a_n|^2 = " + std::to_string(total) +
                               ", expected 1 within 1e-12");
}

complex dyson_psi(const HamiltonianSpec& h, const PhysicalParams& p, double x, double t) {
    if (x < 0.0 || x > h.L) throw validation_error("dyson_psi: x outside [0, L]");
    const double amp = std::sqrt(2.0 / h.L);
    complex acc = 0.0;
    for (size_t k = 0; k < h.modes.size(); ++k) {
        const double phi = amp * std::sin(static_cast<double>(h.modes[k]) * kPi * x / h.L);
        acc += h.coefficients[k] * (1.0 - kI * h.energies[k] * t / p.hbar) * phi;
    }
    return acc;
}

double dyson_density(const HamiltonianSpec& h, const PhysicalParams& p, double t, double c,
                     double tau, double x_eval, int n_quad, double node_floor) {
    h.validate();
    p.validate();
    if (tau > t) throw validation_error("dyson_density: tau must be <= t");
    double emax = 0.0;
    for (double e : h.energies) emax = std::max(emax, std::abs(e));
    const double small = emax * std::max(std::abs(t), std::abs(tau)) / p.hbar;
    if (!(small < 1.0))
        throw validation_error("dyson_density: first-order truncation invalid, max|E_n| t/hbar = " +
                               std::to_string(small) + " >= 1");

    const double rho_t = std::norm(dyson_psi(h, p, x_eval, t));
    if (t == tau || c == 0.0) return rho_t;

    if (n_quad < 2) throw validation_error("dyson_density: n_quad must be >= 2");
    const double step = (t - tau) / static_cast<double>(n_quad - 1);
    double kernel = 0.0;
    double prev = 1.0 / std::max(std::norm(dyson_psi(h, p, x_eval, tau)), node_floor);
    for (int i = 1; i < n_quad; ++i) {
        const double ti = tau + step * static_cast<double>(i);
        const double cur = 1.0 / std::max(std::norm(dyson_psi(h, p, x_eval, ti)), node_floor);
        kernel += 0.5 * step * (prev + cur);
        prev = cur;
    }
    return rho_t * (1.0 + c * kernel);
}

}  // namespace qhydro

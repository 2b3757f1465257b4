#pragma once

// Closed-form wavefunction providers (box superposition, single eigenstates,
// free Gaussian packet), the closed-form non-equilibrium box density, a
// norm-preserving Crank-Nicolson evolver for cross-validation, and the
// first-order truncated (Dyson) density approximation.

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qhydro/types.hpp"

namespace qhydro {

// ---------------------------------------------------------------------------
// Particle in a box, two-mode superposition.
// ---------------------------------------------------------------------------

struct BoxSystem {
    double L = 1.0;
    int n1 = 1;
    int n2 = 2;
    // Mode frequencies default to the box eigenvalues; raw overrides are
    // accepted since the superposition treats them as free parameters.
    std::optional<double> omega1_override;
    std::optional<double> omega2_override;

    double omega_mode(int n, const PhysicalParams& p) const;
    double omega1(const PhysicalParams& p) const;
    double omega2(const PhysicalParams& p) const;
    double delta_omega(const PhysicalParams& p) const { return omega2(p) - omega1(p); }

    void validate() const;
};

// psi(x,t) = (1/sqrt(L)) [ sin(n1 pi x / L) e^{-i w1 t} + sin(n2 pi x / L) e^{-i w2 t} ]
complex box_psi(const BoxSystem& sys, const PhysicalParams& p, double x, double t);

// |psi|^2 of the superposition, evaluated without complex arithmetic.
double box_equilibrium_density(const BoxSystem& sys, const PhysicalParams& p, double x, double t);

// Closed-form non-equilibrium density over the memory window [t - delta_tau, t].
// The beat-density reciprocal integrates to an arctangent antiderivative that
// must be pieced together across the tangent branch cuts; below `denom_tol` on
// |sin^2(n1 pi x/L) - sin^2(n2 pi x/L)| the expression degenerates and a
// pole_error directs the caller to the quadrature path.
double box_noneq_closed(const BoxSystem& sys, const PhysicalParams& p, double x, double t,
                        double delta_tau, double c, double denom_tol = 1e-9);

// The closed-form memory kernel alone (the integral of 1/|psi|^2 over the window).
double box_kernel_closed(const BoxSystem& sys, const PhysicalParams& p, double x, double t,
                         double delta_tau, double denom_tol = 1e-9);

// ---------------------------------------------------------------------------
// Single box eigenstate: sqrt(2/L) sin(n pi x / L) e^{-i w_n t}.
// ---------------------------------------------------------------------------

complex stationary_psi(int n, double L, const PhysicalParams& p, double x, double t);
double stationary_omega(int n, double L, const PhysicalParams& p);

// ---------------------------------------------------------------------------
// Free Gaussian packet (node-free provider).
// ---------------------------------------------------------------------------

struct GaussianPacket {
    double sigma0 = 1.0;
    double k0 = 0.0;
    double x_c = 0.0;

    void validate() const {
        if (!(sigma0 > 0.0)) throw validation_error("gaussian.sigma0: must be > 0");
    }
};

complex gaussian_psi(const GaussianPacket& g, const PhysicalParams& p, double x, double t);

// Width law sigma(t)^2 = sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2).
double gaussian_sigma(const GaussianPacket& g, const PhysicalParams& p, double t);

// ---------------------------------------------------------------------------
// Providers: a uniform way for downstream modules (memory windows, CHSH scans,
// CLI) to sample any wavefunction source. Selected by name in CLI configs:
// "box", "stationary", "gaussian", "numeric".
// ---------------------------------------------------------------------------

class WaveProvider {
  public:
    virtual ~WaveProvider() = default;
    virtual complex psi(double x, double t) const = 0;
    virtual double x_min() const = 0;
    virtual double x_max() const = 0;
    virtual std::string name() const = 0;
};

class BoxProvider final : public WaveProvider {
  public:
    BoxProvider(BoxSystem sys, PhysicalParams p) : sys_(sys), params_(p) {
        sys_.validate();
        params_.validate();
    }
    complex psi(double x, double t) const override { return box_psi(sys_, params_, x, t); }
    double x_min() const override { return 0.0; }
    double x_max() const override { return sys_.L; }
    std::string name() const override { return "box"; }
    const BoxSystem& system() const { return sys_; }
    const PhysicalParams& params() const { return params_; }

  private:
    BoxSystem sys_;
    PhysicalParams params_;
};

class StationaryProvider final : public WaveProvider {
  public:
    StationaryProvider(int n, double L, PhysicalParams p) : n_(n), L_(L), params_(p) {
        if (n <= 0) throw validation_error("stationary.n: must be a positive integer");
        if (!(L > 0.0)) throw validation_error("stationary.L: must be > 0");
        params_.validate();
    }
    complex psi(double x, double t) const override {
        return stationary_psi(n_, L_, params_, x, t);
    }
    double x_min() const override { return 0.0; }
    double x_max() const override { return L_; }
    std::string name() const override { return "stationary"; }
    int mode() const { return n_; }
    double length() const { return L_; }

  private:
    int n_;
    double L_;
    PhysicalParams params_;
};

class GaussianProvider final : public WaveProvider {
  public:
    GaussianProvider(GaussianPacket g, PhysicalParams p, double half_width = 40.0)
        : packet_(g), params_(p), half_width_(half_width) {
        packet_.validate();
        params_.validate();
    }
    complex psi(double x, double t) const override {
        return gaussian_psi(packet_, params_, x, t);
    }
    double x_min() const override { return packet_.x_c - half_width_; }
    double x_max() const override { return packet_.x_c + half_width_; }
    std::string name() const override { return "gaussian"; }
    const GaussianPacket& packet() const { return packet_; }

  private:
    GaussianPacket packet_;
    PhysicalParams params_;
    double half_width_;
};

// Wraps a stored numeric evolution; psi(x,t) is bilinear interpolation of the
// stored slices, so accuracy is tied to the stored resolution.
class NumericProvider final : public WaveProvider {
  public:
    explicit NumericProvider(ComplexSeries series);
    complex psi(double x, double t) const override;
    double x_min() const override { return series_.grid.x_min; }
    double x_max() const override { return series_.grid.x_max; }
    std::string name() const override { return "numeric"; }
    const ComplexSeries& series() const { return series_; }

  private:
    ComplexSeries series_;
};

// Samples a provider onto a uniform (x, t) table.
ComplexSeries sample_history(const WaveProvider& w, const Grid1D& grid, double t0, double dt,
                             int n_slices);

// ---------------------------------------------------------------------------
// Norm-preserving numeric evolver (Cayley / Crank-Nicolson, Dirichlet walls).
// ---------------------------------------------------------------------------

ComplexSeries evolve_numeric(const ComplexField& psi0, std::span<const double> V, double dt,
                             int n_steps, const PhysicalParams& p, double norm_tol = 1e-10);

// Trapezoid norm of a sampled field.
double field_norm(const ComplexField& f);

// ---------------------------------------------------------------------------
// First-order truncated evolution (time-independent Hamiltonian over a box
// eigenbasis) fed through the memory-kernel pipeline.
// ---------------------------------------------------------------------------

struct HamiltonianSpec {
    double L = 1.0;
    std::vector<int> modes;
    std::vector<double> energies;        // E_n, real
    std::vector<complex> coefficients;   // a_n, sum |a_n|^2 = 1

    static HamiltonianSpec box(double L, std::vector<int> modes, std::vector<complex> coefficients,
                               const PhysicalParams& p);
    void validate() const;
};

// First-order state psi_1 = sum_n a_n (1 - i E_n t / hbar) phi_n evaluated at x.
complex dyson_psi(const HamiltonianSpec& h, const PhysicalParams& p, double x, double t);

// |psi_1|^2 (1 + c K_1) with K_1 accumulated from |psi_1|^2 over [tau, t] by
// trapezoid on n_quad samples. Requires max_n |E_n| max(|t|,|tau|) / hbar < 1.
double dyson_density(const HamiltonianSpec& h, const PhysicalParams& p, double t, double c,
                     double tau, double x_eval, int n_quad = 513,
                     double node_floor = kDefaultNodeFloor);

}  // namespace qhydro

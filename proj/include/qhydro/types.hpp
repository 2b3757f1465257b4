#pragma once

// Core value types shared by every module: physical constants, the 1D grid,
// sampled complex fields and their time series, and the error taxonomy used
// across the library.

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qhydro {

using complex = std::complex<double>;

inline constexpr double kDefaultNodeFloor = 1e-12;

// ---------------------------------------------------------------------------
// Errors. Thrown by library code; the CLI maps them to exit codes
// (validation -> 1, non-convergence -> 2).
// ---------------------------------------------------------------------------

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct shape_error : validation_error {
    using validation_error::validation_error;
};

struct coverage_error : validation_error {
    using validation_error::validation_error;
};

// Closed-form evaluation too close to a removable singularity; callers should
// fall back to the quadrature path.
struct pole_error : validation_error {
    using validation_error::validation_error;
};

struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Physical parameters. Natural units (hbar = m = 1) by default.
// ---------------------------------------------------------------------------

struct PhysicalParams {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const {
        if (!(hbar > 0.0)) throw validation_error("params.hbar: must be > 0");
        if (!(mass > 0.0)) throw validation_error("params.mass: must be > 0");
    }
};

// ---------------------------------------------------------------------------
// Uniform spatial grid.
// ---------------------------------------------------------------------------

struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    int n_points = 0;

    double spacing() const { return (x_max - x_min) / (n_points - 1); }
    double x(int i) const { return x_min + spacing() * static_cast<double>(i); }

    std::vector<double> points() const {
        std::vector<double> xs(static_cast<size_t>(n_points));
        for (int i = 0; i < n_points; ++i) xs[static_cast<size_t>(i)] = x(i);
        return xs;
    }

    bool contains(double xq) const { return xq >= x_min && xq <= x_max; }

    void validate() const {
        if (!(x_min < x_max)) throw validation_error("grid.x_min: must be < grid.x_max");
        if (n_points < 8) throw validation_error("grid.n_points: must be >= 8");
        if (!(spacing() > 0.0)) throw validation_error("grid: spacing must be > 0");
    }

    bool operator==(const Grid1D&) const = default;
};

// ---------------------------------------------------------------------------
// Sampled wavefunction at one time, and histories on a uniform time grid.
// ---------------------------------------------------------------------------

struct ComplexField {
    Grid1D grid;
    double time = 0.0;
    std::vector<complex> values;

    void validate() const {
        grid.validate();
        if (values.size() != static_cast<size_t>(grid.n_points))
            throw shape_error("field: value count does not match grid.n_points");
    }
};

struct ComplexSeries {
    Grid1D grid;
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::vector<complex>> values;  // [time][x]

    int n_times() const { return static_cast<int>(values.size()); }
    double time(int it) const { return t0 + dt * static_cast<double>(it); }

    ComplexField slice(int it) const {
        return ComplexField{grid, time(it), values[static_cast<size_t>(it)]};
    }

    void validate() const {
        grid.validate();
        if (values.empty()) throw shape_error("series: empty time axis");
        if (n_times() > 1 && !(dt > 0.0)) throw validation_error("series.dt: must be > 0");
        for (const auto& row : values)
            if (row.size() != static_cast<size_t>(grid.n_points))
                throw shape_error("series: slice size does not match grid.n_points");
    }
};

struct ScalarSeries {
    Grid1D grid;
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::vector<double>> values;  // [time][x]

    int n_times() const { return static_cast<int>(values.size()); }
    double time(int it) const { return t0 + dt * static_cast<double>(it); }
    double at(int it, int ix) const {
        return values[static_cast<size_t>(it)][static_cast<size_t>(ix)];
    }

    void validate() const {
        grid.validate();
        if (values.empty()) throw shape_error("series: empty time axis");
        if (n_times() > 1 && !(dt > 0.0)) throw validation_error("series.dt: must be > 0");
        for (const auto& row : values)
            if (row.size() != static_cast<size_t>(grid.n_points))
                throw shape_error("series: slice size does not match grid.n_points");
    }
};

inline void require_aligned(const ScalarSeries& a, const ScalarSeries& b, const char* what) {
    if (!(a.grid == b.grid) || a.n_times() != b.n_times() || a.t0 != b.t0 || a.dt != b.dt)
        throw shape_error(std::string("mismatched series: ") + what);
}

// Real field plus a per-point mask (true = value carried/regularized, do not
// trust it quantitatively).
struct MaskedField {
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
};

// ---------------------------------------------------------------------------
// Madelung-decomposed slice: density, phase, velocity, divergence, quantum
// potential, and the node mask (true exactly where rho_eq < node_floor).
// ---------------------------------------------------------------------------

struct HydroSlice {
    Grid1D grid;
    double time = 0.0;
    std::vector<double> rho_eq;
    std::vector<double> S;
    std::vector<double> v;
    std::vector<double> div_v;
    std::vector<double> Q;
    std::vector<std::uint8_t> node_mask;
};

// Bohmian trajectory sample. `truncated` is set when the integration left the
// grid before completing all requested steps.
struct Trajectory {
    double x0 = 0.0;
    std::vector<double> times;
    std::vector<double> positions;
    bool truncated = false;
};

}  // namespace qhydro

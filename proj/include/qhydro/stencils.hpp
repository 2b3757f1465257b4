#pragma once

// Second-order finite-difference stencils on uniform grids: central in the
// interior, one-sided (still second order) at the ends.

#include <span>
#include <vector>

#include "qhydro/types.hpp"

namespace qhydro {

inline std::vector<double> ddx(std::span<const double> f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 3) throw shape_error("ddx: need at least 3 points");
    std::vector<double> d(static_cast<size_t>(n));
    const double inv2h = 1.0 / (2.0 * h);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv2h;
    for (int i = 1; i + 1 < n; ++i)
        d[static_cast<size_t>(i)] =
            (f[static_cast<size_t>(i + 1)] - f[static_cast<size_t>(i - 1)]) * inv2h;
    d[static_cast<size_t>(n - 1)] =
        (3.0 * f[static_cast<size_t>(n - 1)] - 4.0 * f[static_cast<size_t>(n - 2)] +
         f[static_cast<size_t>(n - 3)]) *
        inv2h;
    return d;
}

inline std::vector<double> d2dx2(std::span<const double> f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < 4) throw shape_error("d2dx2: need at least 4 points");
    std::vector<double> d(static_cast<size_t>(n));
    const double invh2 = 1.0 / (h * h);
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * invh2;
    for (int i = 1; i + 1 < n; ++i)
        d[static_cast<size_t>(i)] = (f[static_cast<size_t>(i + 1)] -
                                     2.0 * f[static_cast<size_t>(i)] +
                                     f[static_cast<size_t>(i - 1)]) *
                                    invh2;
    const size_t m = static_cast<size_t>(n - 1);
    d[m] = (2.0 * f[m] - 5.0 * f[m - 1] + 4.0 * f[m - 2] - f[m - 3]) * invh2;
    return d;
}

// d/dt of a [time][x] table at fixed x, same stencil family as above.
inline double ddt_at(const std::vector<std::vector<double>>& f, int it, int ix, double dt) {
    const int nt = static_cast<int>(f.size());
    const size_t j = static_cast<size_t>(ix);
    const double inv2dt = 1.0 / (2.0 * dt);
    if (it == 0)
        return (-3.0 * f[0][j] + 4.0 * f[1][j] - f[2][j]) * inv2dt;
    if (it == nt - 1)
        return (3.0 * f[static_cast<size_t>(nt - 1)][j] - 4.0 * f[static_cast<size_t>(nt - 2)][j] +
                f[static_cast<size_t>(nt - 3)][j]) *
               inv2dt;
    return (f[static_cast<size_t>(it + 1)][j] - f[static_cast<size_t>(it - 1)][j]) * inv2dt;
}

}  // namespace qhydro

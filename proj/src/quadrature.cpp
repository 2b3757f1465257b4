#include "qhydro/quadrature.hpp"

#include <cmath>
#include <cstddef>

#include "qhydro/types.hpp"

namespace qhydro {

double trapezoid(std::span<const double> f, double h) {
    const size_t n = f.size();
    if (n < 2) return 0.0;
    double acc = 0.5 * (f[0] + f[n - 1]);
    for (size_t i = 1; i + 1 < n; ++i) acc += f[i];
    return acc * h;
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
    if (x.size() != f.size()) throw shape_error("trapezoid: abscissae/ordinate size mismatch");
    double acc = 0.0;
    for (size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return acc;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h) {
    std::vector<double> out(f.size(), 0.0);
    for (size_t i = 1; i < f.size(); ++i)
        out[i] = out[i - 1] + 0.5 * h * (f[i] + f[i - 1]);
    return out;
}

namespace {

double simpson(double fa, double fm, double fb, double h6) { return h6 * (fa + 4.0 * fm + fb); }

double simpson_rec(const std::function<double(double)>& f, double a, double m, double b,
                   double fa, double fm, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, (m - a) / 6.0);
    const double right = simpson(fm, frm, fb, (b - m) / 6.0);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol)
        return left + right + err / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = simpson(fa, fm, fb, (b - a) / 6.0);
    return simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace qhydro

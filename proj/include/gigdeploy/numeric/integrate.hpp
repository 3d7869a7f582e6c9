#pragma once

#include <cmath>

namespace gigdeploy::num {

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double abs_tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // depth 20 caps the panel count at 2^20
    if (depth <= 0 || std::abs(delta) <= 15.0 * abs_tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * abs_tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * abs_tol, depth - 1);
}

} // namespace detail

// Adaptive Simpson quadrature with absolute tolerance and a recursion cap.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-8,
                        int max_depth = 20) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

} // namespace gigdeploy::num

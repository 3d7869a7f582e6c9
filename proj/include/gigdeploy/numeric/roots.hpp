#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "gigdeploy/errors.hpp"

namespace gigdeploy::num {

struct RootResult {
    double x = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
};

// Plain bisection on [lo, hi]; requires f(lo) and f(hi) of opposite sign
// (zero endpoint values count as roots). Runs to interval exhaustion.
template <class F>
double bisect(F&& f, double lo, double hi, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi))
        throw DomainError("bisect: endpoints do not bracket a root");
    for (int i = 0; i < max_iter && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval at machine resolution
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Newton iteration safeguarded by a maintained bracket: any step that leaves
// [lo, hi] or fails to shrink the residual falls back to bisection. The
// bracket must satisfy sign(f(lo)) != sign(f(hi)).
template <class F, class DF>
RootResult newton_safeguarded(F&& f, DF&& df, double x0, double lo, double hi,
                              double x_rel_tol = 1e-15, int max_iter = 200) {
    double flo = f(lo);
    double fhi = f(hi);
    RootResult out;
    if (flo == 0.0) return {lo, 0.0, 0, true};
    if (fhi == 0.0) return {hi, 0.0, 0, true};
    if (std::signbit(flo) == std::signbit(fhi))
        throw DomainError("newton_safeguarded: endpoints do not bracket a root");

    double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
    double fx = f(x);
    for (int i = 0; i < max_iter; ++i) {
        out.iterations = i + 1;
        if (fx == 0.0) break;
        // shrink bracket around the current iterate
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double d = df(x);
        double xn = (d != 0.0) ? x - fx / d : lo - 1.0; // force bisection
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= x_rel_tol * std::max(1.0, std::abs(xn))) {
            x = xn;
            fx = f(x);
            out.converged = true;
            break;
        }
        x = xn;
        fx = f(x);
    }
    out.x = x;
    out.residual = fx;
    if (!out.converged) out.converged = std::abs(hi - lo) <= x_rel_tol * std::max(1.0, std::abs(x));
    return out;
}

// Expand hi geometrically until g(hi) >= 0; g must eventually turn
// non-negative. Returns the first such hi.
template <class F>
double expand_upper(F&& g, double hi, double factor = 2.0, int max_iter = 400) {
    for (int i = 0; i < max_iter; ++i) {
        if (g(hi) >= 0.0) return hi;
        hi *= factor;
    }
    throw NonConvergence("expand_upper: no sign change found");
}

} // namespace gigdeploy::num

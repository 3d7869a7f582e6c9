#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace gigdeploy::num {

struct Maximum {
    double x = 0.0;
    double value = 0.0;
};

// Golden-section search for a maximum of f on [lo, hi], run until the
// interval shrinks below x_rel_tol relative to the scale of x.
template <class F>
Maximum golden_max(F&& f, double lo, double hi, double x_rel_tol = 1e-10,
                   int max_iter = 400) {
    constexpr double inv_phi = 0.6180339887498948482;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    for (int i = 0; i < max_iter; ++i) {
        if (hi - lo <= x_rel_tol * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    const double xm = 0.5 * (lo + hi);
    return {xm, f(xm)};
}

// Global 1-D maximization: evaluate f on an n-point grid over [lo, hi], pick
// every interior local maximum (endpoints included as candidates), keep the
// top_k best, refine each with golden-section on its bracketing cells, and
// return the overall best. Robust against multimodal profiles.
template <class F>
Maximum prescan_golden_max(F&& f, double lo, double hi, int n = 1024,
                           int top_k = 8, double x_rel_tol = 1e-10) {
    std::vector<double> xs(static_cast<size_t>(n)), vs(static_cast<size_t>(n));
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) {
        xs[i] = (i == n - 1) ? hi : lo + h * i;
        vs[i] = f(xs[i]);
    }
    std::vector<int> cand;
    for (int i = 0; i < n; ++i) {
        const bool up = (i == 0) || vs[i] >= vs[i - 1];
        const bool down = (i == n - 1) || vs[i] >= vs[i + 1];
        if (up && down && std::isfinite(vs[i])) cand.push_back(i);
    }
    if (cand.empty()) { // profile is -inf everywhere or monotone NaN; report grid best
        int ib = static_cast<int>(std::max_element(vs.begin(), vs.end()) - vs.begin());
        return {xs[ib], vs[ib]};
    }
    std::sort(cand.begin(), cand.end(), [&](int a, int b) { return vs[a] > vs[b]; });
    if (static_cast<int>(cand.size()) > top_k) cand.resize(static_cast<size_t>(top_k));
    Maximum best{xs[cand[0]], vs[cand[0]]};
    for (int i : cand) {
        const double a = xs[std::max(0, i - 1)];
        const double b = xs[std::min(n - 1, i + 1)];
        Maximum m = golden_max(f, a, b, x_rel_tol);
        if (m.value > best.value) best = m;
    }
    return best;
}

} // namespace gigdeploy::num

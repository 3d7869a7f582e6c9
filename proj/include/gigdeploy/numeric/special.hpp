#pragma once

#include <cmath>
#include <limits>

#include "gigdeploy/errors.hpp"

namespace gigdeploy::num {

// Regularized incomplete beta function I_x(a, b) by Lentz continued fraction,
// with the symmetry flip for fast convergence. Accurate to ~1e-14.
inline double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw DomainError("incomplete_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // closed forms for the common one-parameter edges
    if (a == 1.0) return -std::expm1(b * std::log1p(-x));
    if (b == 1.0) return std::pow(x, a);

    const auto cf = [](double a_, double b_, double x_) {
        constexpr double tiny = 1e-300;
        constexpr double eps = 1e-15;
        double c = 1.0;
        double d = 1.0 - (a_ + b_) * x_ / (a_ + 1.0);
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 400; ++m) {
            const double m_ = m;
            double num = m_ * (b_ - m_) * x_ / ((a_ + 2.0 * m_ - 1.0) * (a_ + 2.0 * m_));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(a_ + m_) * (a_ + b_ + m_) * x_ /
                  ((a_ + 2.0 * m_) * (a_ + 2.0 * m_ + 1.0));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < eps) break;
        }
        return h;
    };

    const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * cf(a, b, x) / a;
    return 1.0 - front * cf(b, a, 1.0 - x) / b;
}

inline double beta_pdf(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) return 0.0;
    if (x == 0.0) return (a < 1.0) ? std::numeric_limits<double>::infinity()
                                   : (a == 1.0 ? b : 0.0);
    if (x == 1.0) return (b < 1.0) ? std::numeric_limits<double>::infinity()
                                   : (b == 1.0 ? a : 0.0);
    const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta);
}

// Quantile of the beta distribution by bisection on the CDF, with closed
// forms when either shape parameter is 1.
inline double beta_quantile(double a, double b, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    if (a == 1.0) return -std::expm1(std::log1p(-p) / b);
    if (b == 1.0) return std::pow(p, 1.0 / a);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (incomplete_beta(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Erlang blocking probability B(k, a) for offered load a, by the standard
// stable recurrence.
inline double erlang_b(int k, double a) {
    double B = 1.0;
    for (int n = 1; n <= k; ++n) B = a * B / (n + a * B);
    return B;
}

// Erlang delay probability (probability an arrival waits) for an M/M/k queue
// with offered load a = lambda/mu; requires a < k.
inline double erlang_c(int k, double a) {
    const double B = erlang_b(k, a);
    const double rho = a / k;
    return B / (1.0 - rho * (1.0 - B));
}

// Two-sided Student-t critical value: the t with P(|T_df| <= t) = 1 - alpha.
inline double t_critical(int df, double alpha = 0.05) {
    if (df < 1) throw DomainError("t_critical: df must be >= 1");
    const auto tail = [&](double t) {
        const double x = df / (df + t * t);
        return incomplete_beta(0.5 * df, 0.5, x) - alpha;
    };
    double lo = 0.0, hi = 1.0;
    while (tail(hi) > 0.0 && hi < 1e8) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace gigdeploy::num

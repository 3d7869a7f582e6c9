#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "gigdeploy/hybrid.hpp"
#include "gigdeploy/numeric/integrate.hpp"

namespace gigdeploy {

// Per-hour welfare account of one deployment: consumer surplus, labor welfare
// (earnings net of reservation costs), social welfare, and the operator profit
// the social figure must reconcile with. The residual measures how far the
// report is from the accounting identity sw = profit + lw + cs; closed-form
// reports carry rounding noise only.
struct WelfareReport {
    double cs = 0.0;
    double lw = 0.0;
    double sw = 0.0;
    double profit = 0.0;
    double identity_residual = 0.0;
};

namespace detail {

inline WelfareReport make_report(double cs, double lw, double sw, double profit) {
    WelfareReport r;
    r.cs = cs;
    r.lw = lw;
    r.sw = sw;
    r.profit = profit;
    r.identity_residual = std::abs(sw - (profit + lw + cs));
    return r;
}

// Expectation of g over [lo, hi] under dist, computed in quantile space so the
// integrand stays bounded even when the density diverges at the support edge.
template <class G>
double expect_over(const Heterogeneity& dist, double lo, double hi, G&& g,
                   double abs_tol = 1e-10) {
    const double ulo = dist.cdf(lo);
    const double uhi = dist.cdf(hi);
    if (uhi <= ulo) return 0.0;
    return num::adaptive_simpson([&](double u) { return g(dist.quantile(u)); },
                                 ulo, uhi, abs_tol);
}

// Aggregate reservation cost of the contractors who work at participation
// threshold cap: the integral of r over {r <= cap} under the pool distribution.
inline double reservation_cost_below(double cap, const Heterogeneity& dist) {
    const double hi = std::clamp(cap, 0.0, 1.0);
    if (hi <= 0.0) return 0.0;
    if (dist.kind == Heterogeneity::Kind::Uniform01) return 0.5 * hi * hi;
    return expect_over(dist, 0.0, hi, [](double r) { return r; });
}

} // namespace detail

// Employee-only deployment at its optimum. Below the operating threshold the
// service shuts down and every account is zero.
inline WelfareReport welfare_system_s(const MarketParams& p) {
    const auto t = compute_thresholds(p);
    if (p.V < t.c_bar_s) return {};
    const double A = std::sqrt(p.w_s * p.Lambda / p.mu_s);
    const double lw = (1.0 - 0.5 * p.w_s) * (A + p.w_s * p.Lambda / p.mu_s);
    const double cs = 0.5 * A;
    const double sw = p.V * p.Lambda - p.w_s * p.w_s * p.Lambda / (2.0 * p.mu_s) -
                      0.5 * (1.0 + p.w_s) * A;
    return detail::make_report(cs, lw, sw, p.Lambda * (p.V - t.c_bar_s));
}

// Contractor-only deployment at its optimum, on either coverage branch. Labor
// welfare equals k_o^2 / (2K) on both branches; the account peaks exactly at
// the full-coverage threshold pool size.
inline WelfareReport welfare_system_o(const MarketParams& p) {
    const auto t = compute_thresholds(p);
    if (p.K >= t.k_bar) {
        const double l = t.l_bar_o;
        return detail::make_report(0.5 * l, 0.25 * l * (1.0 + l),
                                   p.V * p.Lambda - 0.25 * l * (3.0 + l),
                                   p.Lambda * (p.V - t.c_bar_o));
    }
    const double Q = std::sqrt(p.V * p.Lambda + 1.0);
    const double L0 = Q - 1.0;
    const double C =
        p.K * p.mu_o * p.mu_o * L0 * L0 * L0 * L0 / (p.Lambda * p.Lambda);
    return detail::make_report(0.25 * C / Q, 0.125 * C,
                               0.125 * C * (3.0 * Q + 2.0) / Q, 0.25 * C);
}

// Welfare account of a two-service solution. Consumer surplus uses the exact
// segment integrals of the piecewise-linear utility envelope; when the two
// lead times coincide the split degenerates and the envelope is integrated
// numerically instead.
inline WelfareReport welfare_hybrid(const HybridSolution& sol,
                                    const MarketParams& p) {
    const ChannelState& s = sol.standard;
    const ChannelState& o = sol.ondemand;

    double lw = s.servers * p.w_s * (1.0 - 0.5 * p.w_s);
    if (o.arrival_rate > 0.0) lw += o.servers * o.servers / (2.0 * p.K);

    double cs = 0.0;
    if (o.arrival_rate <= 0.0) {
        // collapsed on-demand channel: one customer segment remains
        cs = p.Lambda * (p.V - s.price - 0.5 * s.lead_time);
    } else if (std::abs(o.lead_time - s.lead_time) < 1e-12) {
        // degenerate branch: equal lead times, integrate the envelope directly
        cs = p.Lambda *
             num::adaptive_simpson(
                 [&](double th) {
                     const double us = p.V - s.price - th * s.lead_time;
                     const double uo = p.V - o.price - th * o.lead_time;
                     return std::max({us, uo, 0.0});
                 },
                 0.0, 1.0, 1e-10);
    } else if (o.lead_time > s.lead_time) {
        // slow on-demand tier: the patient segment's discount folds into one term
        const double gap = s.price - o.price;
        cs = p.Lambda * (p.V - s.price - 0.5 * s.lead_time +
                         gap * gap / (2.0 * (o.lead_time - s.lead_time)));
    } else {
        // fast on-demand tier: add the segments on both sides of the
        // indifferent customer type
        const double t =
            std::clamp((o.price - s.price) / (s.lead_time - o.lead_time), 0.0, 1.0);
        cs = p.Lambda *
             (t * (p.V - s.price) - 0.5 * s.lead_time * t * t +
              (1.0 - t) * (p.V - o.price) - 0.5 * o.lead_time * (1.0 - t * t));
    }
    return detail::make_report(cs, lw, sol.profit + lw + cs, sol.profit);
}

// One channel of a hand-specified operating policy.
struct PolicyChannel {
    double price = 0.0;
    double lead_time = 0.0;
    double wage = 0.0;    // hourly for employees, per-service for contractors
    double servers = 0.0;
};

// Deployment described directly by its channel policies; an absent channel is
// simply not offered.
struct DeploymentPolicy {
    std::optional<PolicyChannel> standard{};
    std::optional<PolicyChannel> ondemand{};
};

// Evaluate the definitional welfare integrals for an arbitrary policy under
// the market's taste and reservation-rate distributions. Customers pick the
// utility-maximal participating channel; contractors earn the channel's hourly
// rate when their reservation rate clears it. The identity residual reported
// here is a consistency diagnostic: it vanishes only when the policy's
// staffing actually matches the participation it induces.
inline WelfareReport welfare_generic(const DeploymentPolicy& pol,
                                     const MarketParams& p) {
    const bool has_s = pol.standard.has_value();
    const bool has_o = pol.ondemand.has_value();
    const double p_s = has_s ? pol.standard->price : kInf;
    const double W_s = has_s ? pol.standard->lead_time : 0.0;
    const double p_o = has_o ? pol.ondemand->price : kInf;
    const double W_o = has_o ? pol.ondemand->lead_time : 0.0;

    const DemandSplit split = demand_split(p_s, W_s, p_o, W_o, p);

    const double cs =
        p.Lambda *
        detail::expect_over(p.theta_dist, 0.0, 1.0, [&](double th) {
            double best = 0.0;
            if (has_s) best = std::max(best, p.V - p_s - th * W_s);
            if (has_o) best = std::max(best, p.alpha * p.V - p_o - th * W_o);
            return best;
        });

    // customers contribute the service value net of their waiting disutility
    double sw = 0.0;
    if (!split.interval_s.empty())
        sw += p.Lambda * detail::expect_over(
                             p.theta_dist, split.interval_s.lo, split.interval_s.hi,
                             [&](double th) { return p.V - th * W_s; });
    if (!split.interval_o.empty())
        sw += p.Lambda * detail::expect_over(
                             p.theta_dist, split.interval_o.lo, split.interval_o.hi,
                             [&](double th) { return p.alpha * p.V - th * W_o; });

    double lw = 0.0;
    double profit = 0.0;
    if (has_s) {
        const double k_s = pol.standard->servers;
        const double wage = pol.standard->wage;
        // salaried staff are hired outright; their reservation rates are
        // charged against the unit-uniform population they are drawn from
        const double rc = 0.5 * std::min(wage, 1.0) * std::min(wage, 1.0);
        lw += k_s * (wage - rc);
        sw -= k_s * rc;
        profit += split.lambda_s * p_s - k_s * wage;
    }
    if (has_o) {
        const double k_o = pol.ondemand->servers;
        const double wage = pol.ondemand->wage;
        const double earning =
            k_o > 0.0 ? split.lambda_o * wage / k_o : 0.0;
        const double rc = detail::reservation_cost_below(earning, p.r_dist);
        lw += p.K * (earning * p.r_dist.cdf(std::min(earning, 1.0)) - rc);
        sw -= p.K * rc;
        profit += split.lambda_o * (p_o - wage);
    }
    return detail::make_report(cs, lw, sw, profit);
}

// Welfare account of the profit-optimal deployment already selected in d.
inline WelfareReport deployment_welfare(const DeploymentSolution& d,
                                        const MarketParams& p) {
    switch (d.regime) {
        case Regime::S:
        case Regime::Shutdown:
            return welfare_system_s(p);
        case Regime::O:
            return welfare_system_o(p);
        default:
            return welfare_hybrid(*d.sol_h, p);
    }
}

} // namespace gigdeploy

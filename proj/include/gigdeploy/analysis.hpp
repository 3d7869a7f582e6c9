#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "gigdeploy/welfare.hpp"

namespace gigdeploy {

// Employee-deployment profit relative to the contractor deployment, from the
// branch closed forms rather than the two solvers.
inline double profit_ratio(const MarketParams& p) {
    const auto t = compute_thresholds(p);
    if (p.V < t.c_bar_s)
        throw DomainError("profit_ratio: employee service would shut down at this value");
    if (p.K < t.k_bar) {
        const double L0 = std::sqrt(p.V * p.Lambda + 1.0) - 1.0;
        return 4.0 * p.Lambda * p.Lambda * p.Lambda * (p.V - t.c_bar_s) /
               (p.K * p.mu_o * p.mu_o * L0 * L0 * L0 * L0);
    }
    return (p.V - t.c_bar_s) / (p.V - t.c_bar_o);
}

// Pool sizes at which the contractor deployment overtakes (or stops beating)
// the employee deployment on each account. Profit and social welfare cross
// once; labor welfare and consumer surplus are beaten only on a middle
// interval, so those come in lo/hi pairs. +infinity marks a crossing that
// never happens.
struct ThresholdCurves {
    double k_F = kInf;
    double k_S = kInf;
    double k_L_lo = kInf;
    double k_L_hi = kInf;
    double k_C_lo = kInf;
    double k_C_hi = kInf;
};

namespace detail {

// Pool size whose full-coverage queue length equals l (the cubic, inverted).
inline double pool_for_queue_length(double l, const MarketParams& p) {
    if (l <= 0.0) return kInf;
    return 2.0 * p.Lambda * p.Lambda * (1.0 + l) / (p.mu_o * p.mu_o * l * l * l);
}

} // namespace detail

inline ThresholdCurves threshold_curves(double w_s, MarketParams p) {
    if (w_s <= 0.0) throw DomainError("threshold_curves: wage must be positive");
    p.w_s = w_s;
    const auto s = welfare_system_s(p);
    const double VL = p.V * p.Lambda;
    const double Q = std::sqrt(VL + 1.0);
    const double L0 = Q - 1.0;
    const double L0_4 = L0 * L0 * L0 * L0;
    const double mu2 = p.mu_o * p.mu_o;
    const double peak_lw = Q * L0 / 4.0;       // best labor welfare over pools
    const double peak_cs = L0 / 2.0;           // best consumer surplus over pools
    const double pi_at_kbar = Q * L0 / 2.0;    // profit where coverage completes
    const double sw_at_kbar = VL - L0 * (3.0 + L0) / 4.0;

    ThresholdCurves t;
    if (s.lw <= peak_lw) {
        t.k_L_lo = 8.0 * p.Lambda * p.Lambda * s.lw / (mu2 * L0_4);
        const double l = 0.5 * (-1.0 + std::sqrt(1.0 + 16.0 * s.lw));
        t.k_L_hi = detail::pool_for_queue_length(l, p);
    }
    if (s.cs <= peak_cs) {
        t.k_C_lo = 4.0 * p.Lambda * p.Lambda * Q * s.cs / (mu2 * L0_4);
        t.k_C_hi = detail::pool_for_queue_length(2.0 * s.cs, p);
    }
    if (s.profit <= pi_at_kbar) {
        t.k_F = 4.0 * p.Lambda * p.Lambda * s.profit / (mu2 * L0_4);
    } else {
        const double l = 0.5 * (-3.0 + std::sqrt(9.0 + 8.0 * (VL - s.profit)));
        t.k_F = detail::pool_for_queue_length(l, p);
    }
    if (s.sw <= sw_at_kbar) {
        t.k_S = 8.0 * p.Lambda * p.Lambda * Q * s.sw / (mu2 * L0_4 * (3.0 * Q + 2.0));
    } else {
        const double l = 0.5 * (-3.0 + std::sqrt(9.0 + 16.0 * (VL - s.sw)));
        t.k_S = detail::pool_for_queue_length(l, p);
    }
    return t;
}

// Which single-service deployment, if either, leaves the operator, the
// agents, and the customers simultaneously better off.
enum class CoordinationRegion { StandardCoordinated, OnDemandCoordinated, None };

inline const char* to_string(CoordinationRegion r) {
    switch (r) {
        case CoordinationRegion::StandardCoordinated: return "standard";
        case CoordinationRegion::OnDemandCoordinated: return "on-demand";
        case CoordinationRegion::None: return "none";
    }
    return "?";
}

inline CoordinationRegion coordination_region(const MarketParams& p) {
    const auto t = threshold_curves(p.w_s, p);
    const double need_lo =
        std::max(std::max(t.k_F, t.k_S), std::max(t.k_L_lo, t.k_C_lo));
    const double cap_lo =
        std::min(std::min(t.k_F, t.k_S), std::min(t.k_L_lo, t.k_C_lo));
    if (p.K <= cap_lo) return CoordinationRegion::StandardCoordinated;
    if (p.K >= need_lo && p.K <= std::min(t.k_L_hi, t.k_C_hi))
        return CoordinationRegion::OnDemandCoordinated;
    return CoordinationRegion::None;
}

// Independent classification by comparing the four accounts head-to-head;
// used to cross-validate the threshold arithmetic.
inline CoordinationRegion coordination_by_comparison(const MarketParams& p) {
    const double pi_s = solve_system_s(p).profit;
    const double pi_o = solve_system_o(p).profit;
    const auto ws = welfare_system_s(p);
    const auto wo = welfare_system_o(p);
    const bool s_all =
        pi_s >= pi_o && ws.lw >= wo.lw && ws.cs >= wo.cs && ws.sw >= wo.sw;
    const bool o_all =
        pi_o >= pi_s && wo.lw >= ws.lw && wo.cs >= ws.cs && wo.sw >= ws.sw;
    if (s_all) return CoordinationRegion::StandardCoordinated;
    if (o_all) return CoordinationRegion::OnDemandCoordinated;
    return CoordinationRegion::None;
}

// Relative gains from offering the second service, per account. delta_o reads
// "what adding the on-demand service is worth on top of employees", delta_s
// the reverse; both profit deltas obey closed-form upper bounds.
struct WelfareDeltas {
    double cs_o = 0.0;
    double cs_s = 0.0;
    double lw_o = 0.0;
    double lw_s = 0.0;
    double sw_o = 0.0;
    double sw_s = 0.0;
};

struct ProliferationReport {
    double delta_o = 0.0;
    double delta_s = 0.0;
    double bound_o = 0.0;
    double bound_s = 0.0;
    WelfareDeltas welfare_deltas{};
};

inline ProliferationReport proliferation_value(const MarketParams& p) {
    const auto d = solve_deployment(p);
    if (!(d.pi_star > 0.0))
        throw DomainError("proliferation_value: optimal profit must be positive");
    const auto t = compute_thresholds(p);
    ProliferationReport r;
    r.delta_o = 1.0 - d.pi_s / d.pi_star;
    r.delta_s = 1.0 - d.pi_o / d.pi_star;
    r.bound_o = t.c_bar_s / p.V;
    r.bound_s = t.c_bar_o / p.V;
    const auto best = deployment_welfare(d, p);
    const auto s = welfare_system_s(p);
    const auto o = welfare_system_o(p);
    const auto rel = [](double other, double at_best) {
        return at_best > 0.0 ? 1.0 - other / at_best : 0.0;
    };
    r.welfare_deltas.cs_o = rel(s.cs, best.cs);
    r.welfare_deltas.cs_s = rel(o.cs, best.cs);
    r.welfare_deltas.lw_o = rel(s.lw, best.lw);
    r.welfare_deltas.lw_s = rel(o.lw, best.lw);
    r.welfare_deltas.sw_o = rel(s.sw, best.sw);
    r.welfare_deltas.sw_s = rel(o.sw, best.sw);
    if (r.delta_o < -1e-9 || r.delta_o > r.bound_o + 1e-9 ||
        r.delta_s < -1e-9 || r.delta_s > r.bound_s + 1e-9)
        throw TheoremViolation(
            "proliferation_value: profit gain left its guaranteed bound (delta_o=" +
            std::to_string(r.delta_o) + ", delta_s=" + std::to_string(r.delta_s) + ")");
    return r;
}

namespace detail {

// a*x + b*y treating a zero weight as absent, so an unbounded lead time on an
// unused channel cannot poison the blend.
inline double blend(double a, double x, double b, double y) {
    double out = 0.0;
    if (a != 0.0) out += a * x;
    if (b != 0.0) out += b * y;
    return out;
}

// Best profit of the mixed-assignment system at fixed assignment shares
// (q_s of standard jobs to contractors, q_o of on-demand jobs to employees).
// Every candidate configuration reduces to a one-dimensional scan whose inner
// lead times are closed-form or a cubic root: customers buying each ticket
// face the blended lead time, so revenue is linear in the raw lead times and
// the two cost terms separate.
inline double flexible_cell_optimum(double q_s, double q_o,
                                    const MarketParams& p) {
    const double D = 1.0 - q_s - q_o;
    if (D <= 0.0) throw DomainError("flexible_cell_optimum: assignment shares must sum below 1");
    const double wpm = p.w_s / p.mu_s;
    const double Kmu2 = p.K * p.mu_o * p.mu_o;

    // lead times minimizing cost against linear revenue coefficients, given
    // the served flows; either may be unbounded when its coefficient vanishes
    const auto inner = [&](double c_ws, double c_wo, double lam_o,
                           double& W_s, double& W_o) {
        W_s = c_ws > 0.0 ? std::sqrt(p.w_s / (p.mu_s * c_ws)) : kInf;
        W_o = c_wo > 0.0 ? wo_foc_root(c_wo * Kmu2, lam_o) : kInf;
    };
    const auto cost = [&](double W_s, double lam_s, double W_o, double lam_o) {
        const double cap_s = (std::isinf(W_s) ? 0.0 : 1.0 / W_s) + lam_s;
        const double cap_o = (std::isinf(W_o) ? 0.0 : 1.0 / W_o) + lam_o;
        return wpm * cap_s + cap_o * cap_o / Kmu2;
    };

    // full-coverage two-ticket configurations, by which ticket is slower
    const auto two_ticket = [&](double n_o, bool o_slower) {
        const double n_s = p.Lambda - n_o;
        const double lam_s = (1.0 - q_s) * n_s + q_o * n_o;
        const double lam_o = q_s * n_s + (1.0 - q_o) * n_o;
        double a_s, a_o; // revenue loss per unit of blended lead time
        if (o_slower) {
            a_s = n_s * (p.Lambda + n_o) / p.Lambda;
            a_o = n_o * n_o / p.Lambda;
        } else {
            a_o = n_o * (p.Lambda + n_s) / p.Lambda;
            a_s = n_s * n_s / p.Lambda;
        }
        const double c_ws = (1.0 - q_s) * a_s + q_o * a_o;
        const double c_wo = q_s * a_s + (1.0 - q_o) * a_o;
        double W_s, W_o;
        inner(c_ws, c_wo, lam_o, W_s, W_o);
        const double A_s = blend(1.0 - q_s, W_s, q_s, W_o);
        const double A_o = blend(q_o, W_s, 1.0 - q_o, W_o);
        // both tickets live: the assumed ordering must actually hold
        if (n_o > 1e-12 * p.Lambda && n_s > 1e-12 * p.Lambda &&
            (o_slower ? A_o <= A_s : A_s <= A_o))
            return -kInf;
        return p.Lambda * p.V - blend(a_s, A_s, a_o, A_o) -
               cost(W_s, lam_s, W_o, lam_o);
    };

    // one ticket only, coverage free to be partial
    const auto one_ticket = [&](double n, bool standard_ticket) {
        if (n <= 0.0) return 0.0; // empty system
        const double a = n * n / p.Lambda;
        const double share_s = standard_ticket ? 1.0 - q_s : q_o;
        const double share_o = standard_ticket ? q_s : 1.0 - q_o;
        const double lam_s = share_s * n;
        const double lam_o = share_o * n;
        double W_s, W_o;
        inner(share_s * a, share_o * a, lam_o, W_s, W_o);
        const double A = blend(share_s, W_s, share_o, W_o);
        const double revenue = n * (p.V - n * A / p.Lambda);
        return revenue - cost(W_s, lam_s, W_o, lam_o);
    };

    // equal blended lead times: one effective ticket at full coverage, with
    // the served split chosen by equating marginal channel costs
    const auto uniform_ticket = [&](double A) {
        if (A <= 0.0) return -kInf;
        double lam_o = 0.5 * p.w_s * Kmu2 / p.mu_s - 1.0 / A;
        lam_o = std::clamp(lam_o, q_s * p.Lambda, (1.0 - q_o) * p.Lambda);
        const double lam_s = p.Lambda - lam_o;
        return p.Lambda * (p.V - A) - cost(A, lam_s, A, lam_o);
    };

    double best = -kInf;
    for (const bool o_slower : {true, false}) {
        const auto m = num::prescan_golden_max(
            [&](double n) { return two_ticket(n, o_slower); }, 0.0, p.Lambda, 1024, 4);
        best = std::max(best, m.value);
    }
    for (const bool standard_ticket : {true, false}) {
        const auto m = num::prescan_golden_max(
            [&](double n) { return one_ticket(n, standard_ticket); }, 0.0, p.Lambda,
            1024, 4);
        best = std::max(best, m.value);
    }
    const auto m = num::prescan_golden_max(uniform_ticket, 1e-9, 2.0 * p.V, 512, 4);
    return std::max(best, m.value);
}

} // namespace detail

// Result of sweeping the assignment-share grid: the worst profit advantage
// any mixed-assignment cell achieves over the dedicated optimum. Dedicated
// assignment is provably as good as any mix, so the gap should never be
// meaningfully positive; the (0,0) cell pins it at essentially zero.
struct FlexibleCheck {
    double max_gap = -kInf;
    double q_s_at_max = 0.0;
    double q_o_at_max = 0.0;
    int cells = 0;
};

inline FlexibleCheck flexible_equivalence_check(const MarketParams& p, int grid_n) {
    if (grid_n < 8) throw DomainError("flexible_equivalence_check: need a grid of at least 8");
    const double pi_star = solve_deployment(p).pi_star;
    FlexibleCheck out;
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const double q_s = static_cast<double>(i) / grid_n;
            const double q_o = static_cast<double>(j) / grid_n;
            if (q_s + q_o >= 1.0) continue;
            double cell;
            try {
                cell = detail::flexible_cell_optimum(q_s, q_o, p);
            } catch (const NonConvergence& e) {
                throw NonConvergence(std::string(e.what()) + " at assignment cell (q_s=" +
                                     std::to_string(q_s) + ", q_o=" + std::to_string(q_o) + ")");
            }
            ++out.cells;
            if (cell - pi_star > out.max_gap) {
                out.max_gap = cell - pi_star;
                out.q_s_at_max = q_s;
                out.q_o_at_max = q_o;
            }
        }
    }
    return out;
}

} // namespace gigdeploy

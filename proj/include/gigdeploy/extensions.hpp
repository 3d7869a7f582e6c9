#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gigdeploy/hybrid.hpp"

namespace gigdeploy {

// Queueing discipline used for each channel's lead time: a single
// aggregated-capacity station, or a bank of unit-rate servers with Erlang-C
// delay and integer staffing.
enum class QueueModel { MM1, MMk };

inline const char* to_string(QueueModel m) {
    return m == QueueModel::MM1 ? "mm1" : "mmk";
}

// Generalized market configuration: queueing discipline, customer- and
// worker-heterogeneity distributions, and the on-demand valuation multiplier.
// The default configuration is exactly the closed-form model.
struct ExtensionConfig {
    QueueModel queue_model = QueueModel::MM1;
    Heterogeneity theta_dist{};
    Heterogeneity r_dist{};
    double alpha = 1.0;
};

namespace detail {

inline MarketParams with_config(MarketParams p, const ExtensionConfig& cfg) {
    if (!(cfg.alpha > 0.0))
        throw DomainError("extension config: alpha must be positive");
    p.theta_dist = cfg.theta_dist;
    p.r_dist = cfg.r_dist;
    p.alpha = cfg.alpha;
    return p;
}

// Shared state for one generalized solve. Holds the effective parameters and
// a tabulated reservation-rate quantile so the wage bill stays O(1) in the
// inner loops even for Beta worker pools; the steep distribution tails fall
// back to the exact quantile.
struct GeneralContext {
    MarketParams p;
    QueueModel qm = QueueModel::MM1;
    std::vector<double> rq;

    GeneralContext(const MarketParams& params, QueueModel m) : p(params), qm(m) {
        if (p.r_dist.kind == Heterogeneity::Kind::Beta) {
            constexpr int n = 2048;
            rq.resize(n + 1);
            for (int i = 0; i <= n; ++i)
                rq[i] = p.r_dist.quantile(static_cast<double>(i) / n);
        }
    }

    // Hourly wage bill that attracts staffing k out of the pool of K: the
    // marginal participant's reservation rate Q_r(k/K) clears the market, so
    // the aggregate payout lambda_o * w_o equals k * Q_r(k/K).
    double bill(double k) const {
        if (k <= 0.0) return 0.0;
        if (k > p.K) return kInf;
        const double u = k / p.K;
        if (rq.empty()) return k * p.r_dist.quantile(u);
        if (u < 1.0 / 64.0 || u > 1.0 - 1.0 / 64.0)
            return k * p.r_dist.quantile(u);
        const double x = u * (rq.size() - 1);
        const auto i = std::min(rq.size() - 2, static_cast<std::size_t>(x));
        const double f = x - static_cast<double>(i);
        return k * ((1.0 - f) * rq[i] + f * rq[i + 1]);
    }
};

// Integer staffing window [k_lo, k_hi]: anchored just above the stability
// floor, wide enough that square-root safety capacity always fits.
inline std::pair<int, int> staffing_window(double lam, double mu) {
    int lo = std::max(1, static_cast<int>(std::ceil(lam / mu)));
    while (lo * mu <= lam) ++lo;
    const int hi = lo + static_cast<int>(std::ceil(10.0 * std::sqrt(lam / mu))) + 10;
    return {lo, hi};
}

// Multi-server lead times for every staffing level in [k_lo, k_hi] at one
// offered load, via a single pass of the blocking recurrence.
inline std::vector<double> lead_window(int k_lo, int k_hi, double mu, double lam) {
    const double a = lam / mu;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    double B = 1.0;
    for (int n = 1; n <= k_hi; ++n) {
        B = a * B / (n + a * B);
        if (n >= k_lo) {
            const double rho = a / n;
            const double C = B / (1.0 - rho * (1.0 - B));
            out.push_back(1.0 / mu + C / (n * mu - lam));
        }
    }
    return out;
}

// One channel's cost-minimizing operating point against a linear revenue
// penalty c * W; cost totals the penalty plus the wage bill. An empty channel
// costs nothing.
struct ChannelPick {
    double W = kInf;
    double servers = 0.0;
    double cost = 0.0;
    bool feasible = false;
};

inline ChannelPick pick_standard(double c, double lam, const GeneralContext& ctx) {
    const auto& p = ctx.p;
    ChannelPick out;
    if (lam <= 0.0) {
        out.feasible = true;
        return out;
    }
    if (ctx.qm == QueueModel::MM1) {
        // cost(W) = c W + (w_s/mu_s)(1/W + lam), minimized in closed form
        const double W =
            std::sqrt(std::max(p.w_s, 1e-300) / (p.mu_s * std::max(c, 1e-300)));
        out.W = W;
        out.servers = (1.0 / W + lam) / p.mu_s;
        out.cost = c * W + p.w_s * out.servers;
        out.feasible = true;
        return out;
    }
    const auto [k_lo, k_hi] = staffing_window(lam, p.mu_s);
    const auto Ws = lead_window(k_lo, k_hi, p.mu_s, lam);
    for (int k = k_lo; k <= k_hi; ++k) {
        const double W = Ws[static_cast<std::size_t>(k - k_lo)];
        const double cost = c * W + p.w_s * k;
        if (!out.feasible || cost < out.cost)
            out = {W, static_cast<double>(k), cost, true};
    }
    return out;
}

// Aggregated-capacity contractor channel: choose staffing k (equivalently the
// lead time) within [k_floor, k_cap] to trade the revenue penalty against the
// participation wage bill.
inline ChannelPick pick_ondemand_mm1(double c, double lam, const GeneralContext& ctx,
                                     double k_floor, double k_cap) {
    const auto& p = ctx.p;
    ChannelPick out;
    if (lam <= 0.0) {
        out.feasible = true;
        return out;
    }
    const double lo = std::max(lam / p.mu_o * (1.0 + 1e-12) + 1e-15, k_floor);
    const double hi = std::min(p.K, k_cap);
    if (!(lo < hi)) return out;
    const auto cost = [&](double k) {
        return c / (k * p.mu_o - lam) + ctx.bill(k);
    };
    const auto m =
        num::prescan_golden_max([&](double k) { return -cost(k); }, lo, hi, 64, 3);
    out.W = 1.0 / (m.x * p.mu_o - lam);
    out.servers = m.x;
    out.cost = cost(m.x);
    out.feasible = true;
    return out;
}

// Contractor staffing options under integer staffing, ordered by k (so lead
// times are strictly decreasing along the vector).
struct IntOption {
    int k = 0;
    double W = kInf;
    double cost = kInf;
};

inline std::vector<IntOption> ondemand_options_mmk(double c, double lam,
                                                   const GeneralContext& ctx) {
    const auto& p = ctx.p;
    std::vector<IntOption> out;
    if (lam <= 0.0) return out;
    auto [k_lo, k_hi] = staffing_window(lam, p.mu_o);
    k_hi = std::min(k_hi, static_cast<int>(std::floor(p.K + 1e-9)));
    if (k_hi < k_lo) return out;
    const auto Ws = lead_window(k_lo, k_hi, p.mu_o, lam);
    out.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (int k = k_lo; k <= k_hi; ++k) {
        const double W = Ws[static_cast<std::size_t>(k - k_lo)];
        out.push_back({k, W, c * W + ctx.bill(k)});
    }
    return out;
}

// Two-channel configuration at fixed coverage thresholds 0 < t1 < t2 <= 1:
// the slower channel serves tastes [0, t1), the faster channel [t1, t2], and
// indifference at the thresholds pins both prices. Revenue is then linear in
// the two lead times, so each channel's staffing separates given the flows.
struct HybridEval {
    double profit = -kInf;
    double W_s = kInf, W_o = kInf;
    double k_s = 0.0, k_o = 0.0;
    double price_s = 0.0, price_o = 0.0;
    double lam_s = 0.0, lam_o = 0.0;
    bool pinned = false; // lead times forced equal by the ordering constraint
};

inline HybridEval eval_hybrid_general(double t1, double t2, HybridBranch br,
                                      const GeneralContext& ctx) {
    const auto& p = ctx.p;
    HybridEval e;
    if (!(t1 > 0.0 && t2 > t1 && t2 <= 1.0)) return e;
    const double F1 = p.theta_dist.cdf(t1);
    const double F2 = p.theta_dist.cdf(t2);
    const bool ol = br == HybridBranch::OL; // on-demand is the slower channel
    const double lam_s = (ol ? F2 - F1 : F1) * p.Lambda;
    const double lam_o = (ol ? F1 : F2 - F1) * p.Lambda;
    const double floor = 1e-6 * p.Lambda; // each channel must carry real demand
    if (lam_s < floor || lam_o < floor) return e;

    // price_fast = v_fast - t2 W_fast; price_slow from indifference at t1
    const double c_s = ol ? lam_s * t2 + lam_o * (t2 - t1) : lam_s * t1;
    const double c_o = ol ? lam_o * t1 : lam_o * t2 + lam_s * (t2 - t1);
    const double rev0 = lam_s * p.V + lam_o * p.alpha * p.V;

    double cost = kInf, W_s = kInf, W_o = kInf, k_s = 0.0, k_o = 0.0;
    bool pinned = false;

    if (ctx.qm == QueueModel::MM1) {
        const auto s = pick_standard(c_s, lam_s, ctx);
        // staffing level at which the contractor lead time equals W_s
        const double k_eq = (1.0 / s.W + lam_o) / p.mu_o;
        const auto o = ol ? pick_ondemand_mm1(c_o, lam_o, ctx, 0.0, k_eq * (1.0 - 1e-10))
                          : pick_ondemand_mm1(c_o, lam_o, ctx, k_eq * (1.0 + 1e-10), kInf);
        if (o.feasible) {
            cost = s.cost + o.cost;
            W_s = s.W;
            W_o = o.W;
            k_s = s.servers;
            k_o = o.servers;
        }
        // Joint optimum with the ordering constraint active: both channels at
        // a common lead time. Customers are then indifferent between tickets
        // at every taste, so the assumed split stays consistent.
        if (p.K * p.mu_o > lam_o) {
            const double W_lo = std::max(1.0 / (p.K * p.mu_o - lam_o), 1e-9);
            const double W_scale = std::sqrt((p.w_s / p.mu_s + 1.0 / p.mu_o) /
                                             std::max(c_s + c_o, 1e-12));
            const double W_hi = std::max(8.0 * W_scale, 2.0 * W_lo);
            const auto joint = [&](double W) {
                return (c_s + c_o) * W + p.w_s * (1.0 / W + lam_s) / p.mu_s +
                       ctx.bill((1.0 / W + lam_o) / p.mu_o);
            };
            const auto m = num::prescan_golden_max(
                [&](double W) { return -joint(W); }, W_lo, W_hi, 96, 3);
            if (-m.value < cost) {
                cost = joint(m.x);
                W_s = W_o = m.x;
                k_s = (1.0 / m.x + lam_s) / p.mu_s;
                k_o = (1.0 / m.x + lam_o) / p.mu_o;
                pinned = true;
            }
        }
    } else {
        const auto so = ondemand_options_mmk(c_o, lam_o, ctx);
        const std::size_t n = so.size();
        if (n > 0) {
            // prefix/suffix minima over the contractor options let each
            // employee staffing level pair with its cheapest admissible
            // partner in O(log n)
            std::vector<double> pre(n), suf(n);
            std::vector<std::size_t> pre_i(n), suf_i(n);
            for (std::size_t i = 0; i < n; ++i) {
                if (i == 0 || so[i].cost < pre[i - 1]) {
                    pre[i] = so[i].cost;
                    pre_i[i] = i;
                } else {
                    pre[i] = pre[i - 1];
                    pre_i[i] = pre_i[i - 1];
                }
            }
            for (std::size_t i = n; i-- > 0;) {
                if (i == n - 1 || so[i].cost < suf[i + 1]) {
                    suf[i] = so[i].cost;
                    suf_i[i] = i;
                } else {
                    suf[i] = suf[i + 1];
                    suf_i[i] = suf_i[i + 1];
                }
            }
            const auto [k_lo, k_hi] = staffing_window(lam_s, p.mu_s);
            const auto Ws = lead_window(k_lo, k_hi, p.mu_s, lam_s);
            for (int k = k_lo; k <= k_hi; ++k) {
                const double W = Ws[static_cast<std::size_t>(k - k_lo)];
                const double sc = c_s * W + p.w_s * k;
                // contractor options strictly slower than W form a prefix
                const auto cut = static_cast<std::size_t>(
                    std::partition_point(so.begin(), so.end(),
                                         [&](const IntOption& op) { return op.W > W; }) -
                    so.begin());
                if (ol) {
                    if (cut == 0) continue;
                    const std::size_t i = pre_i[cut - 1];
                    if (sc + so[i].cost < cost) {
                        cost = sc + so[i].cost;
                        W_s = W;
                        W_o = so[i].W;
                        k_s = k;
                        k_o = so[i].k;
                    }
                } else {
                    std::size_t at = cut;
                    while (at < n && so[at].W >= W) ++at; // require strictly faster
                    if (at >= n) continue;
                    const std::size_t i = suf_i[at];
                    if (sc + so[i].cost < cost) {
                        cost = sc + so[i].cost;
                        W_s = W;
                        W_o = so[i].W;
                        k_s = k;
                        k_o = so[i].k;
                    }
                }
            }
        }
    }

    if (!std::isfinite(cost)) return e;
    e.profit = rev0 - cost;
    e.W_s = W_s;
    e.W_o = W_o;
    e.k_s = k_s;
    e.k_o = k_o;
    e.lam_s = lam_s;
    e.lam_o = lam_o;
    e.pinned = pinned;
    if (ol) {
        e.price_s = p.V - t2 * W_s;
        e.price_o = p.alpha * p.V - t1 * W_o - (t2 - t1) * W_s;
    } else {
        e.price_o = p.alpha * p.V - t2 * W_o;
        e.price_s = p.V - t1 * W_s - (t2 - t1) * W_o;
    }
    return e;
}

// Single-channel configuration serving tastes [0, t] at the participation
// price; coverage may stay partial.
struct SingleEval {
    double profit = -kInf;
    double t = 0.0;
    double W = kInf;
    double servers = 0.0;
    double price = 0.0;
    double lam = 0.0;
    bool feasible = false;
};

inline SingleEval eval_single_standard(double t, const GeneralContext& ctx) {
    const auto& p = ctx.p;
    SingleEval e;
    if (!(t > 0.0 && t <= 1.0)) return e;
    const double lam = p.Lambda * p.theta_dist.cdf(t);
    if (lam < 1e-9 * p.Lambda) return e;
    const auto s = pick_standard(lam * t, lam, ctx);
    if (!s.feasible) return e;
    e.profit = lam * p.V - s.cost;
    e.t = t;
    e.W = s.W;
    e.servers = s.servers;
    e.price = p.V - t * s.W;
    e.lam = lam;
    e.feasible = true;
    return e;
}

inline SingleEval eval_single_ondemand(double t, const GeneralContext& ctx) {
    const auto& p = ctx.p;
    SingleEval e;
    if (!(t > 0.0 && t <= 1.0)) return e;
    const double lam = p.Lambda * p.theta_dist.cdf(t);
    if (lam < 1e-9 * p.Lambda) return e;
    ChannelPick o;
    if (ctx.qm == QueueModel::MM1) {
        o = pick_ondemand_mm1(lam * t, lam, ctx, 0.0, kInf);
    } else {
        for (const auto& op : ondemand_options_mmk(lam * t, lam, ctx)) {
            if (!o.feasible || op.cost < o.cost)
                o = {op.W, static_cast<double>(op.k), op.cost, true};
        }
    }
    if (!o.feasible) return e;
    e.profit = lam * p.alpha * p.V - o.cost;
    e.t = t;
    e.W = o.W;
    e.servers = o.servers;
    e.price = p.alpha * p.V - t * o.W;
    e.lam = lam;
    e.feasible = true;
    return e;
}

inline SingleEval best_single_standard(const GeneralContext& ctx) {
    const auto m = num::prescan_golden_max(
        [&](double t) { return eval_single_standard(t, ctx).profit; }, 1e-9, 1.0, 256,
        4);
    return eval_single_standard(m.x, ctx);
}

inline SingleEval best_single_ondemand(const GeneralContext& ctx) {
    const auto m = num::prescan_golden_max(
        [&](double t) { return eval_single_ondemand(t, ctx).profit; }, 1e-9, 1.0, 256,
        4);
    return eval_single_ondemand(m.x, ctx);
}

// Two-channel deployment search. Running both channels means covering the
// whole market and choosing the split threshold t1 between them (partial
// coverage is the single-channel candidates' territory), so the search is
// one-dimensional: a dense prescan with golden refinement, plus the
// closed-form solution's split as an extra seed.
inline std::optional<HybridSolution> best_hybrid_general(const GeneralContext& ctx) {
    const auto& p = ctx.p;
    HybridEval best;
    HybridBranch best_br = HybridBranch::OL;

    std::optional<double> seed_t1[2];
    {
        MarketParams pb = p;
        pb.theta_dist = Heterogeneity::uniform01();
        pb.r_dist = Heterogeneity::uniform01();
        pb.alpha = 1.0;
        try {
            const auto db = solve_deployment(pb);
            if (db.sol_h) {
                const double served =
                    std::clamp(db.sol_h->lambda_o_star / p.Lambda, 0.0, 1.0);
                seed_t1[db.sol_h->branch == HybridBranch::OL ? 0 : 1] =
                    p.theta_dist.quantile(served);
            }
        } catch (const std::exception&) {
            // seeding is best-effort; the scan stands on its own
        }
    }

    for (const HybridBranch br : {HybridBranch::OL, HybridBranch::SL}) {
        const auto value = [&](double t1) {
            return eval_hybrid_general(t1, 1.0, br, ctx).profit;
        };
        double t1 = num::prescan_golden_max(value, 0.0, 1.0, 256, 4, 1e-11).x;
        double val = value(t1);
        if (const auto& s = seed_t1[br == HybridBranch::OL ? 0 : 1];
            s.has_value()) {
            const double lo = std::max(0.0, *s - 0.05);
            const double hi = std::min(1.0, *s + 0.05);
            const auto m = num::golden_max(value, lo, hi, 1e-11);
            if (m.value > val) {
                t1 = m.x;
                val = m.value;
            }
        }
        if (val > best.profit) {
            const auto e = eval_hybrid_general(t1, 1.0, br, ctx);
            if (e.profit > best.profit) {
                best = e;
                best_br = br;
            }
        }
    }

    if (!std::isfinite(best.profit)) return std::nullopt;
    HybridSolution h;
    h.standard = {best.price_s, p.w_s,          best.k_s,
                  best.lam_s,   best.W_s,       best.lam_s * best.W_s};
    h.ondemand = {best.price_o, ctx.bill(best.k_o) / best.lam_o,
                  best.k_o,     best.lam_o,     best.W_o,
                  best.lam_o * best.W_o};
    h.profit = best.profit;
    h.branch = best_br;
    h.lambda_o_star = best.lam_o;
    h.interior = !best.pinned;
    return h;
}

} // namespace detail

// Numeric deployment solve under a generalized configuration: all three
// candidate deployments are optimized over coverage thresholds with the
// configured queue discipline, heterogeneity distributions, and quality
// ratio, and the most profitable one is selected. With the default
// configuration this reproduces the closed-form solver.
inline DeploymentSolution solve_deployment_general(const MarketParams& params,
                                                   const ExtensionConfig& cfg) {
    const MarketParams p = detail::with_config(params, cfg);
    const detail::GeneralContext ctx(p, cfg.queue_model);

    const auto S = detail::best_single_standard(ctx);
    const auto O = detail::best_single_ondemand(ctx);
    auto H = detail::best_hybrid_general(ctx);
    if (!S.feasible && !O.feasible && !H)
        throw NonConvergence("general deployment solve found no feasible "
                             "configuration at V=" + std::to_string(p.V) +
                             ", Lambda=" + std::to_string(p.Lambda) +
                             ", K=" + std::to_string(p.K));

    DeploymentSolution d;
    if (S.feasible && S.profit > 0.0) {
        d.sol_s.channel = {S.price, p.w_s, S.servers, S.lam, S.W, S.lam * S.W};
        d.sol_s.profit = S.profit;
        d.sol_s.regime = Regime::S;
        d.sol_s.branch =
            S.t >= 1.0 - 1e-9 ? Branch::FullCoverage : Branch::PartialCoverage;
    }
    if (O.feasible && O.profit > 0.0) {
        d.sol_o.channel = {O.price, ctx.bill(O.servers) / O.lam, O.servers,
                           O.lam,   O.W,                         O.lam * O.W};
        d.sol_o.profit = O.profit;
        d.sol_o.regime = Regime::O;
        d.sol_o.branch =
            O.t >= 1.0 - 1e-9 ? Branch::FullCoverage : Branch::PartialCoverage;
    }
    d.sol_h = std::move(H);
    d.pi_s = d.sol_s.profit;
    d.pi_o = d.sol_o.profit;
    d.pi_h = d.sol_h ? d.sol_h->profit : -kInf;

    if (d.sol_h && d.pi_h >= d.pi_s && d.pi_h >= d.pi_o) {
        d.pi_star = d.pi_h;
        d.regime = (d.sol_h->ondemand.lead_time > d.sol_h->standard.lead_time)
                       ? Regime::H1
                       : Regime::H2;
    } else if (d.pi_o >= d.pi_s) {
        d.pi_star = d.pi_o;
        d.regime = Regime::O;
    } else {
        d.pi_star = d.pi_s;
        d.regime = d.sol_s.branch == Branch::Shutdown ? Regime::Shutdown : Regime::S;
    }
    return d;
}

// Regime labels over a (w_s, K) grid under a generalized configuration, with
// the same structural checks as the closed-form map.
inline RegimeMap regime_map_general(const std::vector<double>& ws_grid,
                                    const std::vector<double>& K_grid,
                                    MarketParams params, const ExtensionConfig& cfg) {
    RegimeMap map;
    map.ws = ws_grid;
    map.K = K_grid;
    map.cells.resize(ws_grid.size() * K_grid.size());
    map.solutions.resize(map.cells.size());
    for (std::size_t i = 0; i < K_grid.size(); ++i) {
        for (std::size_t j = 0; j < ws_grid.size(); ++j) {
            params.K = K_grid[i];
            params.w_s = ws_grid[j];
            auto d = solve_deployment_general(params, cfg);
            map.cells[i * ws_grid.size() + j] = d.regime;
            map.solutions[i * ws_grid.size() + j] = std::move(d);
        }
    }
    detail::check_regime_pattern(map);
    return map;
}

inline RegimeMap regime_map_general(const SweepSpec& sweep, const MarketParams& params,
                                    const ExtensionConfig& cfg) {
    return regime_map_general(sweep.ws.values(), sweep.K.values(), params, cfg);
}

} // namespace gigdeploy

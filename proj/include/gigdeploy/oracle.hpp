#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

#include "gigdeploy/errors.hpp"
#include "gigdeploy/market.hpp"
#include "gigdeploy/numeric/rng.hpp"
#include "gigdeploy/numeric/special.hpp"

// Independent verification oracles. Everything here works from the raw
// transformed objectives and model_core primitives only — no code shared
// with the closed-form solvers it exists to check.
namespace gigdeploy::oracle {

struct Dim {
    double lo = 0.0;
    double hi = 1.0;
    int n = 64;
};

struct GridSpec {
    std::vector<Dim> dims;
    int refinement_rounds = 3;

    void validate(size_t arity) const {
        if (dims.size() != arity) throw DomainError("GridSpec: wrong dimension count");
        for (const auto& d : dims) {
            if (d.n < 16) throw DomainError("GridSpec: need n >= 16 per dimension");
            if (!(d.hi > d.lo)) throw DomainError("GridSpec: need hi > lo");
        }
        if (refinement_rounds < 0) throw DomainError("GridSpec: negative refinement");
    }
};

struct SingleResult {
    double profit = 0.0;   // includes the always-feasible shutdown (= 0) option
    double x1 = 0.0;       // arrival rate at the grid argmax
    double x2 = 0.0;       // second decision (lead time or queue length)
    bool shutdown = false; // grid optimum was nonpositive
    bool grid_too_coarse = false;
    std::vector<double> refinement_values; // best-so-far after each pass
};

namespace detail {

inline void note_refinement(std::vector<double>& vals, double best, bool& coarse) {
    if (!vals.empty()) {
        const double prev = vals.back();
        if (std::abs(best - prev) > 0.01 * std::max(1e-12, std::abs(prev))) coarse = true;
    }
    vals.push_back(best);
}

// 2-D grid argmax with zoom refinement. Keeps the best point ever seen, and
// zooms a +-2 cell window around each round's argmax.
template <class F>
SingleResult grid_max_2d(F&& f, GridSpec grid) {
    grid.validate(2);
    Dim d1 = grid.dims[0], d2 = grid.dims[1];
    SingleResult out;
    double best = -kInf, bx1 = d1.lo, bx2 = d2.lo;
    for (int round = 0; round <= grid.refinement_rounds; ++round) {
        const double h1 = (d1.hi - d1.lo) / (d1.n - 1);
        const double h2 = (d2.hi - d2.lo) / (d2.n - 1);
        double rbest = -kInf, rx1 = d1.lo, rx2 = d2.lo;
        for (int i = 0; i < d1.n; ++i) {
            const double x1 = d1.lo + h1 * i;
            for (int j = 0; j < d2.n; ++j) {
                const double x2 = d2.lo + h2 * j;
                const double v = f(x1, x2);
                if (v > rbest) {
                    rbest = v;
                    rx1 = x1;
                    rx2 = x2;
                }
            }
        }
        if (rbest > best) {
            best = rbest;
            bx1 = rx1;
            bx2 = rx2;
        }
        note_refinement(out.refinement_values, best, out.grid_too_coarse);
        d1 = {std::max(grid.dims[0].lo, rx1 - 2.0 * h1),
              std::min(grid.dims[0].hi, rx1 + 2.0 * h1), d1.n};
        d2 = {std::max(grid.dims[1].lo, rx2 - 2.0 * h2),
              std::min(grid.dims[1].hi, rx2 + 2.0 * h2), d2.n};
    }
    out.shutdown = best <= 0.0;
    out.profit = std::max(best, 0.0);
    out.x1 = bx1;
    out.x2 = bx2;
    return out;
}

} // namespace detail

inline GridSpec default_grid_single_s(const MarketParams& p) {
    return {{{0.0, p.Lambda, 64}, {5e-4, 1.5, 64}}, 3};
}

inline GridSpec default_grid_single_o(const MarketParams& p) {
    return {{{0.0, p.Lambda, 64}, {1e-3, 2.0 * std::sqrt(p.V * p.Lambda + 1.0), 64}}, 3};
}

inline GridSpec default_grid_hybrid(const MarketParams& p) {
    return {{{0.0, p.Lambda, 32},
             {5e-4, 1.5, 32},
             {0.0, p.Lambda, 32},
             {5e-4, 6.0, 32}},
            3};
}

// Employee-only deployment, transformed objective over (lambda_s, W_s):
//   lambda_s (V - lambda_s W_s / Lambda) - w_s/(mu_s W_s) - w_s lambda_s/mu_s.
inline SingleResult brute_force_single_s(const MarketParams& p, GridSpec grid) {
    return detail::grid_max_2d(
        [&](double lam, double W) {
            return lam * (p.V - lam * W / p.Lambda) - p.w_s / (p.mu_s * W) -
                   p.w_s * lam / p.mu_s;
        },
        std::move(grid));
}
inline SingleResult brute_force_single_s(const MarketParams& p) {
    return brute_force_single_s(p, default_grid_single_s(p));
}

// Contractor-only deployment, transformed objective over (lambda_o, L_o):
//   lambda_o (V - L_o/Lambda) - (lambda_o^2/(K mu_o^2)) (1/L_o + 1)^2.
inline SingleResult brute_force_single_o(const MarketParams& p, GridSpec grid) {
    return detail::grid_max_2d(
        [&](double lam, double L) {
            const double c = 1.0 / L + 1.0;
            return lam * (p.V - L / p.Lambda) -
                   lam * lam / (p.K * p.mu_o * p.mu_o) * c * c;
        },
        std::move(grid));
}
inline SingleResult brute_force_single_o(const MarketParams& p) {
    return brute_force_single_o(p, default_grid_single_o(p));
}

struct HybridResult {
    double profit = 0.0; // 4-D grid optimum (shutdown floor applied)
    double lambda_s = 0.0, W_s = 0.0, lambda_o = 0.0, W_o = 0.0;
    double combined_profit = 0.0; // max over hybrid grid and both single-channel oracles
    bool grid_too_coarse = false;
    std::vector<double> refinement_values;
};

// Full two-service deployment, raw objective over (lambda_s, W_s, lambda_o,
// W_o) subject to lambda_s + lambda_o <= Lambda:
//   V(ls+lo) - (ls^2 Ws + 2 ls lo min{Wo,Ws} + lo^2 Wo)/Lambda
//   - (w_s/mu_s)(1/Ws + ls) - (1/(K mu_o^2))(1/Wo + lo)^2.
inline HybridResult brute_force_hybrid(const MarketParams& p, GridSpec grid) {
    grid.validate(4);
    const auto f = [&](double ls, double Ws, double lo, double Wo) {
        if (ls + lo > p.Lambda) return -kInf;
        const double wmin = std::min(Wo, Ws);
        const double rev = p.V * (ls + lo) -
                           (ls * ls * Ws + 2.0 * ls * lo * wmin + lo * lo * Wo) / p.Lambda;
        const double cs = p.w_s / p.mu_s * (1.0 / Ws + ls);
        const double kco = 1.0 / Wo + lo;
        return rev - cs - kco * kco / (p.K * p.mu_o * p.mu_o);
    };

    std::array<Dim, 4> d{grid.dims[0], grid.dims[1], grid.dims[2], grid.dims[3]};
    HybridResult out;
    double best = -kInf;
    std::array<double, 4> bx{};
    for (int round = 0; round <= grid.refinement_rounds; ++round) {
        std::array<double, 4> h{}, rx{};
        for (int k = 0; k < 4; ++k) h[k] = (d[k].hi - d[k].lo) / (d[k].n - 1);
        double rbest = -kInf;
        for (int i0 = 0; i0 < d[0].n; ++i0) {
            const double ls = d[0].lo + h[0] * i0;
            for (int i1 = 0; i1 < d[1].n; ++i1) {
                const double Ws = d[1].lo + h[1] * i1;
                for (int i2 = 0; i2 < d[2].n; ++i2) {
                    const double lo = d[2].lo + h[2] * i2;
                    if (ls + lo > p.Lambda) break; // lambda_o grid is increasing
                    for (int i3 = 0; i3 < d[3].n; ++i3) {
                        const double Wo = d[3].lo + h[3] * i3;
                        const double v = f(ls, Ws, lo, Wo);
                        if (v > rbest) {
                            rbest = v;
                            rx = {ls, Ws, lo, Wo};
                        }
                    }
                }
            }
        }
        if (rbest > best) {
            best = rbest;
            bx = rx;
        }
        detail::note_refinement(out.refinement_values, best, out.grid_too_coarse);
        for (int k = 0; k < 4; ++k)
            d[k] = {std::max(grid.dims[k].lo, rx[k] - 2.0 * h[k]),
                    std::min(grid.dims[k].hi, rx[k] + 2.0 * h[k]), d[k].n};
    }
    out.profit = std::max(best, 0.0);
    out.lambda_s = bx[0];
    out.W_s = bx[1];
    out.lambda_o = bx[2];
    out.W_o = bx[3];
    const auto s = brute_force_single_s(p);
    const auto o = brute_force_single_o(p);
    out.combined_profit = std::max({out.profit, s.profit, o.profit});
    return out;
}
inline HybridResult brute_force_hybrid(const MarketParams& p) {
    return brute_force_hybrid(p, default_grid_hybrid(p));
}

struct SimConfig {
    long horizon_services = 100000;
    double warmup_fraction = 0.2;
    std::uint64_t seed = 1;
    int replications = 5;

    void validate() const {
        if (horizon_services < 10000) throw DomainError("SimConfig: horizon >= 1e4 required");
        if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
            throw DomainError("SimConfig: warmup_fraction in [0,1)");
        if (replications < 1) throw DomainError("SimConfig: replications >= 1");
    }
};

struct SimQueueResult {
    double mean_sojourn = 0.0;
    double ci_halfwidth = 0.0;
};

// Event-driven FCFS M/M/k simulation. Sojourn is measured arrival to
// departure. Deterministic for a fixed (seed, replications) pair: each
// replication owns the stream derived from (seed, replication index).
inline SimQueueResult simulate_queue(int servers, double mu, double lambda,
                                     const SimConfig& sim) {
    sim.validate();
    if (servers < 1 || mu <= 0.0 || lambda < 0.0)
        throw DomainError("simulate_queue: need servers >= 1, mu > 0, lambda >= 0");
    if (lambda >= servers * mu)
        throw UnstableQueue("simulate_queue: utilization at or above one");
    if (lambda == 0.0) return {1.0 / mu, 0.0};

    std::vector<double> rep_means;
    rep_means.reserve(static_cast<size_t>(sim.replications));
    const long warmup = static_cast<long>(sim.warmup_fraction * sim.horizon_services);
    for (int rep = 0; rep < sim.replications; ++rep) {
        num::RngStream rng(sim.seed, static_cast<std::uint64_t>(rep));
        // min-heap of (departure time, arrival time) for in-service customers
        using Ev = std::pair<double, double>;
        std::priority_queue<Ev, std::vector<Ev>, std::greater<>> busy;
        std::queue<double> waiting;
        double t = 0.0;
        double next_arrival = rng.exponential(lambda);
        long completed = 0;
        double sum = 0.0;
        long counted = 0;
        while (completed < sim.horizon_services) {
            if (busy.empty() || next_arrival <= busy.top().first) {
                t = next_arrival;
                if (static_cast<int>(busy.size()) < servers)
                    busy.emplace(t + rng.exponential(mu), t);
                else
                    waiting.push(t);
                next_arrival = t + rng.exponential(lambda);
            } else {
                const auto [dep, arr] = busy.top();
                busy.pop();
                t = dep;
                ++completed;
                if (completed > warmup) {
                    sum += dep - arr;
                    ++counted;
                }
                if (!waiting.empty()) {
                    const double a = waiting.front();
                    waiting.pop();
                    busy.emplace(t + rng.exponential(mu), a);
                }
            }
        }
        rep_means.push_back(sum / counted);
    }
    double mean = 0.0;
    for (double m : rep_means) mean += m;
    mean /= rep_means.size();
    double var = 0.0;
    for (double m : rep_means) var += (m - mean) * (m - mean);
    SimQueueResult out{mean, 0.0};
    if (rep_means.size() > 1) {
        var /= (rep_means.size() - 1);
        const double tcrit = num::t_critical(static_cast<int>(rep_means.size()) - 1);
        out.ci_halfwidth = tcrit * std::sqrt(var / rep_means.size());
    }
    return out;
}

// Posted policy for the market simulator.
struct MarketPolicy {
    double p_s = kInf;
    double W_s = 0.0;
    double p_o = kInf;
    double W_o = 0.0;
    double w_o = 0.0; // per-service contractor wage
    double k_s = 0.0; // employee headcount (fixed cost side)
};

struct SimMarketResult {
    double lambda_s_hat = 0.0, lambda_o_hat = 0.0, k_o_hat = 0.0, profit_hat = 0.0;
    double sigma_lambda_s = 0.0, sigma_lambda_o = 0.0, sigma_k_o = 0.0;
};

// Monte Carlo over customer types and contractor reservation rates. Shares
// and the participation count are estimated per replication; the reported
// sigmas are standard errors across replications.
inline SimMarketResult simulate_market(const MarketPolicy& pol, const MarketParams& p,
                                       const SimConfig& sim) {
    sim.validate();
    const long n = sim.horizon_services;
    std::vector<double> ls, lo, ko;
    for (int rep = 0; rep < sim.replications; ++rep) {
        num::RngStream rng(sim.seed, static_cast<std::uint64_t>(rep));
        long cs = 0, co = 0;
        for (long i = 0; i < n; ++i) {
            const double theta = p.theta_dist.quantile(rng.uniform());
            const double us = std::isinf(pol.p_s) ? -kInf : p.V - pol.p_s - theta * pol.W_s;
            const double uo =
                std::isinf(pol.p_o) ? -kInf : p.alpha * p.V - pol.p_o - theta * pol.W_o;
            if (us < 0.0 && uo < 0.0) continue;
            if (us > uo)
                ++cs;
            else if (uo > us)
                ++co;
            else if (pol.p_s <= pol.p_o)
                ++cs;
            else
                ++co;
        }
        const double lam_s = p.Lambda * static_cast<double>(cs) / n;
        const double lam_o = p.Lambda * static_cast<double>(co) / n;
        ls.push_back(lam_s);
        lo.push_back(lam_o);

        // empirical participation fixed point k = K * Fhat(lambda_o w_o / k)
        std::vector<double> r(static_cast<size_t>(n));
        for (auto& x : r) x = p.r_dist.quantile(rng.uniform());
        std::sort(r.begin(), r.end());
        const double pool = lam_o * pol.w_o;
        const auto fhat = [&](double x) {
            return static_cast<double>(std::upper_bound(r.begin(), r.end(), x) - r.begin()) / n;
        };
        double klo = 1e-12, khi = p.K;
        if (pool <= 0.0) {
            ko.push_back(0.0);
        } else {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (klo + khi);
                if (mid - p.K * fhat(pool / mid) < 0.0)
                    klo = mid;
                else
                    khi = mid;
            }
            ko.push_back(0.5 * (klo + khi));
        }
    }
    const auto mean_se = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        const double se = v.size() > 1 ? std::sqrt(var / (v.size() - 1) / v.size()) : 0.0;
        return std::pair<double, double>{m, se};
    };
    SimMarketResult out;
    std::tie(out.lambda_s_hat, out.sigma_lambda_s) = mean_se(ls);
    std::tie(out.lambda_o_hat, out.sigma_lambda_o) = mean_se(lo);
    std::tie(out.k_o_hat, out.sigma_k_o) = mean_se(ko);
    const double ps = std::isinf(pol.p_s) ? 0.0 : pol.p_s;
    const double po = std::isinf(pol.p_o) ? 0.0 : pol.p_o;
    out.profit_hat = ps * out.lambda_s_hat + po * out.lambda_o_hat -
                     p.w_s * pol.k_s - pol.w_o * out.lambda_o_hat;
    return out;
}

} // namespace gigdeploy::oracle

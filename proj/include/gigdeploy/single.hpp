#pragma once

#include <cmath>

#include "gigdeploy/errors.hpp"
#include "gigdeploy/market.hpp"
#include "gigdeploy/numeric/roots.hpp"

namespace gigdeploy {

enum class Branch { FullCoverage, PartialCoverage, Shutdown };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::FullCoverage: return "FullCoverage";
        case Branch::PartialCoverage: return "PartialCoverage";
        case Branch::Shutdown: return "Shutdown";
    }
    return "?";
}

// Cost and supply thresholds governing the single-service deployments:
//   c_bar_s — effective unit cost of all-employee coverage,
//   c_bar_o — effective unit cost of all-contractor coverage,
//   k_bar   — contractor pool size above which System O covers the market,
//   l_bar_o — System O queue length at full coverage.
struct Thresholds {
    double c_bar_s = 0.0;
    double c_bar_o = 0.0;
    double k_bar = 0.0;
    double l_bar_o = 0.0;
};

// Root of f(L) = L^3 - (2 Lambda^2/(K mu_o^2)) (1 + L): the stationary queue
// length of the contractor channel at full participation. Unique positive
// root; solved by safeguarded Newton to |f| < 1e-12 max(1, L^3).
inline double full_coverage_queue_length(double Lambda, double mu_o, double K) {
    if (Lambda <= 0.0 || mu_o <= 0.0 || K <= 0.0)
        throw DomainError("full_coverage_queue_length: need positive Lambda, mu_o, K");
    const double x = 2.0 * Lambda * Lambda / (K * mu_o * mu_o);
    const auto f = [x](double L) { return L * L * L - x * (1.0 + L); };
    const auto df = [x](double L) { return 3.0 * L * L - x; };
    double lo = std::cbrt(x); // f(cbrt x) = -x cbrt(x) < 0
    double hi = num::expand_upper([&](double L) { return f(L); }, std::max(2.0 * lo, 1.0));
    const auto r = num::newton_safeguarded(f, df, std::max(lo, 0.5 * hi), lo, hi, 1e-15, 200);
    const double L = r.x;
    if (std::abs(f(L)) > 1e-12 * std::max(1.0, L * L * L))
        throw NonConvergence("full_coverage_queue_length: residual above tolerance");
    return L;
}

inline Thresholds compute_thresholds(const MarketParams& p) {
    if (p.w_s < 0.0) throw DomainError("compute_thresholds: w_s must be >= 0");
    if (p.V <= 0.0 || p.Lambda <= 0.0 || p.mu_s <= 0.0 || p.mu_o <= 0.0 || p.K <= 0.0)
        throw DomainError("compute_thresholds: V, Lambda, mu_s, mu_o, K must be positive");
    Thresholds t;
    t.c_bar_s = p.w_s / p.mu_s + 2.0 * std::sqrt(p.w_s / (p.Lambda * p.mu_s));
    const double root = std::sqrt(p.V * p.Lambda + 1.0);
    const double L0 = root - 1.0;
    t.k_bar = 2.0 * p.Lambda * p.Lambda * root / (p.mu_o * p.mu_o * L0 * L0 * L0);
    t.l_bar_o = full_coverage_queue_length(p.Lambda, p.mu_o, p.K);
    t.c_bar_o = t.l_bar_o * (3.0 + t.l_bar_o) / (2.0 * p.Lambda);
    return t;
}

struct SingleSolution {
    ChannelState channel{};
    double profit = 0.0;
    Regime regime = Regime::Shutdown;
    Branch branch = Branch::Shutdown;
    bool degenerate = false; // w_s = 0 limit: profit approaches V*Lambda
};

// Employee-only deployment (System S). Full coverage when the service value
// covers the effective cost c_bar_s; otherwise the system shuts down.
inline SingleSolution solve_system_s(const MarketParams& p) {
    const auto t = compute_thresholds(p);
    SingleSolution out;
    out.regime = Regime::S;
    if (p.w_s == 0.0) {
        // free employees: capacity is free, lead time vanishes, profit -> V Lambda
        out.degenerate = true;
        out.branch = Branch::FullCoverage;
        out.profit = p.V * p.Lambda;
        out.channel = {p.V, 0.0, kInf, p.Lambda, 0.0, 0.0};
        return out;
    }
    if (p.V >= t.c_bar_s) {
        const double W = std::sqrt(p.w_s / (p.Lambda * p.mu_s));
        ChannelState c;
        c.price = p.V - W;
        c.wage = p.w_s;
        c.servers = p.Lambda / p.mu_s + std::sqrt(p.Lambda / (p.mu_s * p.w_s));
        c.arrival_rate = p.Lambda;
        c.lead_time = W;
        c.queue_length = p.Lambda * W;
        out.channel = c;
        out.branch = Branch::FullCoverage;
        out.profit = p.Lambda * (p.V - t.c_bar_s);
    } else {
        out.branch = Branch::Shutdown;
        out.regime = Regime::Shutdown;
        out.channel = {p.V, p.w_s, 0.0, 0.0, 0.0, 0.0};
        out.profit = 0.0;
    }
    return out;
}

// Contractor-only deployment (System O). Ample pools (K >= k_bar) cover the
// whole market; scarce pools serve the arrival mass the equilibrium supports.
inline SingleSolution solve_system_o(const MarketParams& p) {
    const auto t = compute_thresholds(p);
    SingleSolution out;
    out.regime = Regime::O;
    ChannelState c;
    const double root = std::sqrt(p.V * p.Lambda + 1.0);
    const double L0 = root - 1.0;
    if (p.K >= t.k_bar) {
        const double l = t.l_bar_o;
        c.arrival_rate = p.Lambda;
        c.queue_length = l;
        c.lead_time = l / p.Lambda;
        c.price = p.V - l / p.Lambda;
        c.servers = p.Lambda * (1.0 + l) / (p.mu_o * l);
        c.wage = l * (1.0 + l) / (2.0 * p.Lambda);
        out.branch = Branch::FullCoverage;
        out.profit = p.Lambda * (p.V - t.c_bar_o);
    } else {
        // partial coverage, proof-form arrival rate (equals (K/k_bar) Lambda)
        c.arrival_rate =
            p.K * p.mu_o * p.mu_o * L0 * L0 * L0 / (2.0 * p.Lambda * root);
        c.queue_length = L0;
        c.lead_time = L0 / c.arrival_rate;
        c.price = p.V - L0 / p.Lambda;
        c.wage = 0.5 * c.price;
        c.servers = p.K * p.Lambda * root / (t.k_bar * p.mu_o * L0);
        out.branch = Branch::PartialCoverage;
        out.profit = p.K * p.mu_o * p.mu_o * L0 * L0 * L0 * L0 / (4.0 * p.Lambda * p.Lambda);
    }
    out.channel = c;
    return out;
}

struct StaffingDecomposition {
    double mean_capacity = 0.0;
    double safety_capacity = 0.0;
};

// Split a channel's staffing into the mean workload lambda/mu and the safety
// margin above it.
inline StaffingDecomposition staffing_decomposition(const SingleSolution& sol,
                                                    const MarketParams& p) {
    if (sol.channel.arrival_rate <= 0.0)
        throw DegenerateSolution("staffing_decomposition: channel serves no demand");
    const double mu = (sol.regime == Regime::O) ? p.mu_o : p.mu_s;
    StaffingDecomposition d;
    d.mean_capacity = sol.channel.arrival_rate / mu;
    d.safety_capacity = sol.channel.servers - d.mean_capacity;
    return d;
}

} // namespace gigdeploy

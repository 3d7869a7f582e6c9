#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gigdeploy/errors.hpp"
#include "gigdeploy/numeric/special.hpp"

namespace gigdeploy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Customer-type (patience cost) or reservation-rate distribution on [0, 1].
// Uniform01 is the Beta(1,1) special case and both spellings behave
// identically; the closed-form branches in numeric/special keep the
// one-parameter edges exact.
struct Heterogeneity {
    enum class Kind { Uniform01, Beta };
    Kind kind = Kind::Uniform01;
    double a = 1.0;
    double b = 1.0;

    static Heterogeneity uniform01() { return {}; }
    static Heterogeneity beta(double a_, double b_) {
        if (a_ <= 0.0 || b_ <= 0.0) throw DomainError("Heterogeneity: shape parameters must be positive");
        return {Kind::Beta, a_, b_};
    }

    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        if (kind == Kind::Uniform01) return x;
        return num::incomplete_beta(a, b, x);
    }
    double pdf(double x) const {
        if (kind == Kind::Uniform01) return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
        return num::beta_pdf(a, b, x);
    }
    double quantile(double p) const {
        if (kind == Kind::Uniform01) return std::clamp(p, 0.0, 1.0);
        return num::beta_quantile(a, b, p);
    }
};

// Primitive market description. Customers have value V (alpha * V for the
// on-demand service), arrive at rate Lambda, and discount lead time at a
// per-hour rate theta drawn from theta_dist. K is the contractor pool size,
// w_s the employee hourly wage, mu_s / mu_o the service rates.
struct MarketParams {
    double V = 2.0;
    double Lambda = 30.0;
    double K = 50.0;
    double w_s = 0.5;
    double mu_s = 1.0;
    double mu_o = 1.0;
    Heterogeneity theta_dist{};
    Heterogeneity r_dist{};
    double alpha = 1.0;
};

// Inclusive linear grid over one parameter axis.
struct SweepAxis {
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;

    std::vector<double> values() const {
        if (n < 1 || hi < lo) throw DomainError("SweepAxis: need n >= 1 and hi >= lo");
        if (n == 1) return {lo};
        std::vector<double> v(static_cast<std::size_t>(n));
        const double h = (hi - lo) / (n - 1);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = (i == n - 1) ? hi : lo + h * i;
        return v;
    }
};

// Rectangular sweep over the employee wage and the contractor pool size.
struct SweepSpec {
    SweepAxis ws{};
    SweepAxis K{};
};

enum class Regime { S, O, H1, H2, Shutdown };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::S: return "S";
        case Regime::O: return "O";
        case Regime::H1: return "H1";
        case Regime::H2: return "H2";
        case Regime::Shutdown: return "Shutdown";
    }
    return "?";
}

// Operating state of one service channel.
struct ChannelState {
    double price = 0.0;
    double wage = 0.0;        // hourly for employees, per-service for contractors
    double servers = 0.0;     // capacity may be fractional for employees
    double arrival_rate = 0.0;
    double lead_time = 0.0;
    double queue_length = 0.0; // L = lambda * W
};

// Stationary sojourn time of the aggregated-capacity queue: k servers of
// rate mu pooled into one exponential server of rate k*mu.
inline double lead_time_mm1(double servers, double mu, double lambda) {
    if (servers < 0.0 || mu <= 0.0 || lambda < 0.0)
        throw DomainError("lead_time_mm1: need servers >= 0, mu > 0, lambda >= 0");
    const double cap = servers * mu;
    if (cap <= lambda) throw UnstableQueue("lead_time_mm1: capacity does not exceed arrival rate");
    return 1.0 / (cap - lambda);
}

// Inverse of lead_time_mm1 in the servers argument.
inline double staffing_for_lead_time(double lead_time, double mu, double lambda) {
    if (lead_time <= 0.0) throw DomainError("staffing_for_lead_time: lead time must be positive");
    if (mu <= 0.0 || lambda < 0.0)
        throw DomainError("staffing_for_lead_time: need mu > 0, lambda >= 0");
    return (1.0 / lead_time + lambda) / mu;
}

// Stationary sojourn time of an M/M/k queue with k parallel servers:
// W = 1/mu + C(k, a) / (k*mu - lambda).
inline double lead_time_mmk(int k, double mu, double lambda) {
    if (k < 1 || mu <= 0.0 || lambda < 0.0)
        throw DomainError("lead_time_mmk: need k >= 1, mu > 0, lambda >= 0");
    if (lambda == 0.0) return 1.0 / mu;
    const double a = lambda / mu;
    if (a >= k) throw UnstableQueue("lead_time_mmk: utilization at or above one");
    return 1.0 / mu + num::erlang_c(k, a) / (k * mu - lambda);
}

// Equilibrium contractor participation: the k_o in (0, K] with
// k_o = K * F_r(lambda_o * w_o / k_o), i.e. everyone whose reservation rate
// is below the equilibrium hourly earnings works. Returns 0 when the
// earnings pool lambda_o * w_o is zero (no participation).
inline double contractor_equilibrium(double lambda_o, double w_o, double K,
                                     const Heterogeneity& r_dist) {
    if (lambda_o < 0.0 || w_o < 0.0 || K <= 0.0)
        throw DomainError("contractor_equilibrium: need lambda_o, w_o >= 0 and K > 0");
    const double pool = lambda_o * w_o;
    if (pool == 0.0) return 0.0;
    if (r_dist.kind == Heterogeneity::Kind::Uniform01) {
        if (pool >= K) return K; // every contractor's earnings clear their rate
        return std::sqrt(pool * K);
    }
    // g(k) = k - K F_r(pool / k) is increasing with g(0+) < 0 <= g(K)
    double lo = 1e-12, hi = K;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid - K * r_dist.cdf(pool / mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// One channel's winning customer set; always an interval of theta types
// because utilities are linear in theta.
struct ThetaInterval {
    double lo = 0.0;
    double hi = -1.0; // empty unless hi >= lo
    bool empty() const { return hi < lo; }
};

struct DemandSplit {
    double lambda_s = 0.0;
    double lambda_o = 0.0;
    ThetaInterval interval_s{};
    ThetaInterval interval_o{};
};

// Split the market between the two channels given posted prices and lead
// times. A customer of type theta compares U_s = V - p_s - theta W_s and
// U_o = alpha V - p_o - theta W_o against each other and against leaving
// (utility 0). An absent channel is encoded as price = +infinity. Utility
// ties go to the cheaper channel, and to the standard channel at equal
// prices.
inline DemandSplit demand_split(double p_s, double W_s, double p_o, double W_o,
                                const MarketParams& params) {
    if (W_s < 0.0 || W_o < 0.0) throw DomainError("demand_split: lead times must be >= 0");
    const double a_s = std::isinf(p_s) ? -kInf : params.V - p_s;
    const double a_o = std::isinf(p_o) ? -kInf : params.alpha * params.V - p_o;

    // participation interval of channel (intercept a, slope W): {U >= 0}
    const auto participation = [](double a, double W) -> ThetaInterval {
        if (a < 0.0) return {};
        if (W == 0.0) return {0.0, 1.0};
        return {0.0, std::min(1.0, a / W)};
    };
    ThetaInterval part_s = participation(a_s, W_s);
    ThetaInterval part_o = participation(a_o, W_o);

    // preference: U_s - U_o = (a_s - a_o) - theta (W_s - W_o)
    ThetaInterval pref_s{0.0, 1.0}, pref_o{0.0, 1.0};
    const double da = a_s - a_o;
    const double dW = W_s - W_o;
    if (dW == 0.0) {
        const bool s_wins = da > 0.0 || (da == 0.0 && p_s <= p_o);
        if (s_wins)
            pref_o = {};
        else
            pref_s = {};
    } else {
        const double cross = da / dW;
        if (dW > 0.0) { // standard preferred below the crossing
            pref_s = {0.0, std::min(1.0, cross)};
            pref_o = {std::max(0.0, cross), 1.0};
        } else {
            pref_s = {std::max(0.0, cross), 1.0};
            pref_o = {0.0, std::min(1.0, cross)};
        }
    }

    const auto intersect = [](ThetaInterval x, ThetaInterval y) -> ThetaInterval {
        if (x.empty() || y.empty()) return {};
        ThetaInterval z{std::max(x.lo, y.lo), std::min(x.hi, y.hi)};
        if (z.empty()) return {};
        return z;
    };
    DemandSplit out;
    out.interval_s = intersect(part_s, pref_s);
    out.interval_o = intersect(part_o, pref_o);

    const auto mass = [&](const ThetaInterval& iv) {
        if (iv.empty()) return 0.0;
        return params.Lambda *
               (params.theta_dist.cdf(iv.hi) - params.theta_dist.cdf(iv.lo));
    };
    out.lambda_s = mass(out.interval_s);
    out.lambda_o = mass(out.interval_o);
    return out;
}

} // namespace gigdeploy

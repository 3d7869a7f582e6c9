#include "catch_amalgamated.hpp"

#include "gigdeploy/extensions.hpp"
#include "gigdeploy/numeric/integrate.hpp"
#include "gigdeploy/numeric/rng.hpp"

#include <algorithm>
#include <vector>

using namespace gigdeploy;
using Catch::Approx;

namespace {

MarketParams base(double K = 50.0, double ws = 0.5) {
    MarketParams p;
    p.V = 2.0;
    p.Lambda = 30.0;
    p.K = K;
    p.w_s = ws;
    return p;
}

bool dual(Regime r) { return r == Regime::H1 || r == Regime::H2; }

int stage(Regime r) {
    switch (r) {
        case Regime::S: return 0;
        case Regime::H1:
        case Regime::H2: return 1;
        default: return 2;
    }
}

struct AuditChannel {
    bool on = false;
    double price = 0, wage = 0, servers = 0, lam = 0, W = 0;
};

struct Audit {
    double pi = 0, lw = 0, cs = 0, sw_direct = 0;
    double flow_err = 0; // worst |argmax flow - reported flow|
};

// Re-derives the welfare accounts from first principles: social value is
// integrated over each customer's utility-maximizing choice and the labor
// pool's reservation mass, then compared against profit + labor welfare +
// consumer surplus computed from the posted transfers. The two agree only
// when prices, leads, and flows are mutually consistent.
Audit audit_welfare(const DeploymentSolution& d, const MarketParams& p,
                    const ExtensionConfig& cfg) {
    AuditChannel s, o;
    if (d.regime == Regime::S) {
        const auto& c = d.sol_s.channel;
        s = {true, c.price, c.wage, c.servers, c.arrival_rate, c.lead_time};
    } else if (d.regime == Regime::O) {
        const auto& c = d.sol_o.channel;
        o = {true, c.price, c.wage, c.servers, c.arrival_rate, c.lead_time};
    } else {
        const auto& h = *d.sol_h;
        s = {true,          h.standard.price,        h.standard.wage,
             h.standard.servers, h.standard.arrival_rate, h.standard.lead_time};
        o = {true,          h.ondemand.price,        h.ondemand.wage,
             h.ondemand.servers, h.ondemand.arrival_rate, h.ondemand.lead_time};
    }
    const double V = p.V, alpha = cfg.alpha;
    const auto& Ft = cfg.theta_dist;
    const auto& Fr = cfg.r_dist;
    const auto Us = [&](double th) {
        return s.on ? V - s.price - th * s.W : -kInf;
    };
    const auto Uo = [&](double th) {
        return o.on ? alpha * V - o.price - th * o.W : -kInf;
    };

    std::vector<double> bp{0.0, 1.0};
    const auto push = [&](double x) {
        if (x > 0.0 && x < 1.0) bp.push_back(x);
    };
    if (s.on && s.W > 0.0) push((V - s.price) / s.W);
    if (o.on && o.W > 0.0) push((alpha * V - o.price) / o.W);
    if (s.on && o.on && s.W != o.W)
        push(((alpha - 1.0) * V - o.price + s.price) / (o.W - s.W));
    std::sort(bp.begin(), bp.end());

    Audit a;
    double flow_s = 0.0, flow_o = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        const double lo = bp[i], hi = bp[i + 1];
        if (hi - lo < 1e-14) continue;
        a.cs += num::adaptive_simpson(
            [&](double th) {
                return std::max({0.0, Us(th), Uo(th)}) * Ft.pdf(th);
            },
            lo, hi, 1e-11);
        const double mid = 0.5 * (lo + hi);
        const double us = Us(mid), uo = Uo(mid);
        if (us >= uo && us >= 0.0) {
            a.sw_direct += num::adaptive_simpson(
                [&](double th) { return (V - th * s.W) * Ft.pdf(th); }, lo, hi,
                1e-11);
            flow_s += Ft.cdf(hi) - Ft.cdf(lo);
        } else if (uo > us && uo >= 0.0) {
            a.sw_direct += num::adaptive_simpson(
                [&](double th) { return (alpha * V - th * o.W) * Ft.pdf(th); },
                lo, hi, 1e-11);
            flow_o += Ft.cdf(hi) - Ft.cdf(lo);
        }
    }
    a.cs *= p.Lambda;
    a.sw_direct *= p.Lambda;

    const auto reservation_mass = [&](double x) {
        const double hi = std::min(x, 1.0);
        if (hi <= 0.0) return 0.0;
        return num::adaptive_simpson([&](double r) { return r * Fr.pdf(r); },
                                     0.0, hi, 1e-12);
    };
    if (s.on) {
        const double rm = reservation_mass(p.w_s);
        a.lw += s.servers * (p.w_s - rm);
        a.sw_direct -= s.servers * rm;
    }
    if (o.on) {
        const double e = o.servers > 0.0 ? o.lam * o.wage / o.servers : 0.0;
        const double rm = reservation_mass(e);
        a.lw += p.K * (e * Fr.cdf(std::min(e, 1.0)) - rm);
        a.sw_direct -= p.K * rm;
    }
    a.pi = d.pi_star;
    a.flow_err = std::max(std::abs(p.Lambda * flow_s - (s.on ? s.lam : 0.0)),
                          std::abs(p.Lambda * flow_o - (o.on ? o.lam : 0.0)));
    return a;
}

} // namespace

TEST_CASE("general deployment solver reproduces the closed-form solver at defaults") {
    const ExtensionConfig cfg; // MM1, uniform tastes and reservations, alpha 1

    { // named point: every reported quantity, not just the maximum
        const auto g = solve_deployment_general(base(), cfg);
        const auto b = solve_deployment(base());
        REQUIRE(g.regime == b.regime);
        CHECK(g.pi_star == Approx(b.pi_star).epsilon(1e-12));
        CHECK(g.sol_s.profit == Approx(b.sol_s.profit).epsilon(1e-9));
        CHECK(g.sol_o.profit == Approx(b.sol_o.profit).epsilon(1e-9));
        REQUIRE(g.sol_h.has_value());
        REQUIRE(b.sol_h.has_value());
        CHECK(g.sol_h->branch == b.sol_h->branch);
        CHECK(g.sol_h->standard.price ==
              Approx(b.sol_h->standard.price).epsilon(1e-7));
        CHECK(g.sol_h->ondemand.price ==
              Approx(b.sol_h->ondemand.price).epsilon(1e-7));
        CHECK(g.sol_h->standard.lead_time ==
              Approx(b.sol_h->standard.lead_time).epsilon(1e-6));
        CHECK(g.sol_h->ondemand.lead_time ==
              Approx(b.sol_h->ondemand.lead_time).epsilon(1e-6));
        CHECK(g.sol_h->lambda_o_star ==
              Approx(b.sol_h->lambda_o_star).epsilon(1e-6));
    }

    num::RngStream rng(801, 0);
    for (int i = 0; i < 25; ++i) {
        MarketParams p;
        p.V = rng.uniform(1.7, 2.5);
        p.Lambda = rng.uniform(25.0, 35.0);
        p.w_s = rng.uniform(0.02, 1.0);
        p.K = rng.uniform(10.0, 100.0);
        CAPTURE(p.V, p.Lambda, p.w_s, p.K);
        const auto g = solve_deployment_general(p, cfg);
        const auto b = solve_deployment(p);
        CHECK(g.regime == b.regime);
        CHECK(std::abs(g.pi_star - b.pi_star) / std::max(1.0, b.pi_star) <
              1e-9);
        CHECK(std::abs(g.sol_s.profit - b.sol_s.profit) /
                  std::max(1.0, std::abs(b.sol_s.profit)) <
              1e-7);
        CHECK(std::abs(g.sol_o.profit - b.sol_o.profit) /
                  std::max(1.0, std::abs(b.sol_o.profit)) <
              1e-7);
    }
}

TEST_CASE("concentrated waiting sensitivity collapses deployment to one channel") {
    ExtensionConfig cfg;
    cfg.theta_dist = Heterogeneity::beta(1.0, 40.0);

    // when nearly all customers are insensitive to waiting, one channel
    // captures the market and the dual deployment loses its niche entirely
    int dual_base = 0, dual_beta = 0;
    Regime prev = Regime::S;
    bool switched = false;
    double last_pi_s = kInf;
    for (int i = 1; i <= 10; ++i) {
        auto p = base(50.0, 0.1 * i);
        const auto b = solve_deployment(p);
        const auto g = solve_deployment_general(p, cfg);
        CAPTURE(p.w_s);
        dual_base += dual(b.regime);
        dual_beta += dual(g.regime);
        CHECK((g.regime == Regime::S || g.regime == Regime::O));
        // employee-only value decays with the wage; the single switch S -> O
        CHECK(g.sol_s.profit < last_pi_s);
        last_pi_s = g.sol_s.profit;
        if (g.regime == Regime::O) switched = true;
        if (switched) CHECK(g.regime == Regime::O);
        prev = g.regime;
        (void)prev;
    }
    CHECK(dual_base == 10); // the uniform model runs both channels throughout
    CHECK(dual_beta == 0);  // the concentrated model never does

    { // frozen anchor values along the row
        const auto lo = solve_deployment_general(base(50.0, 0.2), cfg);
        CHECK(lo.regime == Regime::S);
        CHECK(lo.pi_star == Approx(52.04039570).epsilon(1e-6));
        CHECK(lo.sol_s.channel.arrival_rate == Approx(29.91966963).epsilon(1e-6));
        CHECK(lo.sol_s.branch == Branch::PartialCoverage);
        const auto hi = solve_deployment_general(base(50.0, 1.0), cfg);
        CHECK(hi.regime == Regime::O);
        CHECK(hi.pi_star == Approx(37.87864601).epsilon(1e-6));
        // the contractor-only candidate never references the employee wage
        const auto mid = solve_deployment_general(base(50.0, 0.7), cfg);
        CHECK(mid.sol_o.profit == Approx(hi.sol_o.profit).epsilon(1e-10));
    }
}

TEST_CASE("a quality premium shifts the value of adding each channel") {
    for (double ws : {0.3, 0.5, 0.7}) {
        const auto p = base(50.0, ws);
        ExtensionConfig flat, premium;
        premium.alpha = 1.1;
        const auto a = solve_deployment_general(p, flat);
        const auto b = solve_deployment_general(p, premium);
        CAPTURE(ws);
        REQUIRE(dual(a.regime)); // evaluated at dual-deployment points

        const double do_flat = 1.0 - a.sol_s.profit / a.pi_star;
        const double ds_flat = 1.0 - a.sol_o.profit / a.pi_star;
        const double do_prem = 1.0 - b.sol_s.profit / b.pi_star;
        const double ds_prem = 1.0 - b.sol_o.profit / b.pi_star;
        CHECK(do_prem >= do_flat - 1e-12); // premium channel more valuable
        CHECK(ds_prem <= ds_flat + 1e-12); // baseline channel less valuable

        // a premium on the fully-covering contractor candidate is pure
        // price shift: profit moves by exactly Lambda * (alpha - 1) * V
        CHECK(b.sol_o.profit - a.sol_o.profit ==
              Approx(p.Lambda * 0.1 * p.V).epsilon(1e-7));
    }
    { // frozen values at the default point
        ExtensionConfig premium;
        premium.alpha = 1.1;
        const auto d = solve_deployment_general(base(), premium);
        CHECK(d.regime == Regime::H1);
        CHECK(d.pi_star == Approx(40.24911537).epsilon(1e-6));
    }
}

TEST_CASE("integer staffing solver is exact at the default market") {
    ExtensionConfig cfg;
    cfg.queue_model = QueueModel::MMk;
    const auto d = solve_deployment_general(base(), cfg);

    CHECK(d.regime == Regime::O);
    CHECK(d.pi_star == Approx(15.18442178).epsilon(1e-6));
    CHECK(d.sol_o.channel.servers == Approx(19.0).margin(1e-9));
    CHECK(d.sol_o.channel.arrival_rate == Approx(16.02775392).epsilon(1e-6));
    CHECK(d.sol_o.channel.lead_time == Approx(1.12707317).epsilon(1e-6));
    CHECK(d.sol_o.channel.wage == Approx(0.45046861).epsilon(1e-6));
    CHECK(d.sol_s.profit == Approx(13.70374215).epsilon(1e-6));
    CHECK(d.sol_s.channel.servers == Approx(25.0).margin(1e-9));

    // exhaustive check: every admissible integer staffing level with a fine
    // coverage grid never beats the reported single-channel optima
    const auto p = base();
    double brute_o = -kInf, brute_s = -kInf;
    for (int k = 1; k <= 50; ++k) {
        for (int it = 1; it < 1200; ++it) {
            const double t = it / 1200.0;
            const double lam = p.Lambda * t;
            if (lam < k * p.mu_o - 1e-9) {
                const double W = lead_time_mmk(k, p.mu_o, lam);
                const double bill = static_cast<double>(k) * k / p.K;
                brute_o = std::max(brute_o, lam * (p.V - t * W) - bill);
            }
            if (lam < k * p.mu_s - 1e-9) {
                const double W = lead_time_mmk(k, p.mu_s, lam);
                brute_s = std::max(brute_s, lam * (p.V - t * W) - p.w_s * k);
            }
        }
    }
    CHECK(d.sol_o.profit >= brute_o - 1e-9);
    CHECK(d.sol_s.profit >= brute_s - 1e-9);
    CHECK(d.sol_o.profit == Approx(brute_o).epsilon(1e-5));
    CHECK(d.sol_s.profit == Approx(brute_s).epsilon(1e-5));
}

TEST_CASE("integer-staffing regime map keeps three contiguous monotone bands") {
    SweepSpec sw;
    sw.ws = {0.02, 1.0, 48};
    sw.K = {10.0, 100.0, 48};
    ExtensionConfig cfg;
    cfg.queue_model = QueueModel::MMk;

    // construction itself enforces contiguous bands per row and monotone
    // stage boundaries; a violation would throw
    const auto map = regime_map_general(sw, base(), cfg);

    int n_s = 0, n_h = 0, n_o = 0;
    for (const Regime r : map.cells) {
        n_s += r == Regime::S;
        n_h += dual(r);
        n_o += r == Regime::O;
    }
    CHECK(n_s + n_h + n_o == 48 * 48); // nothing shuts down on this box
    CHECK(n_s > 0);
    CHECK(n_h > 0);
    CHECK(n_o > 0);

    // band boundaries move weakly left as the contractor pool grows, up to
    // one grid cell of slack
    int prev_first_active = 48, prev_first_o = 48;
    for (std::size_t ki = 0; ki < map.K.size(); ++ki) {
        int first_active = 48, first_o = 48;
        for (int wi = 0; wi < 48; ++wi) {
            const int st = stage(map.at(ki, wi));
            if (st >= 1 && first_active == 48) first_active = wi;
            if (st == 2 && first_o == 48) first_o = wi;
        }
        if (ki > 0) {
            CHECK(first_active <= prev_first_active + 1);
            CHECK(first_o <= prev_first_o + 1);
        }
        prev_first_active = first_active;
        prev_first_o = first_o;
    }

    // integer staffing is reported as integers across the sampled solutions
    for (std::size_t ki = 0; ki < map.K.size(); ki += 9) {
        for (std::size_t wi = 0; wi < map.ws.size(); wi += 5) {
            const auto& d = map.solutions[ki * map.ws.size() + wi];
            const auto near_int = [](double x) {
                return std::abs(x - std::round(x)) < 1e-9;
            };
            if (d.regime == Regime::S)
                CHECK(near_int(d.sol_s.channel.servers));
            else if (d.regime == Regime::O)
                CHECK(near_int(d.sol_o.channel.servers));
            else if (d.sol_h) {
                CHECK(near_int(d.sol_h->standard.servers));
                CHECK(near_int(d.sol_h->ondemand.servers));
            }
        }
    }
}

TEST_CASE("integer staffing narrows the dual-channel wage band") {
    ExtensionConfig mm1, mmk;
    mmk.queue_model = QueueModel::MMk;
    for (double K : {50.0, 92.0}) {
        double last_mm1 = 0.0, last_mmk = 0.0;
        for (double ws = 0.05; ws <= 1.2001; ws += 0.05) {
            auto p = base(K, ws);
            if (dual(solve_deployment_general(p, mm1).regime)) last_mm1 = ws;
            if (dual(solve_deployment_general(p, mmk).regime)) last_mmk = ws;
        }
        CAPTURE(K);
        CHECK(last_mm1 > 0.0); // the continuous model runs dual somewhere
        CHECK(last_mmk <= last_mm1);
    }
    // at the default pool the integer model abandons dual deployment
    CHECK_FALSE(dual(
        solve_deployment_general(base(), mmk).regime));
}

TEST_CASE("beta(1,1) heterogeneity reproduces the uniform classification") {
    SweepSpec sw;
    sw.ws = {0.3, 1.2, 8};
    sw.K = {20.0, 100.0, 8};
    ExtensionConfig uniform, flat_beta;
    flat_beta.theta_dist = Heterogeneity::beta(1.0, 1.0);
    flat_beta.r_dist = Heterogeneity::beta(1.0, 1.0);
    const auto a = regime_map_general(sw, base(), uniform);
    const auto b = regime_map_general(sw, base(), flat_beta);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i] == b.cells[i]);
}

TEST_CASE("integer staffing only reduces attainable profit") {
    ExtensionConfig mm1, mmk;
    mmk.queue_model = QueueModel::MMk;
    const double expect_mm1[] = {38.539127, 166.414390, 691.437573};
    const double expect_mmk[] = {15.184422, 61.157555, 257.324963};
    const double lambdas[] = {30.0, 120.0, 480.0};
    for (int i = 0; i < 3; ++i) {
        auto p = base();
        p.Lambda = lambdas[i];
        const auto a = solve_deployment_general(p, mm1);
        const auto b = solve_deployment_general(p, mmk);
        CAPTURE(p.Lambda);
        CHECK(b.pi_star < a.pi_star);
        CHECK(a.pi_star == Approx(expect_mm1[i]).epsilon(1e-4));
        CHECK(b.pi_star == Approx(expect_mmk[i]).epsilon(1e-4));
        // the loss is bounded: the integer model keeps at least ~a third
        // of the continuous profit throughout the tested range
        CHECK((a.pi_star - b.pi_star) / a.pi_star < 0.7);
    }
}

TEST_CASE("welfare accounts balance under every configuration") {
    struct Case {
        const char* name;
        MarketParams p;
        ExtensionConfig cfg;
    };
    std::vector<Case> cases;
    cases.push_back({"continuous uniform dual", base(), {}});
    {
        ExtensionConfig c;
        c.theta_dist = Heterogeneity::beta(1.0, 40.0);
        cases.push_back({"concentrated tastes", base(), c});
    }
    {
        ExtensionConfig c;
        c.theta_dist = Heterogeneity::beta(2.0, 2.0);
        c.r_dist = Heterogeneity::beta(2.0, 2.0);
        cases.push_back({"humped tastes and reservations", base(), c});
    }
    {
        ExtensionConfig c;
        c.alpha = 1.1;
        cases.push_back({"quality premium", base(), c});
    }
    {
        ExtensionConfig c;
        c.queue_model = QueueModel::MMk;
        cases.push_back({"integer staffing", base(), c});
    }
    {
        ExtensionConfig c;
        c.queue_model = QueueModel::MMk;
        c.theta_dist = Heterogeneity::beta(2.0, 2.0);
        c.alpha = 1.1;
        cases.push_back({"integer staffing with premium", base(90.0, 0.3), c});
    }
    for (const auto& tc : cases) {
        CAPTURE(tc.name);
        const auto d = solve_deployment_general(tc.p, tc.cfg);
        const auto a = audit_welfare(d, tc.p, tc.cfg);
        CHECK(std::abs(a.sw_direct - (a.pi + a.lw + a.cs)) /
                  std::max(1.0, std::abs(a.sw_direct)) <
              1e-6);
        CHECK(a.flow_err < 1e-4);
    }
}

TEST_CASE("extension configuration validation") {
    ExtensionConfig bad;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(solve_deployment_general(base(), bad), DomainError);
    bad.alpha = -0.5;
    CHECK_THROWS_AS(solve_deployment_general(base(), bad), DomainError);
}

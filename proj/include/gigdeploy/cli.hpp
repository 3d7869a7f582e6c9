#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gigdeploy/analysis.hpp"
#include "gigdeploy/extensions.hpp"
#include "gigdeploy/io.hpp"
#include "gigdeploy/oracle.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace gigdeploy::cli {

enum class OutputFormat { CSV, JSON };

// Everything a command needs: market parameters, the model variant, the
// grid to sweep, and where/how to put the result.
struct RunConfig {
    MarketParams params{};
    ExtensionConfig extension{};
    std::optional<SweepSpec> sweep{};
    std::string output_path{};
    OutputFormat format = OutputFormat::CSV;
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct CliRequest {
    std::string command;
    std::string figure; // reproduce only
    RunConfig config;
};

// Raised by parse_cli when the user asked for usage text rather than a run.
struct HelpRequested {
    std::string text;
};

namespace detail {

inline bool is_base_model(const ExtensionConfig& e) {
    return e.queue_model == QueueModel::MM1 && e.alpha == 1.0 &&
           e.theta_dist.kind == Heterogeneity::Kind::Uniform01 &&
           e.r_dist.kind == Heterogeneity::Kind::Uniform01;
}

inline std::string describe(const Heterogeneity& h) {
    if (h.kind == Heterogeneity::Kind::Uniform01) return "uniform";
    return "beta:" + io::g17(h.a) + "," + io::g17(h.b);
}

inline Heterogeneity parse_dist(const std::string& text) {
    if (text == "uniform") return Heterogeneity::uniform01();
    if (text.rfind("beta:", 0) == 0) {
        const auto body = text.substr(5);
        const auto comma = body.find(',');
        if (comma != std::string::npos) {
            std::size_t ea = 0, eb = 0;
            const double a = std::stod(body.substr(0, comma), &ea);
            const double b = std::stod(body.substr(comma + 1), &eb);
            if (ea == comma && eb == body.size() - comma - 1)
                return Heterogeneity::beta(a, b);
        }
    }
    throw DomainError("distribution must be 'uniform' or 'beta:a,b', got '" +
                      text + "'");
}

inline void parse_sweep_axis(const std::string& text, SweepSpec& spec) {
    std::vector<std::string> parts;
    std::size_t from = 0;
    while (true) {
        const auto colon = text.find(':', from);
        parts.push_back(text.substr(from, colon - from));
        if (colon == std::string::npos) break;
        from = colon + 1;
    }
    if (parts.size() == 4) {
        try {
            SweepAxis ax;
            ax.lo = std::stod(parts[1]);
            ax.hi = std::stod(parts[2]);
            ax.n = std::stoi(parts[3]);
            if (parts[0] == "ws") {
                spec.ws = ax;
                return;
            }
            if (parts[0] == "K") {
                spec.K = ax;
                return;
            }
        } catch (const std::logic_error&) {
            // falls through to the shared diagnostic
        }
    }
    throw DomainError("sweep must look like 'ws:0.05:1.0:64' or 'K:10:100:64', got '" +
                      text + "'");
}

// Runs f(0..n-1) on a pool of the requested size; results must be written
// to index-addressed slots so the caller's output order is deterministic.
template <class F>
void parallel_for(int n, int jobs, F&& f) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    f(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline MarketParams effective_params(const RunConfig& cfg) {
    MarketParams p = cfg.params;
    p.theta_dist = cfg.extension.theta_dist;
    p.r_dist = cfg.extension.r_dist;
    p.alpha = cfg.extension.alpha;
    return p;
}

inline DeploymentSolution solve_point(const MarketParams& p, const RunConfig& cfg) {
    if (is_base_model(cfg.extension)) return solve_deployment(p);
    return solve_deployment_general(p, cfg.extension);
}

inline nlohmann::json channel_json(const ChannelState& c) {
    return {{"price", c.price},           {"wage", c.wage},
            {"servers", c.servers},       {"arrival_rate", c.arrival_rate},
            {"lead_time", c.lead_time},   {"queue_length", c.queue_length}};
}

inline std::vector<std::string> map_row(double ws, double K,
                                        const DeploymentSolution& d) {
    return {io::g17(ws),       io::g17(K),        to_string(d.regime),
            io::g17(d.pi_s),   io::g17(d.pi_o),   io::g17(d.pi_h),
            io::g17(d.pi_star)};
}

// Solves every cell of the sweep (in parallel) and re-validates the banded
// regime layout, exactly as the serial classifiers do.
inline RegimeMap build_map(const SweepSpec& sweep, const RunConfig& cfg) {
    const MarketParams p = effective_params(cfg);
    RegimeMap map;
    map.ws = sweep.ws.values();
    map.K = sweep.K.values();
    const int n = static_cast<int>(map.ws.size() * map.K.size());
    map.cells.resize(static_cast<std::size_t>(n));
    map.solutions.resize(static_cast<std::size_t>(n));
    parallel_for(n, cfg.jobs, [&](int idx) {
        const std::size_t i = static_cast<std::size_t>(idx) / map.ws.size();
        const std::size_t j = static_cast<std::size_t>(idx) % map.ws.size();
        MarketParams q = p;
        q.K = map.K[i];
        q.w_s = map.ws[j];
        const auto d = solve_point(q, cfg);
        map.cells[static_cast<std::size_t>(idx)] = d.regime;
        map.solutions[static_cast<std::size_t>(idx)] = d;
    });
    gigdeploy::detail::check_regime_pattern(map);
    return map;
}

struct ValidationRow {
    std::string name;
    double observed = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline void print_validation_table(const std::vector<ValidationRow>& rows,
                                   std::ostream& out) {
    out << "check                                     observed      tolerance     verdict\n";
    for (const auto& r : rows) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-41s %-13.6g %-13.6g %s",
                      r.name.c_str(), r.observed, r.tolerance,
                      r.pass ? "PASS" : "FAIL");
        out << buf << '\n';
    }
}

} // namespace detail

// Single deployment solve, reported as JSON (format=json) or an aligned
// key/value table. Exit 0 on success.
inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    const MarketParams p = detail::effective_params(cfg);
    const auto d = detail::solve_point(p, cfg);
    const bool base = detail::is_base_model(cfg.extension);
    WelfareReport w{};
    if (base) w = deployment_welfare(d, p);

    if (cfg.format == OutputFormat::JSON) {
        nlohmann::json j;
        j["params"] = {{"V", p.V},
                       {"Lambda", p.Lambda},
                       {"K", p.K},
                       {"ws", p.w_s},
                       {"mu_s", p.mu_s},
                       {"mu_o", p.mu_o},
                       {"alpha", cfg.extension.alpha},
                       {"queue_model", to_string(cfg.extension.queue_model)},
                       {"theta_dist", detail::describe(cfg.extension.theta_dist)},
                       {"r_dist", detail::describe(cfg.extension.r_dist)}};
        j["regime"] = to_string(d.regime);
        j["profit"] = {{"star", d.pi_star},
                       {"standard_only", d.pi_s},
                       {"ondemand_only", d.pi_o},
                       {"dual", d.pi_h}};
        if (d.regime == Regime::S)
            j["channels"]["standard"] = detail::channel_json(d.sol_s.channel);
        else if (d.regime == Regime::O)
            j["channels"]["ondemand"] = detail::channel_json(d.sol_o.channel);
        else if (d.sol_h) {
            j["channels"]["standard"] = detail::channel_json(d.sol_h->standard);
            j["channels"]["ondemand"] = detail::channel_json(d.sol_h->ondemand);
        }
        if (base)
            j["welfare"] = {{"consumer_surplus", w.cs},
                            {"labor_welfare", w.lw},
                            {"social_welfare", w.sw}};
        out << j.dump(2) << '\n';
        return 0;
    }

    const auto line = [&](const char* key, const std::string& val) {
        std::string k(key);
        k.resize(20, ' ');
        out << k << val << '\n';
    };
    line("regime", to_string(d.regime));
    line("pi_star", io::g17(d.pi_star));
    line("pi_standard", io::g17(d.pi_s));
    line("pi_ondemand", io::g17(d.pi_o));
    line("pi_dual", io::g17(d.pi_h));
    const auto channel = [&](const char* tag, const ChannelState& c) {
        line((std::string(tag) + ".price").c_str(), io::g17(c.price));
        line((std::string(tag) + ".wage").c_str(), io::g17(c.wage));
        line((std::string(tag) + ".servers").c_str(), io::g17(c.servers));
        line((std::string(tag) + ".arrivals").c_str(), io::g17(c.arrival_rate));
        line((std::string(tag) + ".lead_time").c_str(), io::g17(c.lead_time));
    };
    if (d.regime == Regime::S) channel("standard", d.sol_s.channel);
    if (d.regime == Regime::O) channel("ondemand", d.sol_o.channel);
    if ((d.regime == Regime::H1 || d.regime == Regime::H2) && d.sol_h) {
        channel("standard", d.sol_h->standard);
        channel("ondemand", d.sol_h->ondemand);
    }
    if (base) {
        line("consumer_surplus", io::g17(w.cs));
        line("labor_welfare", io::g17(w.lw));
        line("social_welfare", io::g17(w.sw));
    }
    return 0;
}

// Regime classification over a (w_s, K) grid, one CSV row per cell in grid
// order (K outer, w_s inner).
inline int cmd_regime_map(const RunConfig& cfg, std::ostream& out) {
    SweepSpec sweep = cfg.sweep.value_or(SweepSpec{{0.02, 1.0, 64}, {10.0, 100.0, 64}});
    const auto map = detail::build_map(sweep, cfg);
    io::Table t;
    t.header = {"ws", "K", "regime", "pi_s", "pi_o", "pi_h", "pi_star"};
    t.rows.reserve(map.cells.size());
    for (std::size_t i = 0; i < map.K.size(); ++i)
        for (std::size_t j = 0; j < map.ws.size(); ++j)
            t.rows.push_back(detail::map_row(
                map.ws[j], map.K[i], map.solutions[i * map.ws.size() + j]));
    io::write_table(t, cfg.output_path, out);
    return 0;
}

// One-axis sweep of the proliferation report: profit ratio, the value of
// adding each channel (profit and welfare versions), and the six pool-size
// threshold curves (inf where undefined).
inline int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    if (!detail::is_base_model(cfg.extension))
        throw DomainError("sweep reports are defined for the default model configuration");
    SweepSpec spec = cfg.sweep.value_or(SweepSpec{{0.05, 1.0, 64}, {0.0, 0.0, 1}});
    const bool sweep_ws = spec.ws.n >= 2;
    const bool sweep_K = spec.K.n >= 2;
    if (sweep_ws == sweep_K)
        throw DomainError("sweep needs exactly one axis with n >= 2");
    const auto axis = sweep_ws ? spec.ws.values() : spec.K.values();
    const int n = static_cast<int>(axis.size());

    io::Table t;
    t.header = {sweep_ws ? "ws" : "K",
                "R",
                "delta_o",
                "delta_s",
                "delta_o_cs",
                "delta_s_cs",
                "delta_o_lw",
                "delta_s_lw",
                "delta_o_sw",
                "delta_s_sw",
                "k_F",
                "k_S",
                "k_L_lo",
                "k_L_hi",
                "k_C_lo",
                "k_C_hi"};
    t.rows.resize(static_cast<std::size_t>(n));
    const MarketParams base_p = detail::effective_params(cfg);
    detail::parallel_for(n, cfg.jobs, [&](int i) {
        MarketParams q = base_p;
        (sweep_ws ? q.w_s : q.K) = axis[static_cast<std::size_t>(i)];
        const double R = profit_ratio(q);
        const auto pr = proliferation_value(q);
        const auto tc = threshold_curves(q.w_s, q);
        t.rows[static_cast<std::size_t>(i)] = {
            io::g17(axis[static_cast<std::size_t>(i)]),
            io::g17(R),
            io::g17(pr.delta_o),
            io::g17(pr.delta_s),
            io::g17(pr.welfare_deltas.cs_o),
            io::g17(pr.welfare_deltas.cs_s),
            io::g17(pr.welfare_deltas.lw_o),
            io::g17(pr.welfare_deltas.lw_s),
            io::g17(pr.welfare_deltas.sw_o),
            io::g17(pr.welfare_deltas.sw_s),
            io::g17(tc.k_F),
            io::g17(tc.k_S),
            io::g17(tc.k_L_lo),
            io::g17(tc.k_L_hi),
            io::g17(tc.k_C_lo),
            io::g17(tc.k_C_hi)};
    });
    io::write_table(t, cfg.output_path, out);
    return 0;
}

// The oracle battery: grid refinement vs the closed forms, discrete-event
// and Monte Carlo simulation vs the analytic formulas, and the flexible
// assignment equivalence. Exit 0 iff every check meets its tolerance.
inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    std::vector<detail::ValidationRow> rows;
    const auto record = [&](std::string name, double observed, double tol) {
        rows.push_back({std::move(name), observed, tol, observed <= tol});
    };

    { // grid oracles against the closed-form solvers
        num::RngStream rng(cfg.seed, 17);
        double gap_s = 0.0, gap_o = 0.0;
        for (int i = 0; i < 8; ++i) {
            MarketParams p;
            p.V = rng.uniform(1.7, 2.5);
            p.Lambda = rng.uniform(25.0, 35.0);
            p.w_s = rng.uniform(0.05, 1.0);
            p.K = rng.uniform(10.0, 100.0);
            const auto bs = oracle::brute_force_single_s(p);
            const auto bo = oracle::brute_force_single_o(p);
            const double ps = solve_system_s(p).profit;
            const double po = solve_system_o(p).profit;
            gap_s = std::max(gap_s, std::abs(ps - bs.profit) / std::max(1.0, ps));
            gap_o = std::max(gap_o, std::abs(po - bo.profit) / std::max(1.0, po));
        }
        record("single-standard grid oracle", gap_s, 5e-3);
        record("single-ondemand grid oracle", gap_o, 5e-3);

        double gap_h = 0.0;
        num::RngStream rng2(cfg.seed, 18);
        for (int i = 0; i < 3; ++i) {
            MarketParams p;
            p.V = rng2.uniform(1.8, 2.2);
            p.Lambda = rng2.uniform(27.0, 33.0);
            p.w_s = rng2.uniform(0.2, 0.8);
            p.K = rng2.uniform(30.0, 80.0);
            const auto bh = oracle::brute_force_hybrid(p);
            const double star = solve_deployment(p).pi_star;
            gap_h = std::max(gap_h,
                             std::abs(star - bh.combined_profit) / std::max(1.0, star));
        }
        record("deployment grid oracle", gap_h, 5e-3);
    }

    { // event simulation of the queueing formulas
        oracle::SimConfig sim;
        sim.seed = cfg.seed;
        const double analytic1 = lead_time_mm1(5.0, 1.0, 3.2);
        const auto q1 = oracle::simulate_queue(1, 5.0, 3.2, sim);
        record("sojourn simulation, pooled server",
               std::abs(q1.mean_sojourn - analytic1) / analytic1, 0.02);
        const double analytick = lead_time_mmk(5, 1.0, 3.2);
        const auto qk = oracle::simulate_queue(5, 1.0, 3.2, sim);
        record("sojourn simulation, parallel servers",
               std::abs(qk.mean_sojourn - analytick) / analytick, 0.02);
    }

    { // Monte Carlo market shares at the solved dual deployment
        MarketParams p; // defaults sit in the dual regime
        const auto d = solve_deployment(p);
        if (d.sol_h) {
            oracle::SimConfig sim;
            sim.seed = cfg.seed + 1;
            oracle::MarketPolicy pol;
            pol.p_s = d.sol_h->standard.price;
            pol.W_s = d.sol_h->standard.lead_time;
            pol.p_o = d.sol_h->ondemand.price;
            pol.W_o = d.sol_h->ondemand.lead_time;
            pol.w_o = d.sol_h->ondemand.wage;
            pol.k_s = d.sol_h->standard.servers;
            const auto mc = oracle::simulate_market(pol, p, sim);
            const double z_s =
                std::abs(mc.lambda_s_hat - d.sol_h->standard.arrival_rate) /
                std::max(mc.sigma_lambda_s, 1e-12);
            const double z_o =
                std::abs(mc.lambda_o_hat - d.sol_h->ondemand.arrival_rate) /
                std::max(mc.sigma_lambda_o, 1e-12);
            record("market share monte carlo (z)", std::max(z_s, z_o), 3.0);
        }
    }

    { // flexible assignment never improves on the dedicated optimum
        num::RngStream rng(cfg.seed, 19);
        double worst = -kInf;
        for (int i = 0; i < 2; ++i) {
            MarketParams p;
            p.V = rng.uniform(1.8, 2.2);
            p.Lambda = rng.uniform(27.0, 33.0);
            p.w_s = rng.uniform(0.3, 0.8);
            p.K = rng.uniform(40.0, 80.0);
            const auto fc = flexible_equivalence_check(p, 16);
            const double star = solve_deployment(p).pi_star;
            worst = std::max(worst, fc.max_gap / std::max(1.0, star));
        }
        record("flexible assignment equivalence", worst, 1e-6);
    }

    detail::print_validation_table(rows, out);
    for (const auto& r : rows)
        if (!r.pass) return 3;
    return 0;
}

// Emits the data series behind one of the named result figures.
inline int cmd_reproduce(const std::string& figure, const RunConfig& cfg,
                         std::ostream& out) {
    const MarketParams base_p = detail::effective_params(cfg);

    const auto ws_axis = [&](int n, double lo, double hi) {
        SweepAxis ax;
        ax.lo = lo;
        ax.hi = hi;
        ax.n = n;
        return ax.values();
    };

    if (figure == "fig1" || figure == "fig2" || figure == "fig4" ||
        figure == "fig5") {
        const auto axis = ws_axis(64, 0.02, 1.3);
        const int n = static_cast<int>(axis.size());
        io::Table t;
        std::vector<DeploymentSolution> sols(static_cast<std::size_t>(n));
        detail::parallel_for(n, cfg.jobs, [&](int i) {
            MarketParams q = base_p;
            q.w_s = axis[static_cast<std::size_t>(i)];
            sols[static_cast<std::size_t>(i)] = solve_deployment(q);
        });
        if (figure == "fig1") {
            t.header = {"ws", "pi_s", "pi_o", "pi_h", "pi_star", "regime"};
            for (int i = 0; i < n; ++i) {
                const auto& d = sols[static_cast<std::size_t>(i)];
                t.rows.push_back({io::g17(axis[static_cast<std::size_t>(i)]),
                                  io::g17(d.pi_s), io::g17(d.pi_o),
                                  io::g17(d.pi_h), io::g17(d.pi_star),
                                  to_string(d.regime)});
            }
        } else if (figure == "fig2") {
            t.header = {"ws", "R", "delta_o", "delta_s", "bound_o", "bound_s"};
            for (int i = 0; i < n; ++i) {
                MarketParams q = base_p;
                q.w_s = axis[static_cast<std::size_t>(i)];
                const auto pr = proliferation_value(q);
                t.rows.push_back({io::g17(q.w_s), io::g17(profit_ratio(q)),
                                  io::g17(pr.delta_o), io::g17(pr.delta_s),
                                  io::g17(pr.bound_o), io::g17(pr.bound_s)});
            }
        } else if (figure == "fig4") {
            t.header = {"ws", "price_s_dual", "price_s_single", "lead_s_dual",
                        "lead_s_single"};
            for (int i = 0; i < n; ++i) {
                const auto& d = sols[static_cast<std::size_t>(i)];
                if (!d.sol_h) continue;
                MarketParams q = base_p;
                q.w_s = axis[static_cast<std::size_t>(i)];
                const auto s = solve_system_s(q);
                t.rows.push_back({io::g17(q.w_s),
                                  io::g17(d.sol_h->standard.price),
                                  io::g17(s.channel.price),
                                  io::g17(d.sol_h->standard.lead_time),
                                  io::g17(s.channel.lead_time)});
            }
        } else {
            t.header = {"ws",         "delta_o_cs", "delta_s_cs",
                        "delta_o_lw", "delta_s_lw", "delta_o_sw",
                        "delta_s_sw"};
            for (int i = 0; i < n; ++i) {
                MarketParams q = base_p;
                q.w_s = axis[static_cast<std::size_t>(i)];
                const auto pr = proliferation_value(q);
                const auto& wd = pr.welfare_deltas;
                t.rows.push_back({io::g17(q.w_s), io::g17(wd.cs_o),
                                  io::g17(wd.cs_s), io::g17(wd.lw_o),
                                  io::g17(wd.lw_s), io::g17(wd.sw_o),
                                  io::g17(wd.sw_s)});
            }
        }
        io::write_table(t, cfg.output_path, out);
        return 0;
    }

    if (figure == "fig3" || figure == "figMMk") {
        RunConfig map_cfg = cfg;
        if (figure == "figMMk") {
            map_cfg.extension.queue_model = QueueModel::MMk;
            if (!map_cfg.sweep)
                map_cfg.sweep = SweepSpec{{0.02, 1.0, 48}, {10.0, 100.0, 48}};
        }
        return cmd_regime_map(map_cfg, out);
    }

    if (figure == "figA1") {
        MarketParams q = base_p;
        q.K = 55.0;
        const auto d = solve_deployment(q);
        const auto w = deployment_welfare(d, q);
        io::Table t;
        t.header = {"regime",   "pi_star",  "pi_s",   "pi_o",
                    "pi_h",     "price_s",  "price_o", "wage_o",
                    "lead_s",   "lead_o",   "lambda_o", "cs",
                    "lw",       "sw"};
        const auto& h = d.sol_h;
        t.rows.push_back(
            {to_string(d.regime), io::g17(d.pi_star), io::g17(d.pi_s),
             io::g17(d.pi_o), io::g17(d.pi_h),
             io::g17(h ? h->standard.price : 0.0),
             io::g17(h ? h->ondemand.price : 0.0),
             io::g17(h ? h->ondemand.wage : 0.0),
             io::g17(h ? h->standard.lead_time : 0.0),
             io::g17(h ? h->ondemand.lead_time : 0.0),
             io::g17(h ? h->lambda_o_star : 0.0), io::g17(w.cs),
             io::g17(w.lw), io::g17(w.sw)});
        io::write_table(t, cfg.output_path, out);
        return 0;
    }

    throw DomainError("unknown figure '" + figure +
                      "' (expected fig1|fig2|fig3|fig4|fig5|figA1|figMMk)");
}

namespace detail {

inline void apply_json_config(const std::string& path, RunConfig& cfg,
                              std::vector<std::string>& sweep_args) {
    std::ifstream f(path);
    if (!f) throw DomainError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw DomainError("config file must hold a JSON object");
    const auto num = [&](const char* key, double& slot) {
        if (j.contains(key)) slot = j.at(key).get<double>();
    };
    num("V", cfg.params.V);
    num("Lambda", cfg.params.Lambda);
    num("ws", cfg.params.w_s);
    num("K", cfg.params.K);
    num("mu-s", cfg.params.mu_s);
    num("mu-o", cfg.params.mu_o);
    num("alpha", cfg.extension.alpha);
    if (j.contains("queue-model")) {
        const auto s = j.at("queue-model").get<std::string>();
        if (s == "mm1")
            cfg.extension.queue_model = QueueModel::MM1;
        else if (s == "mmk")
            cfg.extension.queue_model = QueueModel::MMk;
        else
            throw DomainError("queue-model must be mm1 or mmk, got '" + s + "'");
    }
    if (j.contains("theta-dist"))
        cfg.extension.theta_dist = parse_dist(j.at("theta-dist").get<std::string>());
    if (j.contains("r-dist"))
        cfg.extension.r_dist = parse_dist(j.at("r-dist").get<std::string>());
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (s.is_string())
            sweep_args.push_back(s.get<std::string>());
        else if (s.is_array())
            for (const auto& e : s) sweep_args.push_back(e.get<std::string>());
        else
            throw DomainError("sweep in the config file must be a string or array");
    }
    if (j.contains("out")) cfg.output_path = j.at("out").get<std::string>();
    if (j.contains("format")) {
        const auto s = j.at("format").get<std::string>();
        if (s == "csv")
            cfg.format = OutputFormat::CSV;
        else if (s == "json")
            cfg.format = OutputFormat::JSON;
        else
            throw DomainError("format must be csv or json, got '" + s + "'");
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
}

} // namespace detail

// Parses argv-style arguments into a request. Throws CLI::ParseError for
// malformed flags (including --help) and DomainError for invalid values.
inline CliRequest parse_cli(const std::vector<std::string>& args) {
    CliRequest req;

    // the config file, if any, supplies defaults that flags then override
    std::vector<std::string> sweep_args;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            detail::apply_json_config(args[i + 1], req.config, sweep_args);
        else if (args[i].rfind("--config=", 0) == 0)
            detail::apply_json_config(args[i].substr(9), req.config, sweep_args);
    }

    CLI::App app{"optimal service deployment toolkit"};
    app.fallthrough();
    std::string config_path, theta_text, r_text, queue_text, format_text;
    app.add_option("--config", config_path, "JSON config file (flags override)");
    app.add_option("--V", req.config.params.V, "service value");
    app.add_option("--Lambda", req.config.params.Lambda, "market arrival rate");
    app.add_option("--ws", req.config.params.w_s, "employee hourly wage");
    app.add_option("--K", req.config.params.K, "contractor pool size");
    app.add_option("--mu-s", req.config.params.mu_s, "employee service rate");
    app.add_option("--mu-o", req.config.params.mu_o, "contractor service rate");
    app.add_option("--alpha", req.config.extension.alpha,
                   "on-demand quality ratio");
    app.add_option("--queue-model", queue_text, "mm1 or mmk");
    app.add_option("--theta-dist", theta_text,
                   "customer heterogeneity: uniform or beta:a,b");
    app.add_option("--r-dist", r_text,
                   "reservation heterogeneity: uniform or beta:a,b");
    app.add_option("--sweep", sweep_args,
                   "axis spec like ws:0.05:1.0:64 (repeatable)")
        ->allow_extra_args(false);
    app.add_option("--out", req.config.output_path, "output file (default stdout)");
    app.add_option("--format", format_text, "csv or json");
    app.add_option("--seed", req.config.seed, "simulation seed");
    app.add_option("--jobs", req.config.jobs, "worker pool size")
        ->envname("GIGDEPLOY_JOBS");

    auto* solve = app.add_subcommand("solve", "solve one deployment problem");
    auto* rmap = app.add_subcommand("regime-map", "classify a (ws, K) grid");
    auto* sweep = app.add_subcommand("sweep", "proliferation value along one axis");
    auto* validate = app.add_subcommand("validate", "run the oracle battery");
    auto* reproduce = app.add_subcommand("reproduce", "emit a named result data set");
    reproduce->add_option("figure", req.figure, "figure id, e.g. fig3")->required();
    app.require_subcommand(1);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::CallForAllHelp&) {
        throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
    }

    if (solve->parsed()) req.command = "solve";
    if (rmap->parsed()) req.command = "regime-map";
    if (sweep->parsed()) req.command = "sweep";
    if (validate->parsed()) req.command = "validate";
    if (reproduce->parsed()) req.command = "reproduce";

    if (!queue_text.empty()) {
        if (queue_text == "mm1")
            req.config.extension.queue_model = QueueModel::MM1;
        else if (queue_text == "mmk")
            req.config.extension.queue_model = QueueModel::MMk;
        else
            throw DomainError("queue-model must be mm1 or mmk, got '" +
                              queue_text + "'");
    }
    if (!theta_text.empty())
        req.config.extension.theta_dist = detail::parse_dist(theta_text);
    if (!r_text.empty()) req.config.extension.r_dist = detail::parse_dist(r_text);
    if (!format_text.empty()) {
        if (format_text == "csv")
            req.config.format = OutputFormat::CSV;
        else if (format_text == "json")
            req.config.format = OutputFormat::JSON;
        else
            throw DomainError("format must be csv or json, got '" + format_text +
                              "'");
    }
    if (!sweep_args.empty()) {
        SweepSpec spec;
        spec.ws.n = 1;
        spec.K.n = 1;
        for (const auto& s : sweep_args) detail::parse_sweep_axis(s, spec);
        req.config.sweep = spec;
    }
    if (req.config.jobs < 1) throw DomainError("jobs must be >= 1");
    return req;
}

// Full front end: parse, dispatch, and map failures to the exit-code
// contract (0 ok, 1 internal, 2 invalid input, 3 validation failure).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
    CliRequest req;
    try {
        req = parse_cli(args);
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const CLI::ParseError& e) {
        nlohmann::json j;
        j["error"] = {{"type", "invalid_input"}, {"message", e.what()}};
        out << j.dump() << '\n';
        return 2;
    } catch (const DomainError& e) {
        nlohmann::json j;
        j["error"] = {{"type", "invalid_input"}, {"message", e.what()}};
        out << j.dump() << '\n';
        return 2;
    }

    try {
        if (req.command == "solve") return cmd_solve(req.config, out);
        if (req.command == "regime-map") return cmd_regime_map(req.config, out);
        if (req.command == "sweep") return cmd_sweep(req.config, out);
        if (req.command == "validate") return cmd_validate(req.config, out);
        return cmd_reproduce(req.figure, req.config, out);
    } catch (const DomainError& e) {
        nlohmann::json j;
        j["error"] = {{"type", "invalid_input"}, {"message", e.what()}};
        out << j.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        nlohmann::json j;
        j["error"] = {{"type", "internal_error"}, {"message", e.what()}};
        err << j.dump() << '\n';
        return 1;
    }
}

} // namespace gigdeploy::cli

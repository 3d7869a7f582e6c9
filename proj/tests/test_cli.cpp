#include "catch_amalgamated.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gigdeploy/cli.hpp"

using Catch::Approx;
using namespace gigdeploy;
using namespace gigdeploy::cli;

namespace {

struct CliRun {
    int exit_code = 0;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json parse_json(const std::string& text) {
    return nlohmann::json::parse(text);
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

TEST_CASE("solve reports the dual regime at the reference configuration") {
    const auto r = run({"solve", "--K", "55", "--format", "json"});
    REQUIRE(r.exit_code == 0);
    const auto j = parse_json(r.out);
    REQUIRE(j.at("regime").get<std::string>().front() == 'H');
    CHECK(j.at("profit").at("star").get<double>() ==
          Approx(38.689201914803874).epsilon(1e-12));
    CHECK(j.contains("welfare"));
    CHECK(j.at("channels").contains("standard"));
    CHECK(j.at("channels").contains("ondemand"));
    const double ps = j.at("channels").at("standard").at("price").get<double>();
    const double po = j.at("channels").at("ondemand").at("price").get<double>();
    CHECK(ps > po); // the slower channel sells at a discount
}

TEST_CASE("solve collapses to one channel at the wage and value extremes") {
    const auto high_wage = run({"solve", "--ws", "2.0", "--K", "100", "--format", "json"});
    REQUIRE(high_wage.exit_code == 0);
    const auto j = parse_json(high_wage.out);
    CHECK(j.at("regime").get<std::string>() == "O");
    CHECK(j.at("profit").at("star").get<double>() ==
          Approx(42.062939382235136).epsilon(1e-12));
    CHECK(j.at("channels").contains("ondemand"));
    CHECK_FALSE(j.at("channels").contains("standard"));

    // a contractor pool stays profitable even when the market value is tiny
    const auto tiny = run({"solve", "--V", "0.1", "--ws", "1.0", "--K", "1",
                           "--format", "json"});
    REQUIRE(tiny.exit_code == 0);
    const auto t = parse_json(tiny.out);
    CHECK(t.at("regime").get<std::string>() == "O");
    const double star = t.at("profit").at("star").get<double>();
    CHECK(star > 0.0);
    CHECK(star < 1e-2);
}

TEST_CASE("solve prints an aligned table by default") {
    const auto r = run({"solve", "--K", "55"});
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 5);
    CHECK(lines[0].rfind("regime", 0) == 0);
    CHECK(lines[0].find("H") != std::string::npos);
    bool saw_welfare = false;
    for (const auto& l : lines)
        if (l.rfind("social_welfare", 0) == 0) saw_welfare = true;
    CHECK(saw_welfare);
}

TEST_CASE("worker pools do not change any emitted byte") {
    const std::vector<std::string> sweep1 = {"sweep", "--seed", "7",
                                             "--sweep", "ws:0.1:0.9:9",
                                             "--jobs", "1"};
    std::vector<std::string> sweep8 = sweep1;
    sweep8.back() = "8";
    const auto a = run(sweep1);
    const auto b = run(sweep8);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(a.out == b.out);

    const std::vector<std::string> map1 = {"regime-map", "--sweep", "ws:0.1:1.0:8",
                                           "--sweep", "K:15:90:8", "--jobs", "1"};
    std::vector<std::string> map6 = map1;
    map6.back() = "6";
    const auto m1 = run(map1);
    const auto m6 = run(map6);
    REQUIRE(m1.exit_code == 0);
    REQUIRE(m6.exit_code == 0);
    CHECK(m1.out == m6.out);
}

TEST_CASE("table schemas are stable and numbers round-trip") {
    const auto map = run({"regime-map", "--sweep", "ws:0.2:1.0:5", "--sweep",
                          "K:20:80:4"});
    REQUIRE(map.exit_code == 0);
    const auto lines = lines_of(map.out);
    REQUIRE(lines.size() == 1 + 5 * 4);
    CHECK(lines[0] == "ws,K,regime,pi_s,pi_o,pi_h,pi_star");

    // every numeric cell is printed with enough digits to reparse exactly
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::istringstream row(lines[i]);
        std::string cell;
        int col = 0;
        while (std::getline(row, cell, ',')) {
            if (col != 2) { // the regime column is text
                const double v = std::stod(cell);
                CHECK(io::g17(v) == cell);
            }
            ++col;
        }
        CHECK(col == 7);
    }

    const auto sweep = run({"sweep", "--sweep", "ws:0.3:0.7:3"});
    REQUIRE(sweep.exit_code == 0);
    CHECK(lines_of(sweep.out)[0] ==
          "ws,R,delta_o,delta_s,delta_o_cs,delta_s_cs,delta_o_lw,delta_s_lw,"
          "delta_o_sw,delta_s_sw,k_F,k_S,k_L_lo,k_L_hi,k_C_lo,k_C_hi");

    const auto axis_k = run({"sweep", "--sweep", "K:20:80:4"});
    REQUIRE(axis_k.exit_code == 0);
    CHECK(lines_of(axis_k.out)[0].rfind("K,", 0) == 0);
}

TEST_CASE("a config file sets defaults and flags override it") {
    const auto path = std::filesystem::temp_directory_path() / "gigdeploy_cli_cfg.json";
    {
        std::ofstream f(path);
        f << R"({"K": 55, "ws": 0.4, "format": "json", "seed": 9})";
    }
    const auto base = run({"solve", "--config", path.string()});
    REQUIRE(base.exit_code == 0);
    const auto j = parse_json(base.out);
    CHECK(j.at("params").at("K").get<double>() == Approx(55.0));
    CHECK(j.at("params").at("ws").get<double>() == Approx(0.4));
    CHECK(j.at("regime").get<std::string>().front() == 'H');

    const auto overridden =
        run({"solve", "--config", path.string(), "--ws", "2.0", "--K", "100"});
    REQUIRE(overridden.exit_code == 0);
    const auto o = parse_json(overridden.out);
    CHECK(o.at("params").at("ws").get<double>() == Approx(2.0));
    CHECK(o.at("params").at("K").get<double>() == Approx(100.0));
    CHECK(o.at("regime").get<std::string>() == "O");
    std::filesystem::remove(path);
}

TEST_CASE("model variants are reachable through flags") {
    const auto mmk = run({"solve", "--queue-model", "mmk", "--format", "json"});
    REQUIRE(mmk.exit_code == 0);
    const auto j = parse_json(mmk.out);
    CHECK(j.at("regime").get<std::string>() == "O");
    CHECK(j.at("profit").at("star").get<double>() ==
          Approx(15.18442178276068).epsilon(1e-9));
    CHECK(j.at("channels").at("ondemand").at("servers").get<double>() ==
          Approx(19.0));

    const auto beta = run({"solve", "--theta-dist", "beta:1,40", "--ws", "0.2",
                           "--format", "json"});
    REQUIRE(beta.exit_code == 0);
    const auto b = parse_json(beta.out);
    CHECK(b.at("regime").get<std::string>() == "S");
    CHECK(b.at("profit").at("star").get<double>() ==
          Approx(52.040395703507542).epsilon(1e-9));

    const auto prem = run({"solve", "--alpha", "1.1", "--format", "json"});
    REQUIRE(prem.exit_code == 0);
    const auto p = parse_json(prem.out);
    CHECK(p.at("regime").get<std::string>().front() == 'H');
    CHECK(p.at("profit").at("star").get<double>() ==
          Approx(40.249115368416476).epsilon(1e-9));
}

TEST_CASE("invalid input exits with the contract code") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"solve", "--alpha", "-1"},
             {"solve", "--theta-dist", "beta:0,2"},
             {"solve", "--theta-dist", "gamma"},
             {"solve", "--queue-model", "mg1"},
             {"solve", "--format", "yaml"},
             {"reproduce", "nope"},
             {"reproduce"},
             {"sweep", "--sweep", "ws:bad:1:4"},
             {"sweep", "--sweep", "ws:0.1:1.0:4", "--sweep", "K:10:100:4"},
             {"solve", "--jobs", "0"},
             {"solve", "--config", "/nonexistent/cfg.json"},
             {},
         }) {
        const auto r = run(args);
        INFO((args.empty() ? std::string("<none>") : args[0]));
        CHECK(r.exit_code == 2);
        if (!r.out.empty() && r.out.front() == '{')
            CHECK(parse_json(r.out).at("error").at("type").get<std::string>() ==
                  "invalid_input");
    }
}

TEST_CASE("help requests exit cleanly") {
    const auto top = run({"--help"});
    CHECK(top.exit_code == 0);
    CHECK(top.out.find("SUBCOMMAND") != std::string::npos);
    const auto sub = run({"solve", "--help"});
    CHECK(sub.exit_code == 0);
    CHECK_FALSE(sub.out.empty());
}

TEST_CASE("the validation battery passes end to end") {
    const auto r = run({"validate"});
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("reproduce emits the named data sets") {
    const auto a1 = run({"reproduce", "figA1"});
    REQUIRE(a1.exit_code == 0);
    const auto a1_lines = lines_of(a1.out);
    REQUIRE(a1_lines.size() == 2);
    CHECK(a1_lines[0].rfind("regime,pi_star", 0) == 0);

    const auto f1 = run({"reproduce", "fig1"});
    REQUIRE(f1.exit_code == 0);
    const auto f1_lines = lines_of(f1.out);
    CHECK(f1_lines.size() == 65);
    CHECK(f1_lines[0] == "ws,pi_s,pi_o,pi_h,pi_star,regime");

    // the same request writes the same bytes to a file
    const auto path = std::filesystem::temp_directory_path() / "gigdeploy_fig1.csv";
    const auto to_file = run({"reproduce", "fig1", "--out", path.string()});
    REQUIRE(to_file.exit_code == 0);
    std::ifstream in(path, std::ios::binary);
    std::stringstream copied;
    copied << in.rdbuf();
    CHECK(copied.str() == f1.out);
    std::filesystem::remove(path);
}

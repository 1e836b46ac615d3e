#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "commands.hpp"

using namespace weber::cli;

namespace {

const char* kSqrtConfig = R"~({"X": 1, "utility1": {"family": "power", "p": 0.5},
  "utility2": {"family": "power", "p": 0.5}, "k1": 0.2, "k2": 0.2})~";

Options quiet() {
    Options o;
    o.timestamp = false;
    return o;
}

std::string tmp_path(const std::string& name) { return std::string(WEBER_TEST_TMP) + "/cli_" + name; }

std::string write_file(const std::string& name, const std::string& text) {
    const std::string path = tmp_path(name);
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& args) {
    const std::string cmd = std::string(WEBER_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(kSqrtConfig);
    CHECK(cfg.X == 1.0);
    CHECK(*cfg.utility1.p == 0.5);
    CHECK(*cfg.k2 == 0.2);
    CHECK(cfg.d1 == 0.0);

    auto key_of = [](const char* text) {
        try {
            make_problem(parse_config(text));
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<none>");
    };
    CHECK(key_of(R"~({"X": 1, "utility1": {"family": "power", "p": 0.5}})~") == "utility2");
    CHECK(key_of(R"~({"X": "one", "utility1": {"expr": "x"}, "utility2": {"expr": "x"}})~") == "X");
    CHECK(key_of(R"~({"X": -1, "utility1": {"expr": "x"}, "utility2": {"expr": "x"}})~") == "X");
    CHECK(key_of(R"~({"X": 1, "utility1": {"expr": "x +"}, "utility2": {"expr": "x"}})~") == "utility1.expr");
    CHECK(key_of(R"~({"X": 1, "utility1": {"family": "log"}, "utility2": {"expr": "x"}})~") == "utility1.family");
    CHECK(key_of(R"~({"X": 1, "utility1": {"family": "power", "p": -2}, "utility2": {"expr": "x"}})~") ==
          "utility1.p");
    CHECK(key_of(R"~({"X": 1, "utility1": {"expr": "x"}, "utility2": {"expr": "x"}, "k1": 1.5})~") == "k1");
    CHECK(key_of(R"~({"X": 1, "utility1": {"expr": "x"}, "utility2": {"expr": "x"}, "kk": 1})~") == "kk");
    CHECK(key_of(R"~({"X": 1, )~") == "");
}

TEST_CASE("cmd_solve") {
    const auto res = cmd_solve(parse_config(kSqrtConfig), quiet());
    REQUIRE(res.exit_code == kExitOk);
    const auto& doc = res.document;
    CHECK(doc["schema"] == kSchemaTag);
    CHECK_FALSE(doc.contains("generated_at"));
    CHECK(doc["player1"]["u_star"].get<double>() == doctest::Approx(std::sqrt(0.45)).epsilon(1e-12));
    CHECK(doc["player2"]["u_star"].get<double>() == doctest::Approx(std::sqrt(0.45)).epsilon(1e-12));
    CHECK(doc["closed_form"]["max_rel_error"].get<double>() <= 1e-9);
    CHECK(doc["inequalities"]["all_strict"] == true);

    const auto lin = cmd_solve(parse_config(R"~({"X": 1, "utility1": {"family": "power", "p": 1},
        "utility2": {"family": "power", "p": 1}, "k1": 0.3, "k2": 0.3})~"),
                               quiet());
    REQUIRE(lin.exit_code == kExitOk);
    CHECK(lin.document["closed_form"]["eps1"].get<double>() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(lin.document["eps2"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lin.document["inequalities"]["degenerate_equality"] == true);
    CHECK(lin.document["exhausted"] == true);

    const auto missing = cmd_solve(parse_config(R"~({"X": 1, "utility1": {"expr": "sqrt(x)"},
        "utility2": {"expr": "sqrt(x)"}, "k1": 0.2})~"),
                                   quiet());
    CHECK(missing.exit_code == kExitConfig);
    CHECK(missing.document["error"].get<std::string>().find("k2") != std::string::npos);

    const auto convex = cmd_solve(parse_config(R"~({"X": 1, "utility1": {"expr": "x^2"},
        "utility2": {"expr": "sqrt(x)"}, "k1": 0.2, "k2": 0.2})~"),
                                  quiet());
    CHECK(convex.exit_code == kExitConfig);
    CHECK(convex.document["validation"]["concavity_violations"].get<int>() > 0);

    const auto infeasible = cmd_solve(parse_config(R"~({"X": 0.5, "utility1": {"expr": "sqrt(x) + 1"},
        "utility2": {"family": "power", "p": 0.5}, "k1": 0.99, "k2": 0.5})~"),
                                      quiet());
    CHECK(infeasible.exit_code == kExitInfeasible);
    CHECK(infeasible.document["status"] == "infeasible");
    CHECK_FALSE(infeasible.document["reason"].get<std::string>().empty());
}

TEST_CASE("cmd_iterate") {
    const auto res = cmd_iterate(parse_config(kSqrtConfig), quiet());
    REQUIRE(res.exit_code == kExitOk);
    CHECK(res.document["x1_total"].get<double>() == res.document["x2_total"].get<double>());
    CHECK(res.document["x1_total"].get<double>() == doctest::Approx(0.5).epsilon(1e-9));

    // Per-round claims in the CSV add up to the reported totals.
    const auto rows = parse_csv(res.csv);
    REQUIRE(rows.size() == res.document["rounds"].size() + 1);
    double x1 = 0.0, x2 = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        x1 += std::stod(rows[i][4]);
        x2 += std::stod(rows[i][7]);
    }
    CHECK(x1 == doctest::Approx(res.document["x1_total"].get<double>()).epsilon(1e-15));
    CHECK(x2 == doctest::Approx(res.document["x2_total"].get<double>()).epsilon(1e-15));
    CHECK(std::stod(rows.back()[8]) == res.document["x1_total"].get<double>());

    const auto lin = cmd_iterate(parse_config(R"~({"X": 3, "utility1": {"family": "power", "p": 1},
        "utility2": {"family": "power", "p": 1}, "k1": 0.1, "k2": 0.1})~"),
                                 quiet());
    CHECK(lin.document["rounds"].size() == 1);
}

TEST_CASE("cmd_nash") {
    Options opt = quiet();
    opt.alpha = 0.5;
    const auto res = cmd_nash(parse_config(R"~({"X": 1, "utility1": {"family": "power", "p": 0.5},
        "utility2": {"family": "power", "p": 0.9}, "k1": 0.001, "k2": 0.001})~"),
                              opt);
    REQUIRE(res.exit_code == kExitOk);
    CHECK(res.document["nash"]["x1"].get<double>() == doctest::Approx(0.35714285714285715).epsilon(1e-9));
    CHECK(res.document["closed_form_x1"].get<double>() == doctest::Approx(0.35714285714285715).epsilon(1e-15));
    CHECK(res.document["weber_vs_nash_rel_diff"].get<double>() <= 5e-3);

    const auto sym = cmd_nash(parse_config(R"~({"X": 4, "utility1": {"expr": "sqrt(x)"},
        "utility2": {"expr": "sqrt(x)"}})~"),
                              quiet());
    CHECK(sym.document["nash"]["alpha"].get<double>() == 0.5);
    CHECK(sym.document["nash"]["x1"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));

    const auto weights = cmd_nash(parse_config(R"~({"X": 1, "utility1": {"family": "power", "p": 0.5},
        "utility2": {"family": "power", "p": 0.9}, "k1": 0.001, "k2": 0.002})~"),
                                  quiet());
    CHECK(weights.document["nash"]["alpha"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(weights.document["weber_vs_nash_rel_diff"].get<double>() <= 5e-3);

    Options bad = quiet();
    bad.alpha = 1.5;
    CHECK(cmd_nash(parse_config(kSqrtConfig), bad).exit_code == kExitConfig);
}

TEST_CASE("cmd_plotdata") {
    Options opt = quiet();
    opt.samples = 100;
    const auto res = cmd_plotdata(parse_config(R"~({"X": 2, "utility1": {"family": "power", "p": 0.5},
        "utility2": {"family": "power", "p": 0.5}, "k1": 0.1, "k2": 0.3})~"),
                                  opt);
    REQUIRE(res.exit_code == kExitOk);
    const auto rows = parse_csv(res.csv);
    REQUIRE(rows.size() == 101);
    CHECK(rows[0] == std::vector<std::string>{"u1", "u2"});
    CHECK(std::stod(rows[1][0]) == 0.0);
    CHECK(std::stod(rows[1][1]) == std::sqrt(2.0));
    CHECK(std::stod(rows[100][0]) == std::sqrt(2.0));
    CHECK(std::stod(rows[100][1]) == 0.0);

    // The frontier crosses each proposer's threshold strictly between the
    // opponent's lower threshold and its own upper one.
    const auto& th = res.document["thresholds"];
    const double u1s = th["u1_star"], u1u = th["u1_upper"], u2s = th["u2_star"], u2u = th["u2_upper"];
    const auto cross = [&](double u1) {
        for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
            const double a = std::stod(rows[i][0]), b = std::stod(rows[i + 1][0]);
            if (a <= u1 && u1 <= b) return std::stod(rows[i][1]) + (u1 - a) / (b - a) * (std::stod(rows[i + 1][1]) - std::stod(rows[i][1]));
        }
        return std::nan("");
    };
    CHECK(cross(u1u) < u2s);
    CHECK(u2s < cross(u1s));
    CHECK(u2s < u2u);
    REQUIRE(res.extra_csv.size() == 1);
    CHECK(parse_csv(res.extra_csv[0].second).size() == 7);

    opt.samples = 2;
    CHECK(parse_csv(cmd_plotdata(parse_config(kSqrtConfig), opt).csv).size() == 3);
    opt.samples = 1;
    CHECK(cmd_plotdata(parse_config(kSqrtConfig), opt).exit_code == kExitConfig);
}

TEST_CASE("cmd_sweep") {
    const auto res = cmd_sweep(parse_config(R"~({"X": 1, "sweep": {"p": [0.5, 1.0, 0.3], "q": [1.0],
        "k1": [0.1, 0.2, 0.4], "k2": [0.2]}})~"),
                               quiet());
    REQUIRE(res.exit_code == kExitOk);
    const auto rows = parse_csv(res.csv);
    REQUIRE(rows.size() == 10);
    const auto& header = rows[0];
    auto col = [&](const char* name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].size() == header.size());
        CHECK(std::stod(rows[i][col("eps1")]) == doctest::Approx(std::stod(rows[i][col("eps1_closed")])).epsilon(1e-9));
        CHECK(std::stod(rows[i][col("eps2")]) == doctest::Approx(std::stod(rows[i][col("eps2_closed")])).epsilon(1e-9));
        const bool linear = rows[i][col("p")] == "1";
        CHECK(rows[i][col("single_round")] == (linear ? "true" : "false"));
    }
    CHECK(cmd_sweep(parse_config(kSqrtConfig), quiet()).exit_code == kExitConfig);
}

TEST_CASE("binary exit codes and files") {
    const std::string good = write_file("good.json", kSqrtConfig);
    const std::string bad = write_file("bad.json", R"~({"X": 1, "utility1": {"family": "power", "p": 0.5}})~");
    const std::string infeasible = write_file("inf.json", R"~({"X": 0.5, "utility1": {"expr": "sqrt(x) + 1"},
        "utility2": {"family": "power", "p": 0.5}, "k1": 0.99, "k2": 0.5})~");

    CHECK(run("solve --config " + good + " --no-timestamp --out " + tmp_path("a.json")) == 0);
    CHECK(run("solve --config " + good + " --no-timestamp --out " + tmp_path("b.json")) == 0);
    CHECK(read_file(tmp_path("a.json")) == read_file(tmp_path("b.json")));
    CHECK(read_file(tmp_path("a.json")).find("generated_at") == std::string::npos);
    CHECK(run("solve --config " + good + " --out " + tmp_path("c.json")) == 0);
    CHECK(read_file(tmp_path("c.json")).find("generated_at") != std::string::npos);

    CHECK(run("solve --config " + bad + " --out " + tmp_path("bad_out.json")) == kExitConfig);
    CHECK(read_file(tmp_path("bad_out.json")).find("utility2") != std::string::npos);
    CHECK(run("solve --config " + infeasible + " --out " + tmp_path("inf_out.json")) == kExitInfeasible);
    CHECK(run("solve --config /nonexistent.json") == kExitConfig);
    CHECK(run("bogus --config " + good) == kExitConfig);
    CHECK(run("check --config " + good + " --out " + tmp_path("check.json")) == 0);

    CHECK(run("plotdata --config " + good + " --samples 5 --out " + tmp_path("plot.csv")) == 0);
    CHECK(parse_csv(read_file(tmp_path("plot.csv"))).size() == 6);
    CHECK(parse_csv(read_file(tmp_path("plot.csv.thresholds.csv"))).size() == 7);

    CHECK(run("iterate --config " + good + " --format csv --tol 1e-6 --out " + tmp_path("rounds.csv")) == 0);
    // 0.1^6 rounds to just above 1e-6, so a seventh round runs.
    CHECK(parse_csv(read_file(tmp_path("rounds.csv"))).size() == 8);
    CHECK(run("iterate --config " + good + " --max-rounds 2 --out " + tmp_path("capped.json")) == 0);
    CHECK(read_file(tmp_path("capped.json")).find("\"max_rounds\"") != std::string::npos);
}

TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(0.5) == "0.5");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    Json j;
    j["a"] = 0.1;
    j["b"] = 2;
    j["c"] = "s";
    CHECK(to_json_text(j) == "{\n  \"a\": 0.10000000000000001,\n  \"b\": 2,\n  \"c\": \"s\"\n}\n");
}

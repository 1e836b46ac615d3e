#include "commands.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "weber/iterate.hpp"
#include "weber/nash.hpp"
#include "weber/threshold.hpp"

namespace weber::cli {

std::string format_double(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), ptr);
}

namespace {

void write_json(const Json& j, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += inner;
                out += Json(it.key()).dump();
                out += ": ";
                write_json(it.value(), depth + 1, out);
            }
            out += "\n" + pad + "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                write_json(j[i], depth + 1, out);
            }
            out += "\n" + pad + "]";
            return;
        }
        case Json::value_t::number_float: {
            double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        default: out += j.dump(); return;
    }
}

void flatten(const Json& j, const std::string& prefix, std::string& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    } else {
        out += prefix + ",";
        if (j.is_number_float())
            out += format_double(j.get<double>());
        else if (j.is_string())
            out += j.get<std::string>();
        else
            out += j.dump();
        out += "\n";
    }
}

std::string timestamp_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

double get_number(const Json& obj, const std::string& key, const std::string& path) {
    const Json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
    return d;
}

std::vector<double> get_number_list(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw ConfigError(path, "missing key");
    const Json& v = obj.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(path + "." + std::to_string(i), "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

UtilitySpec parse_utility(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object with \"expr\" or \"family\"");
    UtilitySpec spec;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "family" && it.key() != "p" && it.key() != "expr")
            throw ConfigError(path + "." + it.key(), "unknown key");
    if (j.contains("expr")) {
        if (j.contains("family") || j.contains("p"))
            throw ConfigError(path, "give either \"expr\" or \"family\", not both");
        if (!j["expr"].is_string()) throw ConfigError(path + ".expr", "expected a string");
        spec.expr = j["expr"].get<std::string>();
        return spec;
    }
    if (!j.contains("family")) throw ConfigError(path + ".family", "missing key");
    if (!j["family"].is_string() || j["family"].get<std::string>() != "power")
        throw ConfigError(path + ".family", "unsupported family (only \"power\")");
    if (!j.contains("p")) throw ConfigError(path + ".p", "missing key");
    spec.p = get_number(j, "p", path + ".p");
    return spec;
}

UtilityFunction make_utility(const UtilitySpec& spec, const std::string& path) {
    if (spec.expr) {
        try {
            return UtilityFunction::expression(*spec.expr);
        } catch (const expr::ParseError& e) {
            throw ConfigError(path + ".expr", e.what());
        }
    }
    try {
        return UtilityFunction::power(*spec.p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ".p", e.what());
    }
}

Json base_document(const char* command, const ProblemConfig& cfg, const Options& opt) {
    Json doc;
    doc["schema"] = kSchemaTag;
    doc["command"] = command;
    if (opt.timestamp) doc["generated_at"] = timestamp_now();
    doc["config"] = cfg.raw;
    return doc;
}

Json solution_json(const ThresholdSolution& s) {
    Json j;
    j["player"] = s.player;
    j["u_star"] = s.u_star;
    j["w_star"] = s.w_star;
    j["u_upper"] = s.u_star + s.w_star;
    j["x_star"] = s.x_star;
    j["opponent_value_at_u"] = s.opponent_value_at_u;
    j["residual"] = s.residual;
    return j;
}

Json closed_form_json(const PowerClosedForm& cf) {
    Json j;
    j["eps1"] = cf.eps1;
    j["eps2"] = cf.eps2;
    j["u1_star"] = cf.u1_star;
    j["u2_star"] = cf.u2_star;
    j["w1_star"] = cf.w1_star;
    j["w2_star"] = cf.w2_star;
    return j;
}

Json theorem2_json(const Theorem2Report& r) {
    Json j;
    j["margins"] = Json::array();
    for (double m : r.margins) j["margins"].push_back(m);
    j["tolerance"] = r.tolerance;
    j["all_strict"] = r.all_strict;
    j["degenerate_equality"] = r.degenerate_equality;
    j["violated"] = r.violated;
    return j;
}

Json validation_json(const ValidationReport& r) {
    Json j;
    j["all_clear"] = r.all_clear();
    j["monotonicity_violations"] = r.monotonicity_violations;
    j["concavity_violations"] = r.concavity_violations;
    j["evaluation_failures"] = r.evaluation_failures;
    j["feasible"] = r.feasible;
    j["max_roundtrip_error"] = r.max_roundtrip_error;
    j["messages"] = r.messages;
    return j;
}

// Exponents (p, q) when both utilities are plain power laws in (0, 1] with a
// zero defection point, i.e. when the closed form applies.
std::optional<std::pair<double, double>> power_exponents(const ProblemConfig& cfg) {
    if (!cfg.utility1.p || !cfg.utility2.p || cfg.d1 != 0.0 || cfg.d2 != 0.0) return std::nullopt;
    double p = *cfg.utility1.p, q = *cfg.utility2.p;
    if (!(p > 0.0 && p <= 1.0 && q > 0.0 && q <= 1.0)) return std::nullopt;
    return std::pair{p, q};
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Runs `body`, mapping rejected input to exit 2 with the message recorded.
template <class Body>
CommandResult guarded(const char* command, const ProblemConfig& cfg, const Options& opt, Body&& body) {
    CommandResult res;
    res.document = base_document(command, cfg, opt);
    try {
        body(res);
    } catch (const ConfigError& e) {
        res.exit_code = kExitConfig;
        res.document["status"] = "config_error";
        res.document["error"] = e.what();
    } catch (const std::exception& e) {
        res.exit_code = kExitConfig;
        res.document["status"] = "rejected_input";
        res.document["error"] = e.what();
    }
    return res;
}

// Validation gate shared by the solver commands; false means exit 2 is set.
bool validated(const BargainingProblem& prob, CommandResult& res) {
    ValidationReport report = validate_problem(prob);
    res.document["validation"] = validation_json(report);
    if (report.all_clear()) return true;
    res.exit_code = kExitConfig;
    res.document["status"] = "rejected_input";
    res.document["error"] = "problem fails the frontier hypotheses; see validation.messages";
    return false;
}

void mark_infeasible(CommandResult& res, const std::string& reason) {
    res.exit_code = kExitInfeasible;
    res.document["status"] = "infeasible";
    res.document["reason"] = reason;
}

std::string rounds_csv(const IterationTrace& t) {
    std::string out = "round,X_remaining,u1_star,w1_star,x1_claim,u2_star,w2_star,x2_claim,x1_total,x2_total\n";
    double x1 = 0.0, x2 = 0.0;
    for (const Round& r : t.rounds) {
        x1 += r.x1_claim;
        x2 += r.x2_claim;
        out += std::to_string(r.index);
        for (double v : {r.X_remaining, r.s1.u_star, r.s1.w_star, r.x1_claim, r.s2.u_star, r.s2.w_star, r.x2_claim, x1,
                         x2})
            out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

}  // namespace

std::string to_key_value_csv(const Json& doc) {
    std::string out = "key,value\n";
    flatten(doc, "", out);
    return out;
}

std::string to_json_text(const Json& doc) {
    std::string out;
    write_json(doc, 0, out);
    out += "\n";
    return out;
}

ProblemConfig parse_config(std::string_view text) {
    ProblemConfig cfg;
    try {
        cfg.raw = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    const Json& j = cfg.raw;
    if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
    static const std::array<const char*, 8> known{"X", "utility1", "utility2", "d1", "d2", "k1", "k2", "sweep"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError(it.key(), "unknown key");

    if (!j.contains("X")) throw ConfigError("X", "missing key");
    cfg.X = get_number(j, "X", "X");
    if (!(cfg.X > 0.0)) throw ConfigError("X", "resource must be positive");

    if (j.contains("sweep")) {
        const Json& s = j["sweep"];
        if (!s.is_object()) throw ConfigError("sweep", "expected an object");
        SweepGrid g;
        g.p = get_number_list(s, "p", "sweep.p");
        g.q = get_number_list(s, "q", "sweep.q");
        g.k1 = get_number_list(s, "k1", "sweep.k1");
        g.k2 = get_number_list(s, "k2", "sweep.k2");
        cfg.sweep = std::move(g);
    }
    const bool need_utilities = !cfg.sweep.has_value();
    for (const char* key : {"utility1", "utility2"}) {
        if (!j.contains(key)) {
            if (need_utilities) throw ConfigError(key, "missing key");
            continue;
        }
        (std::string(key) == "utility1" ? cfg.utility1 : cfg.utility2) = parse_utility(j[key], key);
    }
    if (j.contains("d1")) cfg.d1 = get_number(j, "d1", "d1");
    if (j.contains("d2")) cfg.d2 = get_number(j, "d2", "d2");
    for (const char* key : {"k1", "k2"}) {
        if (!j.contains(key)) continue;
        double k = get_number(j, key, key);
        if (!(k > 0.0 && k < 1.0)) throw ConfigError(key, "Weber constant must lie strictly inside (0, 1)");
        (std::string(key) == "k1" ? cfg.k1 : cfg.k2) = k;
    }
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

BargainingProblem make_problem(const ProblemConfig& cfg) {
    if (!cfg.utility1.p && !cfg.utility1.expr) throw ConfigError("utility1", "missing key");
    if (!cfg.utility2.p && !cfg.utility2.expr) throw ConfigError("utility2", "missing key");
    return {cfg.X, make_utility(cfg.utility1, "utility1"), make_utility(cfg.utility2, "utility2"), cfg.d1, cfg.d2};
}

WeberParams make_weber_params(const ProblemConfig& cfg) {
    if (!cfg.k1) throw ConfigError("k1", "missing key");
    if (!cfg.k2) throw ConfigError("k2", "missing key");
    return {*cfg.k1, *cfg.k2};
}

CommandResult cmd_solve(const ProblemConfig& cfg, const Options& opt) {
    return guarded("solve", cfg, opt, [&](CommandResult& res) {
        const BargainingProblem prob = make_problem(cfg);
        const WeberParams k = make_weber_params(cfg);
        if (!validated(prob, res)) return;
        Json& doc = res.document;

        const ThresholdOutcome o1 = solve_player1(prob, k);
        const ThresholdOutcome o2 = solve_player2(prob, k);
        if (!o1.ok() || !o2.ok()) {
            mark_infeasible(res, o1.ok() ? o2.reason : o1.reason);
            return;
        }
        doc["status"] = "ok";
        doc["player1"] = solution_json(*o1);
        doc["player2"] = solution_json(*o2);
        const double X = prob.resource();
        doc["eps1"] = o1->x_star / X;
        doc["eps2"] = o2->x_star / X;
        doc["resource_claimed"] = o1->x_star + o2->x_star;
        doc["exhausted"] = o1->x_star + o2->x_star >= X * (1.0 - 1e-12);
        doc["inequalities"] = theorem2_json(check_theorem2(*o1, *o2, prob));
        if (auto pq = power_exponents(cfg)) {
            const PowerClosedForm cf = closed_form_power(pq->first, pq->second, k, X);
            Json c = closed_form_json(cf);
            c["max_rel_error"] = std::max({rel_diff(o1->u_star, cf.u1_star), rel_diff(o2->u_star, cf.u2_star),
                                           rel_diff(o1->w_star, cf.w1_star), rel_diff(o2->w_star, cf.w2_star)});
            doc["closed_form"] = std::move(c);
        }
    });
}

CommandResult cmd_iterate(const ProblemConfig& cfg, const Options& opt) {
    return guarded("iterate", cfg, opt, [&](CommandResult& res) {
        const BargainingProblem prob = make_problem(cfg);
        const WeberParams k = make_weber_params(cfg);
        if (!validated(prob, res)) return;
        Json& doc = res.document;

        const IterationTrace t = run_iterative(prob, k, opt.tol, opt.max_rounds);
        doc["status"] = to_string(t.stop);
        if (!t.reason.empty()) doc["reason"] = t.reason;
        doc["tol"] = opt.tol;
        doc["max_rounds"] = opt.max_rounds;
        doc["rounds_run"] = t.rounds.size();
        doc["converged"] = t.converged;
        doc["x1_total"] = t.x1_total;
        doc["x2_total"] = t.x2_total;
        doc["residual_resource"] = t.residual_resource;
        if (auto pq = power_exponents(cfg)) {
            const PowerClosedForm cf = closed_form_power(pq->first, pq->second, k, prob.resource());
            auto [l1, l2] = geometric_limit_power(cf, prob.resource());
            doc["geometric_limit"] = {{"x1", l1}, {"x2", l2}, {"ratio_per_round", 1.0 - cf.eps1 - cf.eps2}};
        }
        Json rounds = Json::array();
        for (const Round& r : t.rounds) {
            Json jr;
            jr["index"] = r.index;
            jr["X_remaining"] = r.X_remaining;
            jr["x1_claim"] = r.x1_claim;
            jr["x2_claim"] = r.x2_claim;
            jr["player1"] = solution_json(r.s1);
            jr["player2"] = solution_json(r.s2);
            rounds.push_back(std::move(jr));
        }
        doc["rounds"] = std::move(rounds);
        res.csv = rounds_csv(t);
        if (t.stop == StopReason::Infeasible) res.exit_code = kExitInfeasible;
    });
}

CommandResult cmd_nash(const ProblemConfig& cfg, const Options& opt) {
    return guarded("nash", cfg, opt, [&](CommandResult& res) {
        const BargainingProblem prob = make_problem(cfg);
        if (!validated(prob, res)) return;
        Json& doc = res.document;

        double alpha = 0.5;
        if (opt.alpha)
            alpha = *opt.alpha;
        else if (cfg.k1 && cfg.k2)
            alpha = *cfg.k2 / (*cfg.k1 + *cfg.k2);
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "weight must lie strictly inside (0, 1)");

        const NashSolution n = solve_asymmetric_nash(prob, alpha);
        doc["status"] = "ok";
        doc["nash"] = {{"alpha", n.alpha}, {"u1", n.u1}, {"u2", n.u2}, {"x1", n.x1}, {"x2", prob.resource() - n.x1}};
        if (alpha == 0.5) {
            if (auto pq = power_exponents(cfg)) {
                double x1 = nash_power_closed_form(pq->first, pq->second, prob.resource());
                doc["closed_form_x1"] = x1;
                doc["closed_form_rel_error"] = rel_diff(n.x1, x1);
            }
        }
        if (cfg.k1 && cfg.k2) {
            const ThresholdOutcome o1 = solve_player1(prob, make_weber_params(cfg));
            if (o1.ok()) {
                doc["weber_player1"] = solution_json(*o1);
                doc["weber_vs_nash_rel_diff"] = rel_diff(o1->u_star, n.u1);
            } else {
                doc["weber_player1"] = {{"status", "infeasible"}, {"reason", o1.reason}};
            }
        }
    });
}

CommandResult cmd_plotdata(const ProblemConfig& cfg, const Options& opt) {
    return guarded("plotdata", cfg, opt, [&](CommandResult& res) {
        if (opt.samples < 2) throw ConfigError("samples", "need at least 2 samples");
        const BargainingProblem prob = make_problem(cfg);
        const WeberParams k = make_weber_params(cfg);
        if (!validated(prob, res)) return;
        Json& doc = res.document;

        const ThresholdOutcome o1 = solve_player1(prob, k);
        const ThresholdOutcome o2 = solve_player2(prob, k);
        if (!o1.ok() || !o2.ok()) {
            mark_infeasible(res, o1.ok() ? o2.reason : o1.reason);
            return;
        }

        const Interval r1 = prob.utility1_range();
        const auto n = static_cast<std::size_t>(opt.samples);
        Json frontier = Json::array();
        std::string csv = "u1,u2\n";
        for (std::size_t i = 0; i < n; ++i) {
            double u1 = (i == 0) ? r1.lo
                        : (i + 1 == n)
                            ? r1.hi
                            : r1.lo + r1.width() * (static_cast<double>(i) / static_cast<double>(n - 1));
            double u2 = pareto_h(prob, u1);
            frontier.push_back({u1, u2});
            csv += format_double(u1) + "," + format_double(u2) + "\n";
        }

        Json th;
        th["u1_star"] = o1->u_star;
        th["u1_upper"] = o1->u_star + o1->w_star;
        th["u2_star"] = o2->u_star;
        th["u2_upper"] = o2->u_star + o2->w_star;
        th["d1"] = prob.d1();
        th["d2"] = prob.d2();
        std::string th_csv = "name,value\n";
        for (auto it = th.begin(); it != th.end(); ++it)
            th_csv += it.key() + "," + format_double(it.value().get<double>()) + "\n";

        doc["status"] = "ok";
        doc["frontier"] = std::move(frontier);
        doc["thresholds"] = std::move(th);
        res.csv = std::move(csv);
        res.extra_csv.emplace_back(".thresholds.csv", std::move(th_csv));
    });
}

CommandResult cmd_sweep(const ProblemConfig& cfg, const Options& opt) {
    return guarded("sweep", cfg, opt, [&](CommandResult& res) {
        if (!cfg.sweep) throw ConfigError("sweep", "missing key");
        const SweepGrid& g = *cfg.sweep;
        std::string csv =
            "index,p,q,k1,k2,status,eps1,eps2,eps1_closed,eps2_closed,u1_star,u2_star,w1_star,w2_star,"
            "claimed_fraction,single_round,x1_limit,x2_limit\n";
        Json rows = Json::array();
        std::size_t index = 0;
        bool any_infeasible = false;
        for (double p : g.p)
            for (double q : g.q)
                for (double k1 : g.k1)
                    for (double k2 : g.k2) {
                        Json row;
                        row["index"] = index;
                        row["p"] = p;
                        row["q"] = q;
                        row["k1"] = k1;
                        row["k2"] = k2;
                        std::string line = std::to_string(index) + "," + format_double(p) + "," + format_double(q) +
                                           "," + format_double(k1) + "," + format_double(k2);
                        ++index;
                        std::string path = "sweep[" + std::to_string(row["index"].get<std::size_t>()) + "]";
                        WeberParams k = [&] {
                            try {
                                return WeberParams(k1, k2);
                            } catch (const std::invalid_argument& e) {
                                throw ConfigError(path + ".k", e.what());
                            }
                        }();
                        if (!(p > 0.0 && p <= 1.0) || !(q > 0.0 && q <= 1.0))
                            throw ConfigError(path + ".p/q", "exponents must lie in (0, 1]");
                        const BargainingProblem prob(cfg.X, UtilityFunction::power(p), UtilityFunction::power(q));
                        const ThresholdOutcome o1 = solve_player1(prob, k);
                        const ThresholdOutcome o2 = solve_player2(prob, k);
                        if (!o1.ok() || !o2.ok()) {
                            any_infeasible = true;
                            row["status"] = "infeasible";
                            rows.push_back(std::move(row));
                            csv += line + ",infeasible" + std::string(12, ',') + "\n";
                            continue;
                        }
                        const PowerClosedForm cf = closed_form_power(p, q, k, cfg.X);
                        const auto [l1, l2] = geometric_limit_power(cf, cfg.X);
                        const double claimed = (o1->x_star + o2->x_star) / cfg.X;
                        const bool single = claimed >= 1.0 - 1e-12;
                        const std::array<double, 9> vals{o1->x_star / cfg.X, o2->x_star / cfg.X, cf.eps1, cf.eps2,
                                                         o1->u_star,         o2->u_star,         o1->w_star,
                                                         o2->w_star,         claimed};
                        static const std::array<const char*, 9> names{"eps1",    "eps2",    "eps1_closed",
                                                                      "eps2_closed", "u1_star", "u2_star",
                                                                      "w1_star", "w2_star", "claimed_fraction"};
                        row["status"] = "ok";
                        line += ",ok";
                        for (std::size_t i = 0; i < vals.size(); ++i) {
                            row[names[i]] = vals[i];
                            line += "," + format_double(vals[i]);
                        }
                        row["single_round"] = single;
                        row["x1_limit"] = l1;
                        row["x2_limit"] = l2;
                        line += std::string(",") + (single ? "true" : "false") + "," + format_double(l1) + "," +
                                format_double(l2);
                        csv += line + "\n";
                        rows.push_back(std::move(row));
                    }
        res.document["status"] = any_infeasible ? "partial" : "ok";
        res.document["rows"] = std::move(rows);
        res.csv = std::move(csv);
    });
}

CommandResult cmd_check(const ProblemConfig& cfg, const Options& opt) {
    return guarded("check", cfg, opt, [&](CommandResult& res) {
        const BargainingProblem prob = make_problem(cfg);
        if (!validated(prob, res)) return;
        res.document["status"] = "ok";
    });
}

}  // namespace weber::cli

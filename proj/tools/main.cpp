#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace weber::cli;

constexpr const char* kGrammarHelp = R"(Utilities are given in the config as {"family": "power", "p": 0.5} or
{"expr": "<expression in x>"}. Expressions use + - * / ^ (right associative),
unary minus, parentheses, decimal literals and the functions exp, log, sqrt.
Precedence: ^ binds tighter than unary minus, which binds tighter than * /.

Exit codes: 0 success, 2 config or input error, 3 infeasible.)";

bool write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return static_cast<bool>(std::cout);
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-player bargaining under Weber's law"};
    app.footer(kGrammarHelp);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_path;
    std::string format_name;
    Options opt;
    double alpha = 0.0;
    bool no_timestamp = false;

    app.add_option("--config", config_path, "Problem config (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--tol", opt.tol, "Residual resource fraction at which iteration stops")
        ->check(CLI::PositiveNumber);
    app.add_option("--max-rounds", opt.max_rounds, "Iteration cap")->check(CLI::PositiveNumber);
    auto* alpha_opt = app.add_option("--alpha", alpha, "Nash weight of player 1 (default k2/(k1+k2), else 0.5)");
    app.add_option("--samples", opt.samples, "Frontier samples for plotdata");
    app.add_option("--out", out_path, "Output path (default stdout)");
    app.add_option("--format", format_name, "Output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--no-timestamp", no_timestamp, "Omit generated_at for byte-reproducible output");

    using Cmd = CommandResult (*)(const ProblemConfig&, const Options&);
    const std::map<std::string, std::pair<Cmd, Format>> commands{
        {"solve", {cmd_solve, Format::Json}},       {"iterate", {cmd_iterate, Format::Json}},
        {"nash", {cmd_nash, Format::Json}},         {"plotdata", {cmd_plotdata, Format::Csv}},
        {"sweep", {cmd_sweep, Format::Csv}},        {"check", {cmd_check, Format::Json}},
    };
    const std::map<std::string, std::string> descriptions{
        {"solve", "One-stage threshold solutions for both players"},
        {"iterate", "Repeated rounds over the remaining resource"},
        {"nash", "Asymmetric Nash bargaining solution"},
        {"plotdata", "Frontier samples and threshold lines"},
        {"sweep", "Grid of power-utility instances"},
        {"check", "Validate frontier hypotheses"},
    };
    for (const auto& [name, desc] : descriptions) app.add_subcommand(name, desc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const auto& [cmd, default_format] = commands.at(name);
    if (alpha_opt->count()) opt.alpha = alpha;
    opt.timestamp = !no_timestamp;
    const Format format = format_name.empty() ? default_format : (format_name == "csv" ? Format::Csv : Format::Json);

    ProblemConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        Json doc;
        doc["schema"] = kSchemaTag;
        doc["command"] = name;
        doc["status"] = "config_error";
        doc["error"] = e.what();
        if (!out_path.empty()) write_text(out_path, to_json_text(doc));
        return kExitConfig;
    }

    const CommandResult res = cmd(cfg, opt);
    if (res.document.contains("error")) std::cerr << name << ": " << res.document["error"].get<std::string>() << "\n";

    bool ok = true;
    if (format == Format::Csv && res.csv.empty()) {
        ok = write_text(out_path, to_key_value_csv(res.document));
    } else if (format == Format::Csv && res.exit_code == kExitOk) {
        ok = write_text(out_path, res.csv);
        for (const auto& [suffix, text] : res.extra_csv) {
            if (out_path.empty())
                ok = write_text("", "\n" + text) && ok;
            else
                ok = write_text(out_path + suffix, text) && ok;
        }
    } else {
        ok = write_text(out_path, to_json_text(res.document));
    }
    if (!ok) {
        std::cerr << "failed to write output\n";
        return 1;
    }
    return res.exit_code;
}

// rcover: command line front end for the random covering experiments.
//
//   rcover <command> [--config PATH] [--seed U64] [--out DIR] [--threads N]
//                    [--format csv|json] [--report]
//
// Exit codes: 0 success, 1 invalid input, 2 a checked identity or bound failed.

#include <rcover/config.hpp>
#include <rcover/experiment.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Random covering sets on the torus: energies, thresholds, simulations and measure diagnostics"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<std::string> format;
    bool report = false;
    bool dump_config = false;

    app.add_option("--config", config_path, "config file, or an artifact whose header embeds one");
    app.add_option("--seed", seed, "master seed (overrides run.seed)");
    app.add_option("--out", out, "output directory; the main artifact goes to stdout when omitted");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--report", report, "also write gnuplot data files");
    app.add_flag("--dump-config", dump_config, "print the resolved config and exit");

    const std::pair<const char*, const char*> commands[] = {
        {"energy", "t-energy of the [shape] section"},
        {"threshold", "critical exponents of the [family] section"},
        {"simulate", "place N random translates and summarize cover multiplicities"},
        {"dimension", "box-counting dimension of {count >= M} for each M in M_list"},
        {"intersect", "dimension of the intersection of two independent realizations"},
        {"weights", "measure weights c_{i,k} and their identities for each k in k_list"},
        {"diagnostics", "mean and variance of S_k against a test function"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return rcover::kExitValidation;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    rcover::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = rcover::load_config_file(config_path);
        }
    } catch (const rcover::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rcover::kExitValidation;
    }
    if (seed) cfg.run.seed = *seed;
    if (out) cfg.output.out = *out;
    if (threads) cfg.output.threads = *threads;
    if (format) cfg.output.format = *format;
    if (report) cfg.output.report = true;

    if (dump_config) {
        std::cout << rcover::serialize_config(cfg);
        return rcover::kExitOk;
    }

    rcover::RunResult res = rcover::run_command(command, cfg);
    if (res.exit_code == rcover::kExitValidation) {
        std::cerr << "error: " << res.error << "\n";
        return res.exit_code;
    }
    try {
        if (cfg.output.out.empty()) {
            std::cout << res.artifacts.front().content;
            rcover::RunResult rest;
            rest.artifacts.assign(res.artifacts.begin() + 1, res.artifacts.end());
            if (!rest.artifacts.empty()) {
                rcover::write_artifacts(rest, ".");
            }
        } else {
            rcover::write_artifacts(res, cfg.output.out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rcover::kExitValidation;
    }
    if (res.exit_code == rcover::kExitAssertion) {
        std::cerr << "assertion failure: " << res.violations.dump() << "\n";
    }
    return res.exit_code;
}

// fermicond: batch front end of the harness.
//
//   fermicond run <experiment> --config <path> [--seed N] [--workers K] [--out DIR]
//   fermicond validate-config <path>
//   fermicond cache {stats,clear}
//
// exit codes: 0 success, 2 invalid config or unknown experiment, 3 gate failure, 1 anything else

#include "fermicond/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

using namespace fermicond;

namespace {

void print_gates(const char* title, const std::vector<Gate>& gates) {
    if (gates.empty()) return;
    std::cout << title << "\n";
    for (const auto& g : gates)
        std::printf("  %-4s %-48s %.6g %s %.6g%s%s\n", g.pass ? "ok" : "FAIL", g.name.c_str(), g.value,
                    g.upper ? "<=" : ">=", g.limit, g.note.empty() ? "" : "  ", g.note.c_str());
}

int run_cmd(const std::string& exp, const std::string& path, std::optional<std::uint64_t> seed,
            std::optional<int> workers, std::optional<std::string> out) {
    ExperimentConfig cfg = load_config(path);
    if (seed) cfg.disorder.seed = *seed;
    if (workers) {
        if (*workers < 1 || *workers > 256) throw Error(ErrorKind::invalid_config, "--workers: must be in [1, 256]");
        cfg.run.workers = *workers;
    }
    if (out) cfg.run.out = *out;
    const RunManifest m = run_experiment(exp, cfg);
    std::cout << m.experiment << " | config " << m.config_hash.substr(0, 16) << " | " << m.files.size()
              << " files in " << cfg.run.out << "\n";
    print_gates("gates:", m.gates);
    print_gates("diagnostics (not gating):", m.diagnostics);
    std::cout << (m.passed ? "status: ok" : "status: gate failure") << "\n";
    return m.passed ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fermicond: transport coefficients of disordered lattice fermions"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    std::string exp, config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    auto* run = app.add_subcommand("run", "run a registered experiment");
    run->add_option("experiment", exp, "experiment name")->required();
    run->add_option("--config", config_path, "config file (JSON, comments allowed)")->required();
    run->add_option("--seed", seed, "overrides disorder.seed");
    run->add_option("--workers", workers, "overrides run.workers");
    run->add_option("--out", out, "overrides run.out");
    run->footer([] {
        std::string s = "experiments:";
        for (const auto& r : experiment_registry()) s += " " + r;
        return s;
    }());

    std::string vpath;
    auto* validate = app.add_subcommand("validate-config", "check a config and print its canonical form and hash");
    validate->add_option("path", vpath)->required();

    std::string action;
    auto* cache = app.add_subcommand("cache", "inspect or clear the eigendecomposition cache");
    cache->add_option("action", action)->required()->check(CLI::IsMember({"stats", "clear"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) return run_cmd(exp, config_path, seed, workers, out);
        if (*validate) {
            const ExperimentConfig cfg = load_config(vpath);
            std::cout << "config hash " << config_hash(cfg) << "\n" << config_to_json(cfg).dump(2) << "\n";
            return 0;
        }
        if (*cache) {
            const EigenCache c(EigenCache::default_dir());
            if (action == "stats")
                std::cout << c.dir().string() << ": " << c.entries() << " entries, " << c.bytes() << " bytes\n";
            else
                std::cout << "removed " << c.clear() << " entries from " << c.dir().string() << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return (e.kind() == ErrorKind::invalid_config || e.kind() == ErrorKind::unknown_experiment) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

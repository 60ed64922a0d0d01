#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "spdelab/lab/config.hpp"
#include "spdelab/lab/runner.hpp"

using namespace spdelab;
using namespace spdelab::lab;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 0;
};

ExperimentConfig load(const Options& opt) {
    std::ifstream in(opt.config_path);
    if (!in) throw Error(ErrorKind::Io, "cannot read config " + opt.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = parse_config(ss.str());
    apply_env_overrides(cfg);
    if (opt.seed) cfg.set("seed", static_cast<std::int64_t>(*opt.seed));
    if (!opt.out.empty()) cfg.set("output.dir", opt.out);
    return cfg;
}

int run(const Options& opt, const std::vector<ExperimentKind>& allowed, const std::string& command) {
    if (opt.threads > 0) omp_set_num_threads(opt.threads);
    const auto cfg = load(opt);
    bool ok = false;
    for (auto k : allowed) ok = ok || k == cfg.kind();
    if (!ok) {
        std::cerr << command << ": experiment.kind '" << to_string(cfg.kind()) << "' is not handled here\n";
        return 2;
    }
    const auto bundle = run_experiment(cfg);
    write_bundle(bundle, cfg, cfg.text("output.dir"));
    for (const auto& c : bundle.checks)
        std::printf("%-4s %-48s %s %.6g (tol %.6g, se %.3g)\n", c.passed ? "ok" : "FAIL", c.id.c_str(),
                    c.relation.c_str(), c.measured, c.tolerance, c.std_error);
    std::printf("%s: %s in %.1fs, report in %s\n", to_string(bundle.kind), bundle.passed() ? "passed" : "FAILED",
                bundle.runtime_seconds, cfg.text("output.dir").c_str());
    return bundle.passed() ? 0 : 1;
}

void add_common(CLI::App* sub, Options& opt) {
    sub->add_option("--config", opt.config_path, "experiment config (key = value)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--out", opt.out, "override output.dir");
    sub->add_option("--threads", opt.threads, "OpenMP threads (speed only)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spdelab: spectral SPDE experiments"};
    app.require_subcommand(1);
    Options opt;
    struct Command {
        const char* name;
        const char* help;
        std::vector<ExperimentKind> kinds;
    };
    const std::vector<Command> commands = {
        {"simulate", "ou_validate or kernel_norms", {ExperimentKind::OuValidate, ExperimentKind::KernelNorms}},
        {"solve", "Kolmogorov solver checks", {ExperimentKind::Kolmogorov}},
        {"girsanov", "change-of-measure checks", {ExperimentKind::Girsanov}},
        {"zvonkin", "Ito-Tanaka identity residuals", {ExperimentKind::Zvonkin}},
        {"examples", "uniqueness_by_noise or deterministic_nonuniqueness",
         {ExperimentKind::UniquenessByNoise, ExperimentKind::DeterministicNonuniqueness}},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        subs.push_back(app.add_subcommand(c.name, c.help));
        add_common(subs.back(), opt);
    }
    auto* validate = app.add_subcommand("validate", "parse a config and print its canonical form");
    validate->add_option("--config", opt.config_path)->required()->check(CLI::ExistingFile);
    bool print = false;
    validate->add_flag("--print", print, "print every key");

    CLI11_PARSE(app, argc, argv);
    try {
        if (validate->parsed()) {
            const auto cfg = load(opt);
            if (print) std::cout << serialize_config(cfg);
            std::cout << "config ok: " << to_string(cfg.kind()) << "\n";
            return 0;
        }
        for (std::size_t i = 0; i < commands.size(); ++i)
            if (subs[i]->parsed()) return run(opt, commands[i].kinds, commands[i].name);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

// Runs every acceptance criterion from the configs directory and prints one line each.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spdelab/lab/config.hpp"
#include "spdelab/csv.hpp"
#include "spdelab/lab/runner.hpp"

using namespace spdelab::lab;

namespace {

struct Criterion {
    int id;
    const char* title;
    const char* config;
};

const std::vector<Criterion> kCriteria = {
    {1, "OU exactness", "ou_validate.cfg"},
    {2, "T_lambda contraction", "contraction.cfg"},
    {3, "scalar solution bounds", "bounds.cfg"},
    {4, "gradient decay", "gradient_decay.cfg"},
    {5, "Girsanov weights", "girsanov.cfg"},
    {6, "Zvonkin identity", "zvonkin.cfg"},
    {7, "regularity functional", "regularity.cfg"},
    {8, "deterministic non-uniqueness", "deterministic_nonuniqueness.cfg"},
    {9, "uniqueness by noise", "uniqueness_by_noise.cfg"},
    {10, "kernel norms", "kernel_norms.cfg"},
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path config_dir = SPDELAB_CONFIG_DIR;
    const std::filesystem::path out_dir = argc > 1 ? argv[1] : "acceptance_reports";
    int failures = 0;
    for (const auto& c : kCriteria) {
        std::string detail;
        bool ok = false;
        try {
            auto cfg = parse_config(read_file(config_dir / c.config));
            const auto bundle = run_experiment(cfg);
            write_bundle(bundle, cfg, out_dir / std::filesystem::path(c.config).stem());
            const auto checks = bundle.criterion(c.id);
            ok = !checks.empty();
            std::size_t failed = 0;
            for (const auto& k : checks) {
                if (!k.passed) {
                    ok = false;
                    if (failed++ == 0)
                        detail = k.id + " " + k.relation + " measured " + spdelab::format_number(k.measured) +
                                 " tol " + spdelab::format_number(k.tolerance);
                }
            }
            if (ok) detail = std::to_string(checks.size()) + " checks";
            char buf[64];
            std::snprintf(buf, sizeof(buf), ", %.1fs", bundle.runtime_seconds);
            detail += buf;
        } catch (const std::exception& e) {
            detail = std::string("error: ") + e.what();
        }
        std::printf("AC%-2d %s  %s (%s)\n", c.id, ok ? "PASS" : "FAIL", c.title, detail.c_str());
        std::fflush(stdout);
        failures += !ok;
    }
    return failures == 0 ? 0 : 1;
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdelab/errors.hpp"
#include "spdelab/lab/config.hpp"
#include "spdelab/lab/plotdata.hpp"
#include "spdelab/lab/runner.hpp"

using namespace spdelab;
using namespace spdelab::lab;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kDeterministic = R"(
experiment.kind = deterministic_nonuniqueness
spectrum.m = 1
spectrum.c = 0
drift.kind = b_dir_1d
paths.x0 = 0.3
grid.T = 1
grid.steps = 64
variants.t_branch = 0.5
)";

}  // namespace

TEST_CASE("config roundtrip") {
    const auto cfg = parse_config("experiment.kind = kolmogorov\nspectrum.m = 3  # modes\ndrift.weights = 0.5, 0.25\n");
    CHECK(cfg.kind() == ExperimentKind::Kolmogorov);
    CHECK(cfg.integer("spectrum.m") == 3);
    CHECK(cfg.list("drift.weights") == std::vector<double>{0.5, 0.25});
    const auto again = parse_config(serialize_config(cfg));
    CHECK(again == cfg);
    CHECK(serialize_config(again) == serialize_config(cfg));
}

TEST_CASE("config violations are all reported") {
    try {
        parse_config("foo = 1\nspectrum.m = three\ndiagnostics.enabled = true\ndiagnostics.q = 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const auto& v = e.violations();
        REQUIRE(v.size() >= 3);
        CHECK(v[0].kind == ErrorKind::UnknownKey);
        CHECK(v[0].line == 1);
        CHECK(v[0].message.find("foo") != std::string::npos);
        CHECK(v[1].kind == ErrorKind::TypeMismatch);
        bool q_rule = false;
        for (const auto& x : v) q_rule = q_rule || (x.kind == ErrorKind::InvariantViolation && x.key == "diagnostics.q");
        CHECK(q_rule);
        CHECK(std::string(e.what()).find("q > 4") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("spectrum.file = /nonexistent/op.txt\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("experiment.kind = dance\n"), ConfigError);
}

TEST_CASE("environment overrides") {
    CHECK(env_name("spectrum.m") == "SPDELAB_SPECTRUM_M");
    auto cfg = parse_config("spectrum.m = 2\n");
    setenv("SPDELAB_SPECTRUM_M", "5", 1);
    apply_env_overrides(cfg);
    unsetenv("SPDELAB_SPECTRUM_M");
    CHECK(cfg.integer("spectrum.m") == 5);
    setenv("SPDELAB_GRID_T", "soon", 1);
    CHECK_THROWS_AS(apply_env_overrides(cfg), ConfigError);
    unsetenv("SPDELAB_GRID_T");
}

TEST_CASE("plot data") {
    ReportBundle empty;
    CHECK(emit_plotdata(empty) == "series,x,y,y_err\n");
    ReportBundle missing;
    missing.required_series = {"sup_distance_vs_dt"};
    try {
        emit_plotdata(missing);
        FAIL("expected MissingSeries");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingSeries);
    }
}

TEST_CASE("deterministic non-uniqueness report") {
    const auto cfg = parse_config(kDeterministic);
    const auto rb = run_experiment(cfg);
    CHECK(rb.passed());
    CHECK(rb.metrics["distinct_solutions"].get<int>() >= 2);
    CHECK_FALSE(rb.metrics["regularizing"].get<bool>());
}

TEST_CASE("reruns write byte-identical csv files") {
    auto cfg = parse_config(kDeterministic);
    const auto dir = std::filesystem::temp_directory_path() / "spdelab_determinism";
    std::filesystem::remove_all(dir);
    write_bundle(run_experiment(cfg), cfg, dir / "a");
    write_bundle(run_experiment(cfg), cfg, dir / "b");
    std::size_t compared = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
        if (entry.path().extension() != ".csv") continue;
        CHECK(read_file(entry.path()) == read_file(dir / "b" / entry.path().filename()));
        ++compared;
    }
    CHECK(compared >= 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("uniqueness by noise report has the refinement series") {
    const auto cfg = parse_config(R"(
experiment.kind = uniqueness_by_noise
spectrum.m = 2
drift.kind = composite_4_4
drift.weights = 0.5
paths.x0 = 0.3, 0.1
paths.count = 8
grid.T = 0.5
grid.steps = 32
grid.refinements = 3
)");
    const auto rb = run_experiment(cfg);
    const auto* s = rb.find_series("sup_distance_vs_dt");
    REQUIRE(s != nullptr);
    CHECK(s->points.size() == 4);
    CHECK(emit_plotdata(rb).find("sup_distance_vs_dt,") != std::string::npos);
}

TEST_CASE("ou_validate covariance check on a small run") {
    const auto cfg = parse_config("experiment.kind = ou_validate\nspectrum.m = 8\ngrid.steps = 4\npaths.count = 20000\n");
    const auto rb = run_experiment(cfg);
    CHECK(rb.criterion(1).size() == 9);
    std::size_t passed = 0;
    for (const auto& c : rb.checks) passed += c.passed;
    CHECK(passed >= 8);
}

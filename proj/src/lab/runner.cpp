#include "spdelab/lab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "spdelab/csv.hpp"
#include "spdelab/dirichlet.hpp"
#include "spdelab/gaussian.hpp"
#include "spdelab/girsanov.hpp"
#include "spdelab/kolmogorov.hpp"
#include "spdelab/lab/plotdata.hpp"
#include "spdelab/path_engine.hpp"
#include "spdelab/stats.hpp"
#include "spdelab/zvonkin.hpp"

namespace spdelab::lab {

bool ReportBundle::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<Check> ReportBundle::criterion(int id) const {
    std::vector<Check> out;
    for (const auto& c : checks)
        if (c.criterion == id) out.push_back(c);
    return out;
}

const Series* ReportBundle::find_series(const std::string& name) const {
    for (const auto& s : series)
        if (s.name == name) return &s;
    return nullptr;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Check upper(std::string id, int criterion, double measured, double tolerance, double se = 0.0,
            std::string note = "") {
    return {std::move(id), criterion, "<=", measured, tolerance, se, measured <= tolerance, std::move(note)};
}

Check lower(std::string id, int criterion, double measured, double tolerance, double se = 0.0,
            std::string note = "") {
    return {std::move(id), criterion, ">=", measured, tolerance, se, measured >= tolerance, std::move(note)};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> config_rates(const ExperimentConfig& cfg) {
    const auto m = static_cast<std::size_t>(cfg.integer("spectrum.m"));
    std::vector<double> r(m);
    for (std::size_t k = 0; k < m; ++k)
        r[k] = cfg.real("spectrum.c") * std::pow(static_cast<double>(k + 1), cfg.real("spectrum.alpha"));
    return r;
}

SpectralOperator make_operator(const ExperimentConfig& cfg) {
    const auto& file = cfg.text("spectrum.file");
    if (!file.empty()) {
        std::ifstream in(file);
        require(static_cast<bool>(in), ErrorKind::Io, "cannot read " + file);
        std::stringstream ss;
        ss << in.rdbuf();
        return SpectralOperator::parse(ss.str());
    }
    return SpectralOperator::power_law(static_cast<std::size_t>(cfg.integer("spectrum.m")), cfg.real("spectrum.c"),
                                       cfg.real("spectrum.alpha"), cfg.real("spectrum.delta"));
}

LinearDrift make_linear(const ExperimentConfig& cfg) {
    if (!cfg.text("spectrum.file").empty()) return LinearDrift(make_operator(cfg));
    return LinearDrift(config_rates(cfg));
}

QuadratureSpec make_quad(const ExperimentConfig& cfg) {
    QuadratureSpec q;
    q.mc_samples = static_cast<std::size_t>(cfg.integer("quadrature.mc_samples"));
    q.time_nodes = static_cast<std::size_t>(cfg.integer("quadrature.time_nodes"));
    q.grid_points = static_cast<std::size_t>(cfg.integer("quadrature.grid_points"));
    q.grid_half_width = cfg.real("quadrature.grid_half_width");
    q.hermite_nodes = static_cast<std::size_t>(cfg.integer("quadrature.hermite_nodes"));
    q.seed = cfg.seed();
    q.validate();
    return q;
}

State initial_state(const ExperimentConfig& cfg, std::size_t m) {
    State x(m, 0.0);
    const auto& given = cfg.list("paths.x0");
    for (std::size_t k = 0; k < std::min(m, given.size()); ++k) x[k] = given[k];
    return x;
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

DriftField raw_drift(const std::string& kind, const ExperimentConfig& cfg, std::size_t m) {
    const double a = cfg.real("drift.scale");
    using Fn = std::function<State(std::span<const double>)>;
    const auto first_mode = [&](std::function<double(double)> g, double bound, Smoothness s) {
        return DriftField(m, a * bound, s,
                          Fn([a, m, g](std::span<const double> x) {
                              State b(m, 0.0);
                              b[0] = a * g(x[0]);
                              return b;
                          }),
                          kind);
    };
    if (kind == "zero") return DriftField::zero(m);
    if (kind == "constant") {
        State v(m, 0.0);
        v[0] = a;
        return DriftField::constant(v);
    }
    if (kind == "smooth") {
        double bound2 = 0.0;
        for (std::size_t k = 0; k < m; ++k) bound2 += std::pow(0.25, static_cast<double>(k));
        return DriftField(m, a * std::sqrt(bound2), Smoothness::Smooth,
                          Fn([a, m](std::span<const double> x) {
                              State b(m);
                              for (std::size_t k = 0; k < m; ++k) {
                                  const double w = std::pow(0.5, static_cast<double>(k));
                                  b[k] = a * w * std::sin(x[k] + (m > 1 ? 0.5 * x[(k + 1) % m] : 0.0));
                              }
                              return b;
                          }),
                          kind);
    }
    if (kind == "sign") return first_mode(sgn, 1.0, Smoothness::Measurable);
    if (kind == "indicator") return first_mode([](double x) { return x > 0.0 ? 1.0 : 0.0; }, 1.0, Smoothness::Measurable);
    if (kind == "two_jumps")
        return first_mode([](double x) { return std::abs(x) < 0.5 ? 1.0 : -1.0; }, 1.0, Smoothness::Measurable);
    if (kind == "clamp_sign")
        return first_mode([](double x) { return 0.5 * std::clamp(2.0 * x, -1.0, 1.0) + 0.5 * sgn(x); }, 1.0,
                          Smoothness::Measurable);
    DirichletParams p;
    p.dim = m;
    p.weights = cfg.list("drift.weights");
    p.lambda1 = cfg.real("drift.lambda1");
    if (kind == "b_dir_1d") {
        require(m == 1, ErrorKind::DimensionMismatch, "b_dir_1d needs spectrum.m = 1");
        return dirichlet_drift(DirichletKind::BDir1d, p);
    }
    if (kind == "B_dir_product") return dirichlet_drift(DirichletKind::BDirProduct, p);
    if (kind == "composite_4_4") return dirichlet_drift(DirichletKind::Composite44, p);
    throw Error(ErrorKind::InvalidArgument, "unknown drift kind '" + kind + "'");
}

/// `name` or `name@n`; mollification and tabulation need an operator (regularizing spectrum).
DriftField make_drift(const std::string& spec, const ExperimentConfig& cfg, const SpectralOperator& op) {
    std::string kind = spec;
    auto n = static_cast<std::size_t>(cfg.integer("drift.mollify"));
    if (auto at = spec.find('@'); at != std::string::npos) {
        kind = spec.substr(0, at);
        n = static_cast<std::size_t>(std::stoul(spec.substr(at + 1)));
    }
    DriftField B = raw_drift(kind, cfg, op.dim());
    QuadratureSpec q = make_quad(cfg);
    if (n > 0) {
        q.mc_samples = static_cast<std::size_t>(cfg.integer("drift.mollify_samples"));
        B = mollify_drift(op, B, n, q);
    }
    if (cfg.flag("drift.tabulate") && !B.is_zero()) B = tabulate_drift(B, solver_grid(op, q));
    return B;
}

std::vector<std::string> corpus(const ExperimentConfig& cfg) {
    auto names = split_list(cfg.text("drift.corpus"));
    if (names.empty()) names.push_back(cfg.text("drift.kind"));
    return names;
}

/// Admissible lambda for the vector equation, times solver.lambda_factor.
double vector_lambda(const ExperimentConfig& cfg, const SpectralOperator& op, const DriftField& B) {
    return cfg.real("solver.lambda_factor") * std::max(lambda0(op, B), 2.0 * B.sup_norm_bound());
}

std::string csv_string(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    CsvWriter w(out, header);
    for (const auto& r : rows) w.row(r);
    return out.str();
}

// ---------------------------------------------------------------------------------------------

void run_ou_validate(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto t0 = Clock::now();
    const LinearDrift lin = make_linear(cfg);
    const std::size_t m = lin.dim();
    const TimeGrid grid(cfg.real("grid.T"), static_cast<std::size_t>(cfg.integer("grid.steps")));
    const auto n = static_cast<std::size_t>(cfg.integer("paths.count"));
    const State x(m, 0.0);
    std::vector<double> terminal(n * m);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        const auto path = simulate_ou(lin, x, grid, cfg.seed(), static_cast<std::uint32_t>(i));
        for (std::size_t k = 0; k < m; ++k) terminal[i * m + k] = path.at(grid.steps, k);
    }
    const double elapsed = seconds_since(t0);

    Series series{"variance_vs_mode", {}};
    std::vector<std::vector<double>> rows;
    const auto steps = step_coefficients(lin, grid.horizon);
    std::vector<double> column(n);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = terminal[i * m + k];
        const auto est = mean_estimate(column);
        std::vector<double> c4(n);
        for (std::size_t i = 0; i < n; ++i) c4[i] = std::pow(column[i] - est.mean, 4);
        const double mu4 = pairwise_sum(c4) / static_cast<double>(n);
        const double se = std::sqrt(std::max(mu4 - est.variance * est.variance, 0.0) / static_cast<double>(n));
        const double exact = steps.var[k];
        rb.checks.push_back(upper("ou_variance_mode_" + std::to_string(k + 1), 1, std::abs(est.variance - exact),
                                  3.0 * se, se, "exact " + format_number(exact)));
        rows.push_back({static_cast<double>(k + 1), lin.rates[k], exact, est.variance, se});
        series.points.push_back({static_cast<double>(k + 1), est.variance / exact, se / exact});
    }
    rb.checks.push_back(upper("ou_runtime_seconds", 1, elapsed, 10.0));
    rb.metrics["paths"] = n;
    rb.metrics["simulation_seconds"] = elapsed;
    rb.series.push_back(std::move(series));
    rb.required_series = {"variance_vs_mode"};
    rb.csv_files["variance.csv"] = csv_string({"mode", "lambda", "exact", "empirical", "std_error"}, rows);
}

// ---------------------------------------------------------------------------------------------

ScalarField sign_field() {
    ScalarField f;
    f.eval = [](std::span<const double> y) { return sgn(y[0]); };
    f.sup_norm_bound = 1.0;
    return f;
}

double worst_ratio(const std::vector<double>& history, double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < history.size(); ++i)
        if (history[i + 1] > floor) worst = std::max(worst, history[i + 1] / history[i]);
    return worst;
}

void kolmogorov_contraction(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto t0 = Clock::now();
    const auto op = make_operator(cfg);
    const auto B = make_drift(cfg.text("drift.kind"), cfg, op);
    const auto quad = make_quad(cfg);
    const double lambda = cfg.real("solver.lambda_factor") * lambda0(op, B);
    const auto phi = sign_field();
    const auto probes = sample(GaussianMeasure::invariant(op), static_cast<std::size_t>(cfg.integer("solver.probes")),
                               cfg.seed() + 1);
    const double bound = 0.5 * phi.sup_norm_bound;
    double worst = 0.0, worst_se = 0.0, worst_margin = -1e300;
    Series series{"contraction_probe", {}};
    std::vector<std::vector<double>> rows;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const auto est = apply_t_lambda(op, B, lambda, phi, probes[p], quad);
        const double margin = std::abs(est.value) - (bound + 5.0 * est.std_error);
        if (margin > worst_margin) {
            worst_margin = margin;
            worst = std::abs(est.value);
            worst_se = est.std_error;
        }
        series.points.push_back({static_cast<double>(p), est.value, est.std_error});
        State row = probes[p];
        row.push_back(est.value);
        row.push_back(est.std_error);
        rows.push_back(row);
    }
    rb.checks.push_back(upper("t_lambda_sup_over_probes", 2, worst, bound + 5.0 * worst_se, worst_se,
                              "worst probe relative to 0.5 + 5 SE"));
    const auto sol = solve_scalar(op, B, phi, lambda, quad, static_cast<std::size_t>(cfg.integer("solver.max_iter")),
                                  cfg.real("solver.tol"));
    const auto& hist = sol.provenance().residual_history;
    const double ratio = worst_ratio(hist, 100.0 * cfg.real("solver.tol"));
    rb.checks.push_back(upper("neumann_sweep_ratio", 2, ratio, 0.55));
    const double elapsed = seconds_since(t0);
    rb.checks.push_back(upper("contraction_runtime_seconds", 2, elapsed, 120.0));
    rb.metrics["lambda"] = lambda;
    rb.metrics["iterations"] = sol.provenance().iterations;
    rb.metrics["residual_history"] = hist;
    Series neumann{"neumann_residual", {}};
    for (std::size_t i = 0; i < hist.size(); ++i) neumann.points.push_back({static_cast<double>(i + 1), hist[i], 0.0});
    rb.series.push_back(std::move(series));
    rb.series.push_back(std::move(neumann));
    rb.required_series = {"contraction_probe", "neumann_residual"};
    auto header = mode_columns(op.dim(), "x_");
    header.push_back("t_lambda_phi");
    header.push_back("std_error");
    rb.csv_files["contraction_probes.csv"] = csv_string(header, rows);
}

/// (1/2) u'' + (b(x) - lambda_1 x) u' - lambda u = -f on [-L, L], reflecting ends, central differences.
std::vector<double> ode_oracle(double lambda1, double lambda, const std::function<double(double)>& b,
                               const std::function<double(double)>& f, double L, std::size_t n) {
    const double h = 2.0 * L / static_cast<double>(n - 1);
    std::vector<double> lo(n), di(n), up(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -L + h * static_cast<double>(i);
        const double drift = b(x) - lambda1 * x;
        lo[i] = 0.5 / (h * h) - drift / (2.0 * h);
        up[i] = 0.5 / (h * h) + drift / (2.0 * h);
        di[i] = -1.0 / (h * h) - lambda;
        rhs[i] = -f(x);
    }
    up[0] += lo[0];
    lo[0] = 0.0;
    lo[n - 1] += up[n - 1];
    up[n - 1] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lo[i] / di[i - 1];
        di[i] -= w * up[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> u(n);
    u[n - 1] = rhs[n - 1] / di[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i] = (rhs[i] - up[i] * u[i + 1]) / di[i];
    return u;
}

void kolmogorov_bounds(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto t0 = Clock::now();
    const auto op = make_operator(cfg);
    const auto B = make_drift(cfg.text("drift.kind"), cfg, op);
    const auto quad = make_quad(cfg);
    const double lambda = cfg.real("solver.lambda_factor") * lambda0(op, B);
    const auto f = B.component_field(0);
    const auto sol = solve_scalar(op, B, f, lambda, quad, static_cast<std::size_t>(cfg.integer("solver.max_iter")),
                                  cfg.real("solver.tol"));
    const auto probes = sample(GaussianMeasure::invariant(op), static_cast<std::size_t>(cfg.integer("solver.probes")),
                               cfg.seed() + 1);
    double sup_u = 0.0;
    for (const auto& p : probes) sup_u = std::max(sup_u, std::abs(sol.value(p)));
    const double fnorm = std::max(f.sup_norm_bound, 1e-300);
    rb.checks.push_back(upper("sup_u_over_sup_f", 3, sup_u / fnorm, 2.0, 0.0, "grid solver, no sampling error"));
    std::ostringstream probe_csv;
    write_probe_csv(probe_csv, sol, probes);
    rb.csv_files["probes.csv"] = probe_csv.str();

    // Finite-difference oracle: m = 1, lambda_1 = 1, b = 0.5 sin x, f = cos x, lambda = 4.
    const SpectralOperator op1({1.0}, op.delta());
    const auto b = [](double x) { return 0.5 * std::sin(x); };
    const auto g = [](double x) { return std::cos(x); };
    const DriftField B1(1, 0.5, Smoothness::Smooth,
                        std::function<State(std::span<const double>)>(
                            [b](std::span<const double> x) { return State{b(x[0])}; }),
                        "oracle");
    ScalarField f1;
    f1.eval = [g](std::span<const double> x) { return g(x[0]); };
    f1.sup_norm_bound = 1.0;
    f1.smoothness = Smoothness::Smooth;
    QuadratureSpec q1 = quad;
    q1.grid_points = 0;
    const auto sol1 = solve_scalar(op1, B1, f1, 4.0, q1);
    const std::size_t n = 16001;
    const double L = 8.0;
    const auto u = ode_oracle(1.0, 4.0, b, g, L, n);
    double err = 0.0;
    Series series{"oracle_difference", {}};
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = -L + 2.0 * L * static_cast<double>(i) / static_cast<double>(n - 1);
        if (std::abs(x) > 3.0) continue;
        const double v = sol1.value(State{x});
        err = std::max(err, std::abs(v - u[i]));
        if (i % 100 == 0) {
            series.points.push_back({x, v - u[i], 0.0});
            rows.push_back({x, v, u[i]});
        }
    }
    rb.checks.push_back(upper("ode_oracle_sup_error", 3, err, 1e-3));
    const double elapsed = seconds_since(t0);
    rb.checks.push_back(upper("bounds_runtime_seconds", 3, elapsed, 300.0));
    rb.metrics["lambda"] = lambda;
    rb.metrics["sup_u"] = sup_u;
    rb.metrics["oracle_sup_error"] = err;
    rb.series.push_back(std::move(series));
    rb.required_series = {"oracle_difference"};
    rb.csv_files["oracle.csv"] = csv_string({"x", "grid_solver", "finite_difference"}, rows);
}

void kolmogorov_gradient_decay(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto op = make_operator(cfg);
    const auto quad = make_quad(cfg);
    const auto& ladder = cfg.list("solver.lambda_ladder");
    require(ladder.size() >= 2, ErrorKind::InvariantViolation, "solver.lambda_ladder needs two entries");
    std::vector<std::vector<double>> rows;
    for (const auto& name : corpus(cfg)) {
        const auto B = make_drift(name, cfg, op);
        const double base = vector_lambda(cfg, op, B);
        std::vector<double> c3, sup;
        Series series{"gradient_vs_lambda_" + name, {}};
        for (double factor : ladder) {
            const double lambda = base * factor;
            const auto sol = solve_vector(op, B, lambda, quad, static_cast<std::size_t>(cfg.integer("solver.max_iter")),
                                          cfg.real("solver.tol"));
            sup.push_back(sol.sup_gradient());
            c3.push_back(sup.back() * std::sqrt(lambda));
            series.points.push_back({lambda, sup.back(), 0.0});
            rows.push_back({static_cast<double>(rows.size()), lambda, sup.back(), c3.back()});
        }
        for (std::size_t j = 0; j + 1 < sup.size(); ++j)
            rb.checks.push_back(upper("gradient_ratio_" + name + "_" + std::to_string(j), 4, sup[j + 1] / sup[j], 0.55,
                                      0.0, "lambda ratio " + format_number(ladder[j + 1] / ladder[j])));
        const double mean = pairwise_sum(c3) / static_cast<double>(c3.size());
        double spread = 0.0;
        for (double c : c3) spread = std::max(spread, std::abs(c / mean - 1.0));
        rb.checks.push_back(upper("c3_spread_" + name, 4, spread, 0.2, 0.0, "c3 mean " + format_number(mean)));
        rb.metrics["c3"][name] = c3;
        rb.series.push_back(std::move(series));
        rb.required_series.push_back("gradient_vs_lambda_" + name);
    }
    rb.csv_files["gradient_decay.csv"] = csv_string({"row", "lambda", "sup_gradient", "c3"}, rows);
}

void kolmogorov_regularity(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto op = make_operator(cfg);
    RegularityDiagnostics diag;
    diag.q = cfg.real("diagnostics.q");
    diag.gamma = cfg.real("diagnostics.gamma");
    diag.delta = cfg.real("diagnostics.delta");
    diag.theta = cfg.real("diagnostics.theta");
    diag.R = cfg.real("diagnostics.R");
    diag.horizon = cfg.real("grid.T");
    diag.validate(op);
    const auto points0 = static_cast<std::size_t>(cfg.integer("diagnostics.points"));
    const auto mu = GaussianMeasure::invariant(op);
    std::vector<std::vector<double>> rows;
    std::vector<double> values;
    Series series{"regularity_vs_points", {}};
    for (int refine = 0; refine < 2; ++refine) {
        ExperimentConfig c = cfg;
        const std::int64_t scale = refine ? 2 : 1;
        c.set("quadrature.hermite_nodes", cfg.integer("quadrature.hermite_nodes") * scale);
        c.set("drift.mollify_samples", cfg.integer("drift.mollify_samples") * scale);
        const auto B = make_drift(c.text("drift.kind"), c, op);
        const auto quad = make_quad(c);
        const double lambda = vector_lambda(c, op, B);
        const auto sol = solve_vector(op, B, lambda, quad, static_cast<std::size_t>(c.integer("solver.max_iter")),
                                      c.real("solver.tol"));
        for (std::size_t mult : {std::size_t{1}, std::size_t{2}}) {
            const auto pts = halton_sample(mu, points0 * mult);
            const double S = regularity_functional(op, sol, pts, diag);
            values.push_back(S);
            rows.push_back({static_cast<double>(scale), static_cast<double>(points0 * mult), S});
            series.points.push_back({static_cast<double>(points0 * mult), S, 0.0});
        }
        rb.metrics["lambda"] = lambda;
    }
    bool finite = std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v) && v >= 0.0; });
    double spread = 0.0;
    for (double v : values) spread = std::max(spread, std::abs(v / values.front() - 1.0));
    rb.checks.push_back({"regularity_functional_finite", 7, "finite", values.front(), 0.0, 0.0, finite, ""});
    rb.checks.push_back(upper("regularity_functional_spread", 7, spread, 0.1, 0.0,
                              "doubling points and Hermite/mollification samples"));
    rb.metrics["S_T"] = values;
    rb.series.push_back(std::move(series));
    rb.required_series = {"regularity_vs_points"};
    rb.csv_files["regularity.csv"] = csv_string({"sample_scale", "points", "S_T"}, rows);
}

void run_kolmogorov(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto& check = cfg.text("solver.check");
    if (check == "contraction") return kolmogorov_contraction(cfg, rb);
    if (check == "bounds") return kolmogorov_bounds(cfg, rb);
    if (check == "gradient_decay") return kolmogorov_gradient_decay(cfg, rb);
    if (check == "regularity") return kolmogorov_regularity(cfg, rb);
    throw Error(ErrorKind::InvalidArgument, "unknown solver.check '" + check + "'");
}

// ---------------------------------------------------------------------------------------------

void run_girsanov(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto op = make_operator(cfg);
    const LinearDrift lin(op);
    const State x = initial_state(cfg, op.dim());
    const auto n = static_cast<std::size_t>(cfg.integer("paths.count"));
    const auto steps0 = static_cast<std::size_t>(cfg.integer("grid.steps"));
    const auto rungs = static_cast<std::size_t>(cfg.integer("grid.refinements")) + 1;
    const double T = cfg.real("grid.T");
    const auto functional = parse_functional(cfg.text("paths.functional"));
    ScalarField f;
    f.eval = [](std::span<const double> y) { return std::tanh(y[0]); };
    f.sup_norm_bound = 1.0;
    std::vector<std::vector<double>> rows;
    bool first = true;
    for (const auto& name : corpus(cfg)) {
        const auto t0 = Clock::now();
        const auto B = make_drift(name, cfg, op);
        const double b = B.sup_norm_bound();
        std::size_t segments = 1;
        while (0.5 * b * b * T / static_cast<double>(segments) > 0.5) segments *= 2;
        Series dt_series{"EM_vs_dt_" + name, {}};
        for (std::size_t r = 0; r < rungs; ++r) {
            const TimeGrid grid(T, steps0 << r);
            const auto rep = segmented_novikov_check(lin, B, x, grid, segments, n, cfg.seed() + r);
            const auto& em = rep.expected_weight;
            rb.checks.push_back(upper("expected_weight_" + name + "_steps_" + std::to_string(grid.steps), 5,
                                      std::abs(em.value - 1.0), 3.0 * em.std_error, em.std_error,
                                      "E[M] = " + format_number(em.value)));
            dt_series.points.push_back({grid.dt(), em.value, em.std_error});
            rows.push_back({static_cast<double>(rows.size()), static_cast<double>(grid.steps), em.value, em.std_error,
                            static_cast<double>(segments)});
        }
        if (first) {
            Series n_series{"EM_vs_N", {}};
            const TimeGrid grid(T, steps0);
            for (std::size_t k : {n / 8, n / 4, n / 2, n}) {
                const auto rep = segmented_novikov_check(lin, B, x, grid, segments, k, cfg.seed());
                n_series.points.push_back({static_cast<double>(k), rep.expected_weight.value,
                                           rep.expected_weight.std_error});
            }
            rb.series.push_back(std::move(n_series));
            first = false;
        }
        const TimeGrid fine(T, steps0 << (rungs - 1));
        const auto dual = dual_estimator_check(lin, B, x, fine, f, functional, n, cfg.seed() + 100);
        rb.checks.push_back(upper("dual_estimator_" + name, 5, dual.discrepancy_sigmas, 3.0, 0.0,
                                  "weighted " + format_number(dual.weighted.value) + ", direct " +
                                      format_number(dual.direct.value)));
        const double elapsed = seconds_since(t0);
        rb.checks.push_back(upper("girsanov_runtime_seconds_" + name, 5, elapsed, 300.0));
        rb.metrics["drifts"][name] = {{"sup_norm", b},
                                      {"segments", segments},
                                      {"dual_sigmas", dual.discrepancy_sigmas},
                                      {"ess", dual.weighted.ess}};
        rb.series.push_back(std::move(dt_series));
        rb.required_series.push_back("EM_vs_dt_" + name);
    }
    rb.required_series.push_back("EM_vs_N");
    rb.csv_files["expected_weight.csv"] =
        csv_string({"row", "steps", "expected_weight", "std_error", "segments"}, rows);
}

// ---------------------------------------------------------------------------------------------

void run_zvonkin(const ExperimentConfig& cfg, ReportBundle& rb) {
    const auto op = make_operator(cfg);
    const LinearDrift lin(op);
    const std::size_t m = op.dim();
    const auto B = make_drift(cfg.text("drift.kind"), cfg, op);
    const auto quad = make_quad(cfg);
    const double lambda = vector_lambda(cfg, op, B);
    const auto sol = solve_vector(op, B, lambda, quad, static_cast<std::size_t>(cfg.integer("solver.max_iter")),
                                  cfg.real("solver.tol"));
    const State x = initial_state(cfg, m);
    const double T = cfg.real("grid.T");
    const auto refinements = static_cast<std::size_t>(cfg.integer("grid.refinements"));
    const std::size_t fine_steps = static_cast<std::size_t>(cfg.integer("grid.steps")) << refinements;
    const TimeGrid fine(T, fine_steps);
    const auto n = static_cast<std::size_t>(cfg.integer("paths.count"));
    std::vector<double> dts, means;
    Series series{"residual_vs_dt", {}};
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r <= refinements; ++r) {
        const std::size_t factor = std::size_t{1} << (refinements - r);
        const TimeGrid grid(T, fine_steps / factor);
        std::vector<double> sups(n);
#pragma omp parallel for schedule(dynamic)
        for (std::size_t p = 0; p < n; ++p) {
            const auto noise = NoisePanel::generate(lin, fine, cfg.seed(), static_cast<std::uint32_t>(p)).coarsen(lin, factor);
            const auto path = simulate_mild(lin, B, x, grid, noise);
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s = std::max(s, modified_mild_residual(op, B, sol, path, noise, lambda, i).sup_residual);
            sups[p] = s;
        }
        const auto est = mean_estimate(sups);
        dts.push_back(grid.dt());
        means.push_back(est.mean);
        series.points.push_back({grid.dt(), est.mean, est.std_error});
        rows.push_back({grid.dt(), est.mean, est.std_error});
    }
    const double order = convergence_order(dts, means);
    rb.checks.push_back(lower("identity_residual_order", 6, order, 0.4));

    const auto zero = DriftField::zero(m);
    const auto sol0 = solve_vector(op, zero, lambda, quad);
    const auto noise = NoisePanel::generate(lin, fine, cfg.seed(), 0);
    const auto path0 = simulate_mild(lin, zero, x, fine, noise);
    double collapse = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        collapse = std::max(collapse, modified_mild_residual(op, zero, sol0, path0, noise, lambda, i).sup_residual);
    rb.checks.push_back(upper("zero_drift_collapse", 6, collapse, 1e-12));

    const auto path = simulate_mild(lin, B, x, fine, noise);
    std::ostringstream res_csv;
    write_residual_csv(res_csv, modified_mild_residual(op, B, sol, path, noise, lambda, 0));
    rb.csv_files["residual_path0.csv"] = res_csv.str();
    rb.csv_files["residual_vs_dt.csv"] = csv_string({"dt", "mean_sup_residual", "std_error"}, rows);
    rb.metrics["lambda"] = lambda;
    rb.metrics["order"] = order;
    rb.metrics["solver_iterations"] = sol.provenance().iterations;
    rb.series.push_back(std::move(series));
    rb.required_series = {"residual_vs_dt"};
}

// ---------------------------------------------------------------------------------------------

void run_deterministic(const ExperimentConfig& cfg, ReportBundle& rb) {
    const LinearDrift lin = make_linear(cfg);
    const std::size_t m = lin.dim();
    // Dirichlet drifts need no operator; raw_drift only reads the dimension.
    const auto B = raw_drift(cfg.text("drift.kind"), cfg, m);
    const State x = initial_state(cfg, m);
    const TimeGrid grid(cfg.real("grid.T"), static_cast<std::size_t>(cfg.integer("grid.steps")));
    const auto noise = NoisePanel::zero(m, grid);
    const double tb = cfg.real("variants.t_branch");
    const std::vector<Variant> variants = {Variant::parse(cfg.text("variants.a"), tb),
                                           Variant::parse(cfg.text("variants.b"), tb),
                                           Variant::parse("constant_branch", tb)};
    std::vector<VariantPath> paths;
    for (const auto& v : variants) {
        paths.push_back(simulate_variant(lin, B, x, grid, noise, v));
        const auto res = mild_residual(lin, B, paths.back().trajectory, noise);
        rb.checks.push_back(upper("residual_" + v.name(), 8, res.sup, 1e-9));
        Series s{"trajectory_" + v.name(), {}};
        for (std::size_t j = 0; j < grid.nodes(); ++j) s.points.push_back({grid.time(j), paths.back().trajectory.at(j, 0), 0.0});
        rb.series.push_back(std::move(s));
        rb.required_series.push_back("trajectory_" + v.name());
        std::ostringstream csv;
        write_trajectory_csv(csv, paths.back().trajectory);
        rb.csv_files["trajectory_" + v.name() + ".csv"] = csv.str();
    }
    std::size_t distinct = 0;
    for (std::size_t a = 0; a < paths.size(); ++a) {
        bool fresh = true;
        for (std::size_t b = 0; b < a; ++b)
            if (sup_distance(paths[a].trajectory, paths[b].trajectory) < 1e-6) fresh = false;
        distinct += fresh;
    }
    rb.checks.push_back(lower("distinct_solutions", 8, static_cast<double>(distinct), 2.0));
    const double d = sup_distance(paths.front().trajectory, paths.back().trajectory);
    rb.checks.push_back(lower("branch_sup_distance", 8, d, 0.9 * (grid.horizon - tb)));
    rb.metrics["distinct_solutions"] = distinct;
    rb.metrics["regularizing"] = lin.regularizing();
    if (!lin.regularizing())
        rb.metrics["note"] = "no regularizing linear part: this configuration lies outside the uniqueness theory";
}

void run_uniqueness(const ExperimentConfig& cfg, ReportBundle& rb) {
    const LinearDrift lin = make_linear(cfg);
    const std::size_t m = lin.dim();
    const auto B = raw_drift(cfg.text("drift.kind"), cfg, m);
    const State x = initial_state(cfg, m);
    const double T = cfg.real("grid.T");
    const auto refinements = static_cast<std::size_t>(cfg.integer("grid.refinements"));
    const std::size_t fine_steps = static_cast<std::size_t>(cfg.integer("grid.steps")) << refinements;
    const TimeGrid fine(T, fine_steps);
    const auto n = static_cast<std::size_t>(cfg.integer("paths.count"));
    const auto va = Variant::parse(cfg.text("variants.a"));
    const auto vb = Variant::parse(cfg.text("variants.b"));
    const std::vector<double> branch_times = {0.0, 0.25 * T, 0.5 * T};
    std::vector<double> dts, dist;
    Series dseries{"sup_distance_vs_dt", {}}, rseries{"residual_ratio_vs_dt", {}};
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r <= refinements; ++r) {
        const std::size_t factor = std::size_t{1} << (refinements - r);
        const TimeGrid grid(T, fine_steps / factor);
        std::vector<double> d(n), ratio(n), fres(n);
#pragma omp parallel for schedule(dynamic)
        for (std::size_t p = 0; p < n; ++p) {
            const auto noise = NoisePanel::generate(lin, fine, cfg.seed(), static_cast<std::uint32_t>(p)).coarsen(lin, factor);
            const auto a = simulate_variant(lin, B, x, grid, noise, va);
            const auto b = simulate_variant(lin, B, x, grid, noise, vb);
            d[p] = sup_distance(a.trajectory, b.trajectory);
            fres[p] = mild_residual(lin, B, a.trajectory, noise).sup;
            double worst = std::numeric_limits<double>::infinity();
            for (double tb : branch_times) {
                const auto c = simulate_variant(lin, B, x, grid, noise, Variant{VariantKind::ConstantBranch, tb});
                worst = std::min(worst, mild_residual(lin, B, c.trajectory, noise).sup);
            }
            ratio[p] = worst / std::max(fres[p], 1e-300);
        }
        const auto de = mean_estimate(d);
        const double min_ratio = *std::min_element(ratio.begin(), ratio.end());
        dts.push_back(grid.dt());
        dist.push_back(de.mean);
        dseries.points.push_back({grid.dt(), de.mean, de.std_error});
        rseries.points.push_back({grid.dt(), min_ratio, 0.0});
        rows.push_back({grid.dt(), de.mean, de.std_error, mean_estimate(fres).mean, min_ratio});
        rb.checks.push_back(lower("constant_branch_residual_ratio_steps_" + std::to_string(grid.steps), 9, min_ratio,
                                  10.0, 0.0, "minimum over paths and branch times"));
    }
    const double order = convergence_order(dts, dist);
    rb.checks.push_back(lower("sup_distance_order", 9, order, 0.4));
    rb.metrics["order"] = order;
    rb.series.push_back(std::move(dseries));
    rb.series.push_back(std::move(rseries));
    rb.required_series = {"sup_distance_vs_dt", "residual_ratio_vs_dt"};
    rb.csv_files["sup_distance.csv"] =
        csv_string({"dt", "mean_sup_distance", "std_error", "forward_residual", "min_residual_ratio"}, rows);
}

// ---------------------------------------------------------------------------------------------

void run_kernel_norms(const ExperimentConfig& cfg, ReportBundle& rb) {
    const SpectralOperator op1({1.0}, cfg.real("spectrum.delta"));
    double worst_p1 = 0.0;
    for (double t : {0.01, 0.1, 0.5, 1.0, 3.0}) worst_p1 = std::max(worst_p1, std::abs(kernel_lp_norm(op1, t, 1.0) - 1.0));
    rb.checks.push_back(upper("kernel_norm_p1_equals_one", 10, worst_p1, 0.0));
    const double t_half = 0.5 * std::numbers::ln2;
    const double v = kernel_lp_norm(op1, t_half, 2.0);
    rb.checks.push_back(upper("kernel_norm_p2_closed_form", 10, std::abs(v - std::pow(4.0 / 3.0, 0.25)), 1e-12));
    const auto& cases = cfg.list("kernel.cases");
    std::vector<std::vector<double>> rows;
    std::size_t matched = 0;
    for (std::size_t c = 0; c + 1 < cases.size(); c += 2) {
        const auto d = static_cast<std::size_t>(cases[c]);
        const double pp = cases[c + 1];
        const SpectralOperator op(std::vector<double>(d, 1.0), cfg.real("spectrum.delta"));
        const auto rep = integrability_scan(op, pp, cfg.real("grid.T"));
        const double analytic = -static_cast<double>(d) * (0.5 - 0.5 / pp);
        const bool finite = rep.verdict == IntegrabilityVerdict::Finite;
        const bool ok = finite == (analytic > -1.0);
        matched += ok;
        rb.checks.push_back({"integrability_d" + std::to_string(d) + "_p" + format_number(pp), 10, "matches",
                             rep.slope, analytic, 0.0, ok, finite ? "finite" : "divergent"});
        rows.push_back({static_cast<double>(d), pp, rep.slope, analytic, finite ? 1.0 : 0.0});
    }
    Series series{"kernel_norm_vs_t", {}};
    for (int i = 0; i <= 40; ++i) {
        const double t = std::pow(10.0, -4.0 + 0.1 * i);
        series.points.push_back({t, kernel_lp_norm(op1, t, 2.0), 0.0});
    }
    rb.metrics["cases_matched"] = matched;
    rb.series.push_back(std::move(series));
    rb.required_series = {"kernel_norm_vs_t"};
    rb.csv_files["integrability.csv"] = csv_string({"d", "p_prime", "fitted_slope", "analytic_slope", "finite"}, rows);
}

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& config) {
    if (auto v = config.check_invariants(); !v.empty()) throw ConfigError(std::move(v));
    ReportBundle rb;
    rb.kind = config.kind();
    rb.seed = config.seed();
    const auto t0 = Clock::now();
    try {
        switch (rb.kind) {
            case ExperimentKind::OuValidate: run_ou_validate(config, rb); break;
            case ExperimentKind::Kolmogorov: run_kolmogorov(config, rb); break;
            case ExperimentKind::Girsanov: run_girsanov(config, rb); break;
            case ExperimentKind::Zvonkin: run_zvonkin(config, rb); break;
            case ExperimentKind::UniquenessByNoise: run_uniqueness(config, rb); break;
            case ExperimentKind::DeterministicNonuniqueness: run_deterministic(config, rb); break;
            case ExperimentKind::KernelNorms: run_kernel_norms(config, rb); break;
        }
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(to_string(rb.kind)) + ": " + e.message());
    }
    rb.runtime_seconds = seconds_since(t0);
    return rb;
}

nlohmann::ordered_json summary_json(const ReportBundle& bundle) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(bundle.kind);
    j["seed"] = bundle.seed;
    j["passed"] = bundle.passed();
    j["runtime_seconds"] = bundle.runtime_seconds;
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : bundle.checks) {
        j["checks"].push_back({{"id", c.id},
                               {"criterion", c.criterion},
                               {"relation", c.relation},
                               {"measured", c.measured},
                               {"tolerance", c.tolerance},
                               {"std_error", c.std_error},
                               {"passed", c.passed},
                               {"note", c.note}});
    }
    j["metrics"] = bundle.metrics;
    return j;
}

void write_bundle(const ReportBundle& bundle, const ExperimentConfig& config, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "summary.json", summary_json(bundle).dump(2) + "\n");
    std::vector<std::string> files;
    for (const auto& [name, text] : bundle.csv_files) {
        write_text_file(dir / name, text);
        files.push_back(name);
    }
    write_text_file(dir / "plotdata.csv", emit_plotdata(bundle));
    files.push_back("plotdata.csv");
    nlohmann::ordered_json manifest;
    manifest["tool"] = "spdelab";
    manifest["version"] = SPDELAB_VERSION;
    manifest["compiler"] = __VERSION__;
    manifest["kind"] = to_string(bundle.kind);
    manifest["seed"] = bundle.seed;
    manifest["files"] = files;
    manifest["config"] = serialize_config(config);
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace spdelab::lab

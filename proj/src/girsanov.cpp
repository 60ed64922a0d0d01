#include "spdelab/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spdelab/csv.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

double GirsanovWeight::weight() const { return std::exp(log_weight); }

double stochastic_integral(std::span<const double> b_values, const NoisePanel& noise) {
    require(b_values.size() == noise.steps() * noise.dim(), ErrorKind::DimensionMismatch,
            "integrand must hold one m-vector per step");
    double s = 0.0;
    for (std::size_t j = 0; j < noise.steps(); ++j)
        for (std::size_t k = 0; k < noise.dim(); ++k) s += b_values[j * noise.dim() + k] * noise.dW(j, k);
    return s;
}

namespace {

// Integral and quadratic terms over steps [j0, j1).
void accumulate(const Trajectory& path, const DriftField& B, const NoisePanel& noise, NodeChoice node,
                std::size_t j0, std::size_t j1, double& integral, double& quadratic) {
    const double dt = noise.dt();
    integral = 0.0;
    quadratic = 0.0;
    for (std::size_t j = j0; j < j1; ++j) {
        const auto b = B(path.row(node == NodeChoice::Left ? j : j + 1));
        for (std::size_t k = 0; k < b.size(); ++k) {
            integral += b[k] * noise.dW(j, k);
            quadratic += 0.5 * b[k] * b[k] * dt;
        }
    }
}

}  // namespace

GirsanovWeight girsanov_weight(const Trajectory& path, const DriftField& B, const NoisePanel& noise,
                               Direction direction, NodeChoice node) {
    require(path.grid().steps == noise.steps() && path.dim() == noise.dim() && B.dim() == path.dim(),
            ErrorKind::DimensionMismatch, "path, drift and noise shapes differ");
    GirsanovWeight w;
    if (B.is_zero()) return w;
    accumulate(path, B, noise, node, 0, noise.steps(), w.integral_term, w.quadratic_term);
    const double sign = direction == Direction::AddDrift ? 1.0 : -1.0;
    w.log_weight = sign * w.integral_term - w.quadratic_term;
    return w;
}

NovikovReport segmented_novikov_check(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                                      const TimeGrid& grid, std::size_t segments, std::size_t n_paths,
                                      std::uint64_t seed, NodeChoice node) {
    require(segments >= 1 && grid.steps % segments == 0, ErrorKind::InvalidArgument,
            "segments must divide the step count");
    require(n_paths >= 2, ErrorKind::InvalidArgument, "need at least two paths");
    NovikovReport rep;
    rep.segments = segments;
    const double b0 = B.sup_norm_bound();
    rep.exponent_bound = 0.5 * b0 * b0 * grid.horizon / static_cast<double>(segments);
    if (rep.exponent_bound > 0.5)
        throw Error(ErrorKind::SegmentTooLong, "per-segment Novikov exponent " + format_number(rep.exponent_bound) +
                                                   " exceeds 0.5; use more segments");
    const std::size_t per = grid.steps / segments;
    std::vector<std::vector<double>> moment(segments, std::vector<double>(n_paths));
    std::vector<std::vector<double>> seg_mean(segments, std::vector<double>(n_paths));
    std::vector<double> total(n_paths);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto noise = NoisePanel::generate(lin, grid, seed, static_cast<std::uint32_t>(i));
        const auto path = simulate_variant(lin, DriftField::zero(lin.dim()), x, grid, noise, {}).trajectory;
        double log_total = 0.0;
        for (std::size_t s = 0; s < segments; ++s) {
            double I = 0.0, Q = 0.0;
            if (!B.is_zero()) accumulate(path, B, noise, node, s * per, (s + 1) * per, I, Q);
            moment[s][i] = std::exp(Q);
            seg_mean[s][i] = std::exp(I - Q);
            log_total += I - Q;
        }
        total[i] = std::exp(log_total);
    }
    const double ceiling = std::exp(rep.exponent_bound) * (1.0 + 1e-12);
    bool ok = true;
    for (std::size_t s = 0; s < segments; ++s) {
        auto a = mean_estimate(moment[s]);
        auto b = mean_estimate(seg_mean[s]);
        rep.exp_moments.push_back({a.mean, a.std_error});
        rep.segment_means.push_back({b.mean, b.std_error});
        ok = ok && std::isfinite(a.mean) && a.mean <= ceiling;
    }
    auto t = mean_estimate(total);
    rep.expected_weight = {t.mean, t.std_error};
    ok = ok && std::abs(t.mean - 1.0) <= 3.0 * t.std_error + 1e-12;
    rep.passed = ok;
    return rep;
}

PathFunctional parse_functional(const std::string& name) {
    if (name == "terminal") return PathFunctional::Terminal;
    if (name == "sup") return PathFunctional::Sup;
    if (name == "time-average" || name == "time_average") return PathFunctional::TimeAverage;
    throw Error(ErrorKind::InvalidArgument, "unknown functional '" + name + "'");
}

double apply_functional(const ScalarField& f, const Trajectory& path, PathFunctional functional) {
    const std::size_t n = path.nodes();
    switch (functional) {
        case PathFunctional::Terminal: return f(path.row(n - 1));
        case PathFunctional::Sup: {
            double s = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) s = std::max(s, f(path.row(j)));
            return s;
        }
        case PathFunctional::TimeAverage: {
            double s = 0.5 * (f(path.row(0)) + f(path.row(n - 1)));
            for (std::size_t j = 1; j + 1 < n; ++j) s += f(path.row(j));
            return s / static_cast<double>(n - 1);
        }
    }
    return 0.0;
}

WeightedEstimate weighted_expectation(std::span<const double> values, std::span<const double> log_weights) {
    require(values.size() == log_weights.size() && !values.empty(), ErrorKind::DimensionMismatch,
            "values and weights must align");
    const double lmax = *std::max_element(log_weights.begin(), log_weights.end());
    const std::size_t n = values.size();
    std::vector<double> w(n), wf(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(log_weights[i] - lmax);
        wf[i] = w[i] * values[i];
        w2[i] = w[i] * w[i];
    }
    const double sw = pairwise_sum(w);
    WeightedEstimate est;
    est.value = pairwise_sum(wf) / sw;
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - est.value;
        dev[i] = w2[i] * d * d;
    }
    est.std_error = std::sqrt(pairwise_sum(dev)) / sw;
    est.ess = sw * sw / pairwise_sum(w2);
    if (est.ess < 10.0) {
        est.degenerate = true;
        est.warning = "WeightDegeneracy: effective sample size " + format_number(est.ess) + " below 10";
    }
    return est;
}

WeightedEstimate weighted_expectation(const ScalarField& f, const PathEnsemble& ensemble,
                                      const std::vector<GirsanovWeight>& weights, PathFunctional functional) {
    require(weights.size() == ensemble.paths.size(), ErrorKind::DimensionMismatch,
            "weights not aligned with ensemble");
    std::vector<double> v, lw;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        v.push_back(apply_functional(f, ensemble.paths[i], functional));
        lw.push_back(weights[i].log_weight);
    }
    return weighted_expectation(v, lw);
}

DualEstimate dual_estimator_check(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                                  const TimeGrid& grid, const ScalarField& f, PathFunctional functional,
                                  std::size_t n_paths, std::uint64_t seed) {
    std::vector<double> fw(n_paths), lw(n_paths), em(n_paths), fd(n_paths);
    const auto zero = DriftField::zero(lin.dim());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto id = static_cast<std::uint32_t>(i);
        const auto noise = NoisePanel::generate(lin, grid, seed, id);
        const auto ou = simulate_variant(lin, zero, x, grid, noise, {}).trajectory;
        const auto w = girsanov_weight(ou, B, noise, Direction::AddDrift);
        fw[i] = apply_functional(f, ou, functional);
        lw[i] = w.log_weight;
        em[i] = w.weight();
        const auto noise2 = NoisePanel::generate(lin, grid, seed + 1, id);
        fd[i] = apply_functional(f, simulate_mild(lin, B, x, grid, noise2), functional);
    }
    DualEstimate d;
    auto e = mean_estimate(em);
    d.expected_weight = {e.mean, e.std_error};
    d.weighted = weighted_expectation(fw, lw);
    auto g = mean_estimate(fd);
    d.direct = {g.mean, g.std_error};
    const double se = std::hypot(d.weighted.std_error, d.direct.std_error);
    d.discrepancy_sigmas = se > 0.0 ? std::abs(d.weighted.value - d.direct.value) / se : 0.0;
    return d;
}

void write_weight_csv(std::ostream& out, const std::vector<GirsanovWeight>& weights) {
    CsvWriter w(out, {"path_id", "log_weight", "integral_term", "quadratic_term"});
    for (std::size_t i = 0; i < weights.size(); ++i)
        w.row({std::to_string(i), format_number(weights[i].log_weight), format_number(weights[i].integral_term),
               format_number(weights[i].quadratic_term)});
}

}  // namespace spdelab

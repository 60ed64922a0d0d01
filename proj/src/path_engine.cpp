#include "spdelab/path_engine.hpp"

#include <algorithm>
#include <cmath>

#include "spdelab/csv.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/rng.hpp"

namespace spdelab {

LinearDrift::LinearDrift(std::vector<double> r) : rates(std::move(r)) {
    require(!rates.empty(), ErrorKind::InvalidArgument, "linear part needs at least one mode");
    for (double l : rates)
        require(l >= 0.0 && std::isfinite(l), ErrorKind::InvalidArgument, "rates must be finite and >= 0");
}

bool LinearDrift::regularizing() const {
    return std::all_of(rates.begin(), rates.end(), [](double l) { return l > 0.0; });
}

TimeGrid::TimeGrid(double T, std::size_t N) : horizon(T), steps(N) {
    require(T > 0.0 && std::isfinite(T), ErrorKind::InvalidTime, "horizon must be positive");
    require(N >= 1, ErrorKind::InvalidArgument, "time grid needs at least one step");
}

StepCoefficients step_coefficients(const LinearDrift& lin, double dt) {
    StepCoefficients c;
    for (double l : lin.rates) {
        const double x = l * dt;
        c.decay.push_back(std::exp(-x));
        if (x == 0.0) {
            c.conv.push_back(dt);
            c.var.push_back(dt);
        } else {
            c.conv.push_back(-std::expm1(-x) / l);
            c.var.push_back(-std::expm1(-2.0 * x) / (2.0 * l));
        }
    }
    return c;
}

double conditional_noise_variance(double x) {
    if (x < 1e-2) {
        const double x2 = x * x;
        return x2 * (1.0 / 12 + x * (-1.0 / 12 + x * (17.0 / 360 + x * (-7.0 / 360 + x * (43.0 / 6720 +
                                                                                      x * (-107.0 / 60480))))));
    }
    const double a = -std::expm1(-2.0 * x) / (2.0 * x);
    const double b = -std::expm1(-x) / x;
    return std::max(0.0, a - b * b);
}

NoisePanel NoisePanel::generate(const LinearDrift& lin, const TimeGrid& grid, std::uint64_t seed,
                                std::uint32_t path_id) {
    NoisePanel p;
    p.steps_ = grid.steps;
    p.m_ = lin.dim();
    p.dt_ = grid.dt();
    p.seed_ = seed;
    p.path_id_ = path_id;
    p.rates_ = lin.rates;
    p.dw_.resize(p.steps_ * p.m_);
    p.eta_.resize(p.steps_ * p.m_);
    const auto c = step_coefficients(lin, p.dt_);
    const double sq = std::sqrt(p.dt_);
    std::vector<double> cond(p.m_);
    for (std::size_t k = 0; k < p.m_; ++k) cond[k] = sq * std::sqrt(conditional_noise_variance(lin.rates[k] * p.dt_));
    CounterRng rng(seed);
    for (std::size_t j = 0; j < p.steps_; ++j)
        for (std::size_t k = 0; k < p.m_; ++k) {
            auto [xi1, xi2] = rng.normal_pair(Stream::Noise, path_id, static_cast<std::uint32_t>(j),
                                              static_cast<std::uint32_t>(k));
            const double dw = sq * xi1;
            p.dw_[j * p.m_ + k] = dw;
            p.eta_[j * p.m_ + k] = (c.conv[k] / p.dt_) * dw + cond[k] * xi2;
        }
    return p;
}

NoisePanel NoisePanel::zero(std::size_t m, const TimeGrid& grid) {
    NoisePanel p;
    p.steps_ = grid.steps;
    p.m_ = m;
    p.dt_ = grid.dt();
    p.dw_.assign(p.steps_ * m, 0.0);
    p.eta_.assign(p.steps_ * m, 0.0);
    p.rates_.assign(m, 0.0);
    return p;
}

NoisePanel NoisePanel::coarsen(const LinearDrift& lin, std::size_t factor) const {
    require(factor >= 1 && steps_ % factor == 0, ErrorKind::InvalidArgument,
            "coarsening factor must divide the step count");
    require(lin.dim() == m_, ErrorKind::DimensionMismatch, "rates differ from panel dimension");
    NoisePanel p = *this;
    p.steps_ = steps_ / factor;
    p.dt_ = dt_ * static_cast<double>(factor);
    p.dw_.assign(p.steps_ * m_, 0.0);
    p.eta_.assign(p.steps_ * m_, 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
        const double decay = std::exp(-lin.rates[k] * dt_);
        for (std::size_t J = 0; J < p.steps_; ++J) {
            double w = 0.0, e = 0.0;
            for (std::size_t r = 0; r < factor; ++r) {
                const std::size_t j = J * factor + r;
                w += dw_[j * m_ + k];
                e = decay * e + eta_[j * m_ + k];
            }
            p.dw_[J * m_ + k] = w;
            p.eta_[J * m_ + k] = e;
        }
    }
    return p;
}

Trajectory::Trajectory(TimeGrid grid, std::size_t m) : grid_(grid), m_(m), data_(grid.nodes() * m, 0.0) {}

State Trajectory::state(std::size_t j) const {
    return State(data_.begin() + static_cast<std::ptrdiff_t>(j * m_),
                 data_.begin() + static_cast<std::ptrdiff_t>((j + 1) * m_));
}

std::vector<State> Trajectory::states() const {
    std::vector<State> out;
    for (std::size_t j = 0; j < nodes(); ++j) out.push_back(state(j));
    return out;
}

Variant Variant::parse(const std::string& name, double t_branch) {
    if (name == "left_node") return {VariantKind::LeftNode, t_branch};
    if (name == "forward") return {VariantKind::Forward, t_branch};
    if (name == "midpoint") return {VariantKind::Midpoint, t_branch};
    if (name == "branch_seeking") return {VariantKind::BranchSeeking, t_branch};
    if (name == "constant_branch") return {VariantKind::ConstantBranch, t_branch};
    throw Error(ErrorKind::InvalidArgument, "unknown variant '" + name + "'");
}

std::string Variant::name() const {
    switch (kind) {
        case VariantKind::LeftNode: return "left_node";
        case VariantKind::Forward: return "forward";
        case VariantKind::Midpoint: return "midpoint";
        case VariantKind::BranchSeeking: return "branch_seeking";
        case VariantKind::ConstantBranch: return "constant_branch";
    }
    return "unknown";
}

namespace {

void check_shapes(const LinearDrift& lin, const DriftField* B, std::span<const double> x,
                  const TimeGrid& grid, const NoisePanel& noise) {
    require(x.size() == lin.dim(), ErrorKind::DimensionMismatch, "initial state dimension mismatch");
    require(noise.dim() == lin.dim(), ErrorKind::DimensionMismatch, "noise panel dimension mismatch");
    require(noise.steps() == grid.steps, ErrorKind::DimensionMismatch, "noise panel step count mismatch");
    require(std::abs(noise.dt() - grid.dt()) <= 1e-14 * grid.dt(), ErrorKind::DimensionMismatch,
            "noise panel step size mismatch");
    if (B) require(B->dim() == lin.dim(), ErrorKind::DimensionMismatch, "drift dimension mismatch");
}

}  // namespace

VariantPath simulate_variant(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                             const TimeGrid& grid, const NoisePanel& noise, const Variant& variant) {
    check_shapes(lin, &B, x, grid, noise);
    const std::size_t m = lin.dim();
    const auto c = step_coefficients(lin, grid.dt());
    VariantPath out{Trajectory(grid, m), {}};
    auto& X = out.trajectory;
    for (std::size_t k = 0; k < m; ++k) X.at(0, k) = x[k];
    const bool drift_free = B.is_zero();
    const auto branch_node = static_cast<std::size_t>(std::llround(variant.t_branch / grid.dt()));
    State cur(m), mid(m);
    for (std::size_t j = 0; j < grid.steps; ++j) {
        for (std::size_t k = 0; k < m; ++k) cur[k] = X.at(j, k);
        if (drift_free) {
            for (std::size_t k = 0; k < m; ++k) X.at(j + 1, k) = c.decay[k] * cur[k] + noise.eta(j, k);
            continue;
        }
        State b;
        switch (variant.kind) {
            case VariantKind::LeftNode: b = B(cur, BranchMode::Pointwise); break;
            case VariantKind::Forward: b = B(cur, BranchMode::Generic); break;
            case VariantKind::BranchSeeking:
                b = B(cur, BranchMode::Pointwise);
                if (b != B(cur, BranchMode::Generic)) out.branch_nodes.push_back(j);
                break;
            case VariantKind::Midpoint: {
                const auto b0 = B(cur, BranchMode::Pointwise);
                for (std::size_t k = 0; k < m; ++k)
                    mid[k] = 0.5 * (cur[k] + c.decay[k] * cur[k] + c.conv[k] * b0[k] + noise.eta(j, k));
                b = B(mid, BranchMode::Pointwise);
                break;
            }
            case VariantKind::ConstantBranch:
                if (j < branch_node) {
                    b = B(cur, BranchMode::Generic);
                } else {
                    b = B(cur, BranchMode::ZeroBranch);
                    if (j == branch_node) out.branch_nodes.push_back(j);
                }
                break;
        }
        for (std::size_t k = 0; k < m; ++k)
            X.at(j + 1, k) = c.decay[k] * cur[k] + c.conv[k] * b[k] + noise.eta(j, k);
    }
    return out;
}

Trajectory simulate_ou(const LinearDrift& lin, std::span<const double> x, const TimeGrid& grid,
                       std::uint64_t seed, std::uint32_t path_id) {
    const auto noise = NoisePanel::generate(lin, grid, seed, path_id);
    return simulate_variant(lin, DriftField::zero(lin.dim()), x, grid, noise, {}).trajectory;
}

Trajectory simulate_mild(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                         const TimeGrid& grid, const NoisePanel& noise) {
    return simulate_variant(lin, B, x, grid, noise, {VariantKind::LeftNode, 0.0}).trajectory;
}

double sup_distance(const Trajectory& a, const Trajectory& b) {
    require(a.nodes() == b.nodes() && a.dim() == b.dim(), ErrorKind::DimensionMismatch,
            "trajectories have different shapes");
    double s = 0.0;
    for (std::size_t j = 0; j < a.nodes(); ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < a.dim(); ++k) {
            const double d = a.at(j, k) - b.at(j, k);
            d2 += d * d;
        }
        s = std::max(s, std::sqrt(d2));
    }
    return s;
}

CoSimulation co_simulate(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                         const TimeGrid& grid, std::uint64_t seed, const Variant& variant_a,
                         const Variant& variant_b, bool noisy, std::uint32_t path_id) {
    const auto noise = noisy ? NoisePanel::generate(lin, grid, seed, path_id) : NoisePanel::zero(lin.dim(), grid);
    auto a = simulate_variant(lin, B, x, grid, noise, variant_a);
    auto b = simulate_variant(lin, B, x, grid, noise, variant_b);
    const double d = sup_distance(a.trajectory, b.trajectory);
    return {std::move(a), std::move(b), d};
}

MildResidual mild_residual(const LinearDrift& lin, const DriftField& B, const Trajectory& path,
                           const NoisePanel& noise, BranchMode mode, std::size_t gl_points) {
    check_shapes(lin, &B, path.row(0), path.grid(), noise);
    const std::size_t m = lin.dim();
    const double dt = path.grid().dt();
    const auto c = step_coefficients(lin, dt);
    const auto gl = gauss_legendre(gl_points);
    MildResidual res;
    res.per_node.assign(path.nodes(), 0.0);
    State Y = path.state(0), z(m), acc(m);
    for (std::size_t j = 0; j < path.grid().steps; ++j) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t g = 0; g < gl.size(); ++g) {
            const double u = 0.5 * (gl.nodes[g] + 1.0);
            for (std::size_t k = 0; k < m; ++k) z[k] = (1.0 - u) * path.at(j, k) + u * path.at(j + 1, k);
            const auto b = B(z, mode);
            for (std::size_t k = 0; k < m; ++k)
                acc[k] += 0.5 * dt * gl.weights[g] * std::exp(-lin.rates[k] * dt * (1.0 - u)) * b[k];
        }
        double d2 = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            Y[k] = c.decay[k] * Y[k] + acc[k] + noise.eta(j, k);
            const double d = path.at(j + 1, k) - Y[k];
            d2 += d * d;
        }
        res.per_node[j + 1] = std::sqrt(d2);
        res.sup = std::max(res.sup, res.per_node[j + 1]);
    }
    return res;
}

PathEnsemble simulate_ensemble(const LinearDrift& lin, const DriftField& B, std::span<const double> x,
                               const TimeGrid& grid, std::uint64_t seed, std::size_t n_paths) {
    PathEnsemble ens{grid, {}, {}, seed, false, State(x.begin(), x.end())};
    std::vector<std::optional<Trajectory>> tmp(n_paths);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto noise = NoisePanel::generate(lin, grid, seed, static_cast<std::uint32_t>(i));
        tmp[i] = simulate_mild(lin, B, x, grid, noise);
    }
    for (std::size_t i = 0; i < n_paths; ++i) {
        ens.paths.push_back(std::move(*tmp[i]));
        ens.path_ids.push_back(static_cast<std::uint32_t>(i));
    }
    return ens;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& path, std::optional<std::uint32_t> path_id,
                          bool header) {
    std::vector<std::string> cols;
    if (path_id) cols.push_back("path_id");
    cols.push_back("t");
    auto modes = mode_columns(path.dim());
    cols.insert(cols.end(), modes.begin(), modes.end());
    if (header) {
        CsvWriter w(out, cols);
    }
    for (std::size_t j = 0; j < path.nodes(); ++j) {
        std::string line;
        if (path_id) line += std::to_string(*path_id) + ",";
        line += format_number(path.grid().time(j));
        for (std::size_t k = 0; k < path.dim(); ++k) line += "," + format_number(path.at(j, k));
        out << line << '\n';
    }
}

}  // namespace spdelab

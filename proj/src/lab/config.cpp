#include "spdelab/lab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

#include "spdelab/csv.hpp"

namespace spdelab::lab {

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::OuValidate: return "ou_validate";
        case ExperimentKind::Kolmogorov: return "kolmogorov";
        case ExperimentKind::Girsanov: return "girsanov";
        case ExperimentKind::Zvonkin: return "zvonkin";
        case ExperimentKind::UniquenessByNoise: return "uniqueness_by_noise";
        case ExperimentKind::DeterministicNonuniqueness: return "deterministic_nonuniqueness";
        case ExperimentKind::KernelNorms: return "kernel_norms";
    }
    return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
    for (auto k : {ExperimentKind::OuValidate, ExperimentKind::Kolmogorov, ExperimentKind::Girsanov,
                   ExperimentKind::Zvonkin, ExperimentKind::UniquenessByNoise,
                   ExperimentKind::DeterministicNonuniqueness, ExperimentKind::KernelNorms})
        if (name == to_string(k)) return k;
    throw Error(ErrorKind::InvariantViolation, "unknown experiment kind '" + name + "'");
}

namespace {

using L = std::vector<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

const std::vector<KeySpec>& config_schema() {
    static const std::vector<KeySpec> schema = {
        {"experiment.kind", ValueType::Text, std::string("ou_validate"), "experiment to run"},
        {"seed", ValueType::Int, std::int64_t{1}, "master seed"},
        {"output.dir", ValueType::Text, std::string("out"), "report directory"},
        {"spectrum.m", ValueType::Int, std::int64_t{8}, "truncation dimension"},
        {"spectrum.c", ValueType::Real, 1.0, "lambda_k = c k^alpha"},
        {"spectrum.alpha", ValueType::Real, 2.0, "eigenvalue growth exponent"},
        {"spectrum.delta", ValueType::Real, 0.4, "trace-class exponent"},
        {"spectrum.file", ValueType::Text, std::string(""), "serialized operator (overrides c, alpha)"},
        {"drift.kind", ValueType::Text, std::string("zero"),
         "zero|constant|smooth|sign|indicator|two_jumps|clamp_sign|b_dir_1d|B_dir_product|composite_4_4"},
        {"drift.scale", ValueType::Real, 1.0, "amplitude"},
        {"drift.weights", ValueType::RealList, L{}, "alpha_n or tail weights"},
        {"drift.lambda1", ValueType::Real, 1.0, "composite drift lambda_1"},
        {"drift.mollify", ValueType::Int, std::int64_t{0}, "mollification index n (0 = raw)"},
        {"drift.tabulate", ValueType::Bool, false, "replace the drift by a spline table on the solver grid"},
        {"drift.corpus", ValueType::Text, std::string(""), "comma-separated drift kinds, name@n mollifies with index n"},
        {"drift.mollify_samples", ValueType::Int, std::int64_t{2048}, "Monte Carlo samples for B_n"},
        {"grid.T", ValueType::Real, 0.5, "horizon"},
        {"grid.steps", ValueType::Int, std::int64_t{64}, "coarsest step count"},
        {"grid.refinements", ValueType::Int, std::int64_t{3}, "number of step halvings"},
        {"paths.count", ValueType::Int, std::int64_t{100000}, "Monte Carlo paths"},
        {"paths.functional", ValueType::Text, std::string("terminal"), "terminal|sup|time_average"},
        {"paths.x0", ValueType::RealList, L{}, "initial state (zero-padded)"},
        {"quadrature.mc_samples", ValueType::Int, std::int64_t{4096}, "samples per pointwise estimate"},
        {"quadrature.time_nodes", ValueType::Int, std::int64_t{64}, "Laplace time nodes"},
        {"quadrature.grid_points", ValueType::Int, std::int64_t{0}, "solver grid points per axis (0 = auto)"},
        {"quadrature.grid_half_width", ValueType::Real, 8.0, "solver box half width in sigmas"},
        {"quadrature.hermite_nodes", ValueType::Int, std::int64_t{40}, "Gauss-Hermite nodes per mode"},
        {"solver.lambda_factor", ValueType::Real, 1.0, "lambda as a multiple of the contraction threshold"},
        {"solver.max_iter", ValueType::Int, std::int64_t{200}, "fixed-point iteration cap"},
        {"solver.tol", ValueType::Real, 1e-10, "fixed-point tolerance"},
        {"solver.check", ValueType::Text, std::string("contraction"),
         "contraction|bounds|gradient_decay|regularity"},
        {"solver.lambda_ladder", ValueType::RealList, L{1.0, 4.0, 16.0}, "multiples of the threshold"},
        {"solver.probes", ValueType::Int, std::int64_t{64}, "random probe points"},
        {"diagnostics.enabled", ValueType::Bool, false, "compute the regularity functional"},
        {"diagnostics.q", ValueType::Real, 5.0, "integrability exponent, q > 4"},
        {"diagnostics.gamma", ValueType::Real, 2.5, "must equal q/2"},
        {"diagnostics.delta", ValueType::Real, 0.4, "must equal spectrum.delta"},
        {"diagnostics.theta", ValueType::Real, 0.5, "Sobolev exponent"},
        {"diagnostics.R", ValueType::Real, kInf, "stopping level"},
        {"diagnostics.points", ValueType::Int, std::int64_t{128}, "mu-distributed points"},
        {"kernel.cases", ValueType::RealList, L{1, 1.5, 2, 1.5, 2, 3, 5, 1.5, 5, 2, 4, 3},
         "integrability cases as flattened (d, p') pairs"},
        {"variants.a", ValueType::Text, std::string("forward"), "first candidate construction"},
        {"variants.b", ValueType::Text, std::string("branch_seeking"), "second candidate construction"},
        {"variants.t_branch", ValueType::Real, 0.5, "branch time for constant_branch"},
    };
    return schema;
}

namespace {

const KeySpec* find_spec(const std::string& key) {
    for (const auto& s : config_schema())
        if (s.key == key) return &s;
    return nullptr;
}

std::string trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

bool parse_real(const std::string& s, double& out) {
    if (s == "inf" || s == "+inf") {
        out = kInf;
        return true;
    }
    const auto* end = s.data() + s.size();
    auto r = std::from_chars(s.data(), end, out);
    return r.ec == std::errc() && r.ptr == end;
}

ConfigValue parse_value(const KeySpec& spec, const std::string& raw) {
    const auto bad = [&] {
        return Error(ErrorKind::TypeMismatch, "key '" + spec.key + "' cannot take value '" + raw + "'");
    };
    switch (spec.type) {
        case ValueType::Int: {
            std::int64_t v = 0;
            auto r = std::from_chars(raw.data(), raw.data() + raw.size(), v);
            if (r.ec != std::errc() || r.ptr != raw.data() + raw.size()) throw bad();
            return v;
        }
        case ValueType::Real: {
            double v = 0.0;
            if (!parse_real(raw, v)) throw bad();
            return v;
        }
        case ValueType::Bool:
            if (raw == "true" || raw == "1") return true;
            if (raw == "false" || raw == "0") return false;
            throw bad();
        case ValueType::Text: return raw;
        case ValueType::RealList: {
            std::vector<double> v;
            std::stringstream ss(raw);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto t = trim(item);
                if (t.empty()) continue;
                double d = 0.0;
                if (!parse_real(t, d)) throw bad();
                v.push_back(d);
            }
            return v;
        }
    }
    throw bad();
}

std::string value_text(const ConfigValue& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
            else if constexpr (std::is_same_v<T, double>) return format_number(x);
            else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else if constexpr (std::is_same_v<T, std::string>) return x;
            else {
                std::string s;
                for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_number(x[i]);
                return s;
            }
        },
        v);
}

std::string join_violations(const std::vector<Violation>& v) {
    std::string s = std::to_string(v.size()) + " config violation(s)";
    for (const auto& x : v) {
        s += "\n  ";
        if (x.line) s += "line " + std::to_string(x.line) + ": ";
        s += std::string(spdelab::to_string(x.kind)) + ": " + x.message;
    }
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorKind::InvariantViolation : violations.front().kind,
            join_violations(violations)),
      violations_(std::move(violations)) {}

ExperimentConfig::ExperimentConfig() {
    for (const auto& s : config_schema()) values_[s.key] = s.default_value;
}

const ConfigValue& ExperimentConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::UnknownKey, "unknown config key '" + key + "'");
    return it->second;
}

ExperimentKind ExperimentConfig::kind() const { return parse_kind(text("experiment.kind")); }

std::int64_t ExperimentConfig::integer(const std::string& key) const { return std::get<std::int64_t>(get(key)); }
double ExperimentConfig::real(const std::string& key) const { return std::get<double>(get(key)); }
bool ExperimentConfig::flag(const std::string& key) const { return std::get<bool>(get(key)); }
const std::string& ExperimentConfig::text(const std::string& key) const { return std::get<std::string>(get(key)); }
const std::vector<double>& ExperimentConfig::list(const std::string& key) const {
    return std::get<std::vector<double>>(get(key));
}

void ExperimentConfig::set(const std::string& key, ConfigValue value) {
    const auto* spec = find_spec(key);
    if (!spec) throw Error(ErrorKind::UnknownKey, "unknown config key '" + key + "'");
    if (value.index() != spec->default_value.index())
        throw Error(ErrorKind::TypeMismatch, "wrong value type for '" + key + "'");
    values_[key] = std::move(value);
}

void ExperimentConfig::set_from_text(const std::string& key, const std::string& raw) {
    const auto* spec = find_spec(key);
    if (!spec) throw Error(ErrorKind::UnknownKey, "unknown config key '" + key + "'");
    values_[key] = parse_value(*spec, raw);
}

std::vector<Violation> ExperimentConfig::check_invariants() const {
    std::vector<Violation> out;
    const auto add = [&](const std::string& key, const std::string& msg) {
        out.push_back({ErrorKind::InvariantViolation, 0, key, msg});
    };
    try {
        parse_kind(text("experiment.kind"));
    } catch (const Error& e) {
        add("experiment.kind", e.message());
    }
    if (integer("spectrum.m") < 1) add("spectrum.m", "spectrum.m must be >= 1");
    const double delta = real("spectrum.delta");
    if (!(delta > 0.0 && delta < 1.0)) add("spectrum.delta", "spectrum.delta must lie in (0, 1)");
    if (!(real("grid.T") > 0.0)) add("grid.T", "grid.T must be positive");
    if (integer("grid.steps") < 1) add("grid.steps", "grid.steps must be >= 1");
    if (integer("grid.refinements") < 0) add("grid.refinements", "grid.refinements must be >= 0");
    if (integer("paths.count") < 2) add("paths.count", "paths.count must be >= 2");
    const auto& file = text("spectrum.file");
    if (!file.empty() && !std::filesystem::exists(file)) add("spectrum.file", "file '" + file + "' does not exist");
    if (list("kernel.cases").size() % 2 != 0) add("kernel.cases", "kernel.cases must hold (d, p') pairs");
    if (flag("diagnostics.enabled")) {
        const double q = real("diagnostics.q");
        if (!(q > 4.0)) add("diagnostics.q", "regularity diagnostics need q > 4 (got " + format_number(q) + ")");
        if (std::abs(real("diagnostics.gamma") - q / 2.0) > 1e-12 * std::max(1.0, q))
            add("diagnostics.gamma", "diagnostics.gamma must equal q/2");
        if (std::abs(real("diagnostics.delta") - delta) > 1e-12)
            add("diagnostics.delta", "diagnostics.delta must equal spectrum.delta");
    }
    return out;
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::vector<Violation> violations;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto t = trim(line);
        if (t.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            violations.push_back({ErrorKind::TypeMismatch, line_no, "", "expected `key = value`, got '" + t + "'"});
        } else {
            const auto key = trim(std::string_view(t).substr(0, eq));
            const auto raw = trim(std::string_view(t).substr(eq + 1));
            try {
                cfg.set_from_text(key, raw);
            } catch (const Error& e) {
                const std::string msg = e.kind() == ErrorKind::UnknownKey
                                            ? "unknown key '" + key + "' at line " + std::to_string(line_no)
                                            : "key '" + key + "' cannot take value '" + raw + "'";
                violations.push_back({e.kind(), line_no, key, msg});
            }
        }
        if (end == text.size()) break;
    }
    for (auto& v : cfg.check_invariants()) violations.push_back(std::move(v));
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return cfg;
}

std::string serialize_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& s : config_schema()) out += s.key + " = " + value_text(config.values().at(s.key)) + "\n";
    return out;
}

std::string env_name(const std::string& key) {
    std::string s = "SPDELAB_";
    for (char c : key) s += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

void apply_env_overrides(ExperimentConfig& config) {
    std::vector<Violation> violations;
    for (const auto& s : config_schema()) {
        const char* v = std::getenv(env_name(s.key).c_str());
        if (!v) continue;
        try {
            config.set_from_text(s.key, trim(v));
        } catch (const Error& e) {
            violations.push_back({e.kind(), 0, s.key, e.message() + " (from " + env_name(s.key) + ")"});
        }
    }
    for (auto& v : config.check_invariants()) violations.push_back(std::move(v));
    if (!violations.empty()) throw ConfigError(std::move(violations));
}

}  // namespace spdelab::lab

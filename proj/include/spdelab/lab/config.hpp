#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spdelab/errors.hpp"

namespace spdelab::lab {

enum class ExperimentKind {
    OuValidate,
    Kolmogorov,
    Girsanov,
    Zvonkin,
    UniquenessByNoise,
    DeterministicNonuniqueness,
    KernelNorms,
};

const char* to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

using ConfigValue = std::variant<std::int64_t, double, bool, std::string, std::vector<double>>;

enum class ValueType { Int, Real, Bool, Text, RealList };

struct KeySpec {
    std::string key;
    ValueType type;
    ConfigValue default_value;
    std::string help;
};

/// Every accepted key with its type and default.
const std::vector<KeySpec>& config_schema();

struct Violation {
    ErrorKind kind;
    std::size_t line = 0;  // 0 when not tied to a line
    std::string key;
    std::string message;
};

/// Thrown by parse_config with every violation found, not just the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

class ExperimentConfig {
public:
    ExperimentConfig();  // all defaults

    ExperimentKind kind() const;
    std::int64_t integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    const std::vector<double>& list(const std::string& key) const;
    std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed")); }

    void set(const std::string& key, ConfigValue value);
    /// Parse `raw` according to the key's type; throws UnknownKey / TypeMismatch.
    void set_from_text(const std::string& key, const std::string& raw);
    const std::map<std::string, ConfigValue>& values() const { return values_; }

    /// Violations of cross-key invariants (q > 4 with diagnostics, gamma = q/2, files exist, ...).
    std::vector<Violation> check_invariants() const;

    bool operator==(const ExperimentConfig& other) const { return values_ == other.values_; }

private:
    const ConfigValue& get(const std::string& key) const;
    std::map<std::string, ConfigValue> values_;
};

/// `key = value` lines, `#` comments, dotted keys.
ExperimentConfig parse_config(std::string_view text);
/// Canonical form: every key in schema order.
std::string serialize_config(const ExperimentConfig& config);
/// SPDELAB_<KEY> with dots as underscores, upper case (SPDELAB_SPECTRUM_M for spectrum.m).
void apply_env_overrides(ExperimentConfig& config);
std::string env_name(const std::string& key);

}  // namespace spdelab::lab

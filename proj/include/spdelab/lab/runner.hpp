#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdelab/lab/config.hpp"

namespace spdelab::lab {

struct Check {
    std::string id;         // e.g. "ou_variance_mode_3"
    int criterion = 0;      // acceptance criterion number, 0 for informational checks
    std::string relation;   // "<=", ">=", "within"
    double measured = 0.0;
    double tolerance = 0.0;
    double std_error = 0.0;
    bool passed = false;
    std::string note;
};

struct SeriesPoint {
    double x = 0.0;
    double y = 0.0;
    double y_err = 0.0;
};

struct Series {
    std::string name;
    std::vector<SeriesPoint> points;
};

struct ReportBundle {
    ExperimentKind kind = ExperimentKind::OuValidate;
    std::uint64_t seed = 0;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    std::vector<Check> checks;
    std::vector<Series> series;
    std::vector<std::string> required_series;
    std::map<std::string, std::string> csv_files;  // file name -> contents
    double runtime_seconds = 0.0;

    bool passed() const;
    /// Checks belonging to one acceptance criterion.
    std::vector<Check> criterion(int id) const;
    const Series* find_series(const std::string& name) const;
};

/// Runs the experiment named by experiment.kind. Module errors propagate with the
/// experiment kind prepended to the message.
ReportBundle run_experiment(const ExperimentConfig& config);

nlohmann::ordered_json summary_json(const ReportBundle& bundle);
/// summary.json, manifest.json, plotdata.csv and every CSV in the bundle.
void write_bundle(const ReportBundle& bundle, const ExperimentConfig& config, const std::filesystem::path& dir);

}  // namespace spdelab::lab

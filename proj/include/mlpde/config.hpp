#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlpde/problem.hpp"

namespace mlpde {

/// Config parse or validation failure. `where` names the line (TOML), byte
/// offset (JSON) or field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(where) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

/// Parses the TOML subset used by experiment configs into JSON: tables,
/// arrays of tables, dotted keys, strings, integers, floats, booleans, arrays
/// and inline tables. Dates are not supported.
nlohmann::json parse_toml(const std::string& text);

enum class Mode { convergence, dimension_scan, em_rate, cost_audit, residual };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct PointSpec {
    double t = 0.0;
    std::vector<double> x;
    friend bool operator==(const PointSpec&, const PointSpec&) = default;
};

/// Evaluation points: an explicit list, or the tensor grid of `per_axis`
/// points over [-k, k]^d at each of `times`.
struct PointsConfig {
    std::vector<PointSpec> explicit_points;
    double k = 0.0;
    int per_axis = 1;
    std::vector<double> times{0.0};

    bool is_grid() const { return explicit_points.empty(); }
    friend bool operator==(const PointsConfig&, const PointsConfig&) = default;
};

struct ExperimentConfig {
    ProblemSpec problem;
    Mode mode = Mode::convergence;
    std::vector<int> levels{1};
    std::vector<int> dimensions{1};
    std::vector<int> grids{4};
    int K_ref = 1024;
    int replications = 10;
    /// Paths per Monte Carlo estimate in em-rate and residual modes.
    std::int64_t paths = 10000;
    /// Paths per residual estimate of an MLP candidate in residual mode.
    std::int64_t candidate_paths = 1000;
    /// t - s for weight (V) comparisons in em-rate mode.
    double weight_gap = 0.5;
    PointsConfig points;
    std::uint64_t seed = 0;
    /// Evaluation times above T - t_cap are rejected.
    double t_cap = 1e-3;
    std::string csv_name = "results.csv";
    std::string json_name = "run.json";

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

/// Validates and converts. Field errors name the offending field path.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Reads a .toml or .json file (by extension; falls back to content sniffing).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, bool toml);

/// 16 hex digits of FNV-1a over the canonical JSON of the config.
std::string config_hash(const ExperimentConfig& c);

/// Evaluation points for dimension d, checked against [0, T - t_cap].
std::vector<std::pair<double, std::vector<double>>> expand_points(const ExperimentConfig& c, int d,
                                                                   double T);

}  // namespace mlpde

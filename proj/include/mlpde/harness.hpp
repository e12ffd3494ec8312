#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlpde/config.hpp"
#include "mlpde/cost.hpp"
#include "mlpde/problem.hpp"

namespace mlpde {

inline constexpr int kCsvSchemaVersion = 1;

/// Per-component Lambda-weighted RMS error over replications, with a
/// jackknife standard error of each RMS.
struct WeightedError {
    Vec rms;
    Vec rms_se;
};

/// For each nu: Lambda_nu(T - t) sqrt(mean_i (pr_nu(U_i) - pr_nu(exact))^2).
/// Requires at least two estimates.
WeightedError estimate_weighted_error(const std::vector<Vec>& estimates, const Vec& exact,
                                      double t, double T);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// One CSV row. Empty optionals are written as empty fields.
struct ResultRecord {
    std::string config_hash;
    std::string mode;
    std::string problem;
    int d = 0;
    std::optional<int> n;
    std::optional<double> m;
    std::optional<int> K;
    std::optional<int> point;
    std::optional<double> t;
    std::vector<double> x;
    std::optional<int> nu;
    std::optional<double> mean;
    std::optional<double> std_error;
    std::optional<double> exact;
    std::optional<double> weighted_rms;
    std::optional<double> weighted_rms_se;
    std::string metric;
    std::optional<double> metric_value;
    std::optional<CostLedger> ledger;
    std::optional<double> theoretical_cost;
    std::optional<double> upper_bound;
    double wall_time_s = 0.0;
};

/// RFC-4180 CSV with a header row. The last column is the wall time; every
/// other column is a deterministic function of (config, seed).
std::string records_to_csv(const std::vector<ResultRecord>& records);
std::vector<std::string> csv_header();

struct RunOptions {
    int threads = 1;
    bool check_assertions = false;
    std::string out_dir = ".";
    bool write_files = true;
    std::optional<std::uint64_t> seed;
};

struct RunResult {
    ExperimentConfig config;
    std::vector<ResultRecord> records;
    std::vector<std::string> assertion_failures;
    std::vector<std::string> estimator_failures;
    nlohmann::json sidecar;

    /// 0 on success; 1 on estimator failures; 2 on failed assertions (when checked).
    int exit_code(bool check_assertions) const;
};

/// Runs the configured experiment. Work items are independent and their
/// results are reduced in index order, so output does not depend on `threads`.
RunResult run(const ExperimentConfig& config, const RunOptions& options);

/// Closed-form and finite-difference reference values at the configured points,
/// tagged with the config hash. An existing file with the same hash is left
/// alone; a different hash is an error unless `regenerate` is set.
/// Returns the path written or kept.
std::string write_oracle_golden(const ExperimentConfig& config, const std::string& out_dir,
                                bool regenerate);

}  // namespace mlpde

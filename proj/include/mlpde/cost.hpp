#pragma once

#include <cstdint>
#include <string>

namespace mlpde {

enum class Rounding { ceil, round };

/// Number of samples realizing the real-valued count x >= 0. A relative slack
/// of 1e-9 absorbs pow() rounding, so ceil(36.000000000001) is 36.
std::int64_t round_count(double x, Rounding policy);

/// Instrumented work of one or more estimator runs. Counters only increase;
/// merging is componentwise addition.
struct CostLedger {
    std::uint64_t g_evals = 0;
    std::uint64_t f_evals = 0;
    /// mu and (D mu)(x)(h) applications
    std::uint64_t mu_like = 0;
    /// sigma, sigma^-1 and (D sigma)(x)(h) applications
    std::uint64_t sigma_like = 0;
    std::uint64_t gaussian_draws = 0;
    std::uint64_t uniform_draws = 0;
    /// Euler cells integrated (one frozen-coefficient update each)
    std::uint64_t euler_cells = 0;
    std::uint64_t forward_paths = 0;
    /// Invocations of the MLP recursion at level n >= 1 (base cases do no work)
    std::uint64_t recursive_calls = 0;
    /// Weights V forced to 0 because t - s fell below 1e-12
    std::uint64_t degenerate_weights = 0;

    std::uint64_t scalar_draws() const { return gaussian_draws + uniform_draws; }
    std::uint64_t coeff_evals() const { return mu_like + sigma_like; }
    /// Unit-weight total: draws + coefficient evaluations + f + g.
    std::uint64_t weighted_total() const {
        return scalar_draws() + coeff_evals() + f_evals + g_evals;
    }

    CostLedger& operator+=(const CostLedger& o);
    friend CostLedger operator+(CostLedger a, const CostLedger& b) { return a += b; }
    friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

/// Per-sample unit costs in the recurrence: one forward step (e), one f
/// sample (f) and one terminal g sample (g).
struct CostModelParams {
    double e = 1.0;
    double f = 1.0;
    double g = 1.0;
};

/// Units matching what the estimator actually spends in dimension d:
///   e = 3d + 4: d Gaussian draws, mu and d columns of D mu, sigma, sigma^-1 and
///               d columns of D sigma, plus one uniform for the proxy time;
///   f = 2: f at the current and the previous level;
///   g = 3: g(X_T), g(x) per terminal sample, plus the leading g(x).
CostModelParams canonical_units(int d);

/// The cost recurrence evaluated as an equality:
///   C_n = M_n (K e + g) 1{n>=1} + sum_{l=0}^{n-1} M_{n-l} (K e + f + C_l + C_{l-1}),
/// with M_j = round_count(m^j) and C_{-1} = C_0 = 0.
double theoretical_cost(int n, double m, int K, const CostModelParams& units,
                        Rounding rounding = Rounding::ceil);

/// K (e + f + g) (3m)^n
double cost_upper_bound(int n, double m, int K, const CostModelParams& units);

struct MlpParams;

struct CostReport {
    CostLedger ledger;
    double weighted_total = 0.0;
    double theoretical = 0.0;
    double upper_bound = 0.0;
    bool within_theoretical = false;
    bool within_upper_bound = false;

    bool ok() const { return within_theoretical && within_upper_bound; }
    std::string describe() const;
};

/// Compares the ledger of a single estimator call with the recurrence and its
/// closed-form bound.
CostReport reconcile(const CostLedger& ledger, const MlpParams& params,
                     const CostModelParams& units);

}  // namespace mlpde

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlpde/cost.hpp"
#include "mlpde/problem.hpp"
#include "mlpde/rng.hpp"

namespace mlpde {

struct MlpParams {
    /// Picard level; n <= 0 gives the zero estimator.
    int n = 1;
    /// Branching base, real-valued; per-level counts are round_count(m^j).
    double m = 1.0;
    /// Number of Euler grid intervals on [0,T].
    int K = 1;
    Rounding rounding = Rounding::ceil;

    std::int64_t sample_count(int exponent) const;
};

/// The (n, n^(1/3), n^(n/3)) schedule: m = n^(1/3), K = ceil(n^(n/3)).
/// Refuses n >= 20 unless allow_large is set.
MlpParams schedule(int n, bool allow_large = false);

/// A non-finite intermediate inside the recursion. Carries the theta-path of
/// the offending sample so it can be replayed.
class MlpFailure : public std::runtime_error {
public:
    MlpFailure(const std::string& what, RandomKey key)
        : std::runtime_error(what + " [" + key.to_string() + "]"), key_(std::move(key)) {}
    const RandomKey& key() const { return key_; }

private:
    RandomKey key_;
};

/// Test seams for the recursion. Both are unset in normal use.
struct MlpHooks {
    /// Replaces the recursive evaluation of U at (level, s, X_s, key).
    std::function<Vec(int, double, const Vec&, const RandomKey&)> inner;
    /// When set, receives the top-level block contributions: entry 0 is the
    /// terminal block without the (g(x), 0) term, entry l + 1 the level-l block.
    std::vector<Vec>* blocks = nullptr;
};

struct Estimate {
    Vec value;
    CostLedger ledger;
};

/// One realization of the multilevel Picard estimator U_{n,m,K}(t, x):
///
///   (g(x), 0) + sum_{i=1}^{M_n} (g(X_T) - g(x)) Z_T / M_n
///   + sum_{l=0}^{n-1} sum_{i=1}^{M_{n-l}}
///       [f(s, X_s, U_l(s, X_s)) - 1{l>=1} f(s, X_s, U_{l-1}(s, X_s))] Z_s
///       / (M_{n-l} rho(t, s))
///
/// Terminal sample i uses key.child(0, -i). Level sample (l, i) draws the proxy
/// time and its Brownian path from key.child(l, i), recurses into U_l with that
/// key and into U_{l-1} with key.child(l, -i); both inner evaluations share the
/// same (s, X_s) and weight Z_s.
///
/// Every evaluation and draw is counted in `ledger`.
Vec mlp_value(const PdeProblem& problem, const MlpParams& params, double t, const Vec& x,
              const RandomKey& key, CostLedger& ledger, const MlpHooks* hooks = nullptr);

Estimate mlp_estimate(const PdeProblem& problem, const MlpParams& params, double t, const Vec& x,
                      const RandomKey& key);

struct EvalPoint {
    double t = 0.0;
    Vec x;
};

struct Realization {
    Vec value;
    CostLedger ledger;
    bool ok = true;
    std::string error;
};

/// R independent realizations per point; replication r at point p uses
/// base_key.child(p, r). Failures are recorded per realization.
std::vector<std::vector<Realization>> mlp_batch(const PdeProblem& problem, const MlpParams& params,
                                                const std::vector<EvalPoint>& points, int R,
                                                const RandomKey& base_key, int threads = 1);

}  // namespace mlpde

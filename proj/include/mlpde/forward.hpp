#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlpde/cost.hpp"
#include "mlpde/problem.hpp"
#include "mlpde/rng.hpp"

namespace mlpde {

/// Uniform grid {0, T/K, ..., T}. Grid points are computed as (k/K) T so that
/// a grid of K points is a bitwise subset of any grid of a multiple of K.
class GridMap {
public:
    GridMap(double T, int K);

    double T() const { return T_; }
    int K() const { return K_; }
    double point(int k) const { return (static_cast<double>(k) / K_) * T_; }

    /// Largest grid point strictly below t, or 0 when t = 0. Exact grid points
    /// map to their predecessor.
    double floor(double t) const;

    /// Index of the first grid point strictly greater than t.
    int first_index_above(double t) const;

private:
    double T_;
    int K_;
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One cell [t0, t1) of the event-time schedule. The coefficients used on the
/// cell are frozen at the last grid point <= t0 (or at the start time).
struct EulerCell {
    double t0 = 0.0;
    double t1 = 0.0;
    bool refreeze = false;
    /// Index into query_times reached at t1, or -1.
    int query = -1;
};

/// Ordered union of {s}, the grid points in (s, last query], and the query
/// times, as consecutive cells. Query times must be strictly increasing in (s, T].
std::vector<EulerCell> euler_schedule(const GridMap& grid, double s,
                                      std::span<const double> query_times);

/// Euler states sampled along one Brownian path.
struct ForwardSample {
    double s = 0.0;
    Vec x;
    std::vector<double> query_times;
    /// X at each query time
    std::vector<Vec> X;
    /// Z = (1, V) at each query time
    std::vector<Vec> Z;
    std::uint64_t draws_used = 0;
    std::size_t cells = 0;
};

/// Integrates X, D and the weight accumulator with caller-supplied Brownian
/// increments, laid out cell-major then coordinate (d per cell of the schedule).
ForwardSample integrate_increments(const PdeProblem& problem, const GridMap& grid, double s,
                                   const Vec& x, std::span<const double> query_times,
                                   std::span<const double> increments,
                                   CostLedger* ledger = nullptr);

/// Frozen-coefficient Euler-Maruyama for X, the derivative flow D (D_s = I) and
/// V_t = (1/(t-s)) sum (sigma^-1(X_a) D_a)^T dW, all driven by one Brownian
/// path drawn from the stream in time-major, coordinate-minor order.
ForwardSample simulate_forward(const PdeProblem& problem, const GridMap& grid, double s,
                               const Vec& x, std::span<const double> query_times,
                               RandomStream& stream, CostLedger* ledger = nullptr);

ForwardSample simulate_forward(const PdeProblem& problem, const GridMap& grid, double s,
                               const Vec& x, std::span<const double> query_times,
                               const RandomKey& key, CostLedger* ledger = nullptr);

struct MeanEstimate {
    Vec mean;
    Vec std_error;
};

/// (g(x), 0) + (1/M) sum_i (g(X_T^i) - g(x)) Z_T^i over M paths keyed key.child(i),
/// i = 1..M. Unbiased for (u, grad u) of the discretized problem when f = 0.
MeanEstimate bel_value_and_gradient(const PdeProblem& problem, const GridMap& grid, double t,
                                    const Vec& x, std::int64_t M, const RandomKey& key,
                                    int threads = 1, CostLedger* ledger = nullptr);

}  // namespace mlpde

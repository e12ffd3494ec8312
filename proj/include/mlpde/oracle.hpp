#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "mlpde/forward.hpp"
#include "mlpde/problem.hpp"
#include "mlpde/rng.hpp"

namespace mlpde {

enum class Provenance { closed_form, finite_difference, nested_picard };

std::string to_string(Provenance p);

/// Deterministic reference for (u, grad u).
struct ReferenceSolution {
    std::function<Vec(double, const Vec&)> evaluate;
    Provenance provenance = Provenance::closed_form;

    Vec operator()(double t, const Vec& x) const { return evaluate(t, x); }
};

/// Wraps problem.known_solution. Throws std::invalid_argument if there is none.
ReferenceSolution closed_form_reference(const PdeProblem& problem);

struct FdOptions {
    int nt = 2000;
    int nx = 801;
    /// Half-width of the truncated domain around `center`.
    double radius = 8.0;
    double center = 0.0;
};

/// Backward Crank-Nicolson for the d = 1 equation on a truncated interval.
/// The nonlinearity is treated explicitly, extrapolated to the half step from
/// the two previous levels (explicit Euler on the first step). Central
/// differences in space; Dirichlet data from the known solution when present,
/// otherwise linear extrapolation. Returns (v, v_x) interpolated bilinearly in
/// (t, x). Throws std::runtime_error when the solution blows up.
ReferenceSolution fd_solve_1d(const PdeProblem& problem, const FdOptions& options = {});

/// X_t and V_t at two resolutions driven by the same Brownian path: the fine
/// increments are summed over each coarse cell.
struct CoupledPaths {
    Vec X_coarse;
    Vec X_fine;
    Vec V_coarse;
    Vec V_fine;
};

CoupledPaths coupled_fine_reference(const PdeProblem& problem, double s, const Vec& x, double t,
                                    int K_coarse, int K_fine, const RandomKey& key);

/// Monte Carlo estimate of RHS(candidate)(t, x) - candidate(t, x) where
///   RHS(w)(t, x) = E[g(X_T) Z_T] + int_t^T E[f(r, X_r, w(r, X_r)) Z_r] dr,
/// using per path one terminal term and one arcsine-sampled interior term.
/// Path i draws its proxy time and increments from key.child(i).
MeanEstimate sfpe_residual(const PdeProblem& problem,
                           const std::function<Vec(double, const Vec&)>& candidate, double t,
                           const Vec& x, std::int64_t M, int K, const RandomKey& key,
                           int threads = 1);

struct NestedPicardOptions {
    int depth = 1;
    std::int64_t samples_per_level = 100;
    int K = 1;
    int threads = 1;
    /// Refuse when the projected number of Euler cells exceeds this.
    double max_forward_steps = 1e9;
};

/// Phi^depth(0)(t, x) by plain nested Monte Carlo: every inner evaluation of
/// the previous iterate re-simulates fresh paths. Exponential cost; for tiny
/// instances only.
Vec nested_picard(const PdeProblem& problem, double t, const Vec& x, const RandomKey& key,
                  const NestedPicardOptions& options);

}  // namespace mlpde

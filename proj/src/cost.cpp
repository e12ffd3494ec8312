#include "mlpde/cost.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mlpde/mlp.hpp"

namespace mlpde {

std::int64_t round_count(double x, Rounding policy) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("round_count: bad count");
    switch (policy) {
    case Rounding::ceil:
        return static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-9)));
    case Rounding::round:
        return static_cast<std::int64_t>(std::llround(x));
    }
    return 0;
}

CostLedger& CostLedger::operator+=(const CostLedger& o) {
    g_evals += o.g_evals;
    f_evals += o.f_evals;
    mu_like += o.mu_like;
    sigma_like += o.sigma_like;
    gaussian_draws += o.gaussian_draws;
    uniform_draws += o.uniform_draws;
    euler_cells += o.euler_cells;
    forward_paths += o.forward_paths;
    recursive_calls += o.recursive_calls;
    degenerate_weights += o.degenerate_weights;
    return *this;
}

CostModelParams canonical_units(int d) {
    return {3.0 * d + 4.0, 2.0, 3.0};
}

double theoretical_cost(int n, double m, int K, const CostModelParams& units, Rounding rounding) {
    if (n < -1) throw std::domain_error("theoretical_cost: n must be >= -1");
    if (!(m > 0.0) || K < 1) throw std::domain_error("theoretical_cost: bad m or K");
    if (n <= 0) return 0.0;

    // C[j + 1] holds C_j for j = -1..n
    std::vector<double> C(n + 2, 0.0);
    auto count = [&](int j) { return static_cast<double>(round_count(std::pow(m, j), rounding)); };
    for (int level = 1; level <= n; ++level) {
        double c = count(level) * (K * units.e + units.g);
        for (int l = 0; l < level; ++l) {
            c += count(level - l) * (K * units.e + units.f + C[l + 1] + C[l]);
        }
        C[level + 1] = c;
    }
    return C[n + 1];
}

double cost_upper_bound(int n, double m, int K, const CostModelParams& units) {
    if (n < 1) throw std::domain_error("cost_upper_bound: n must be >= 1");
    return K * (units.e + units.f + units.g) * std::pow(3.0 * m, n);
}

std::string CostReport::describe() const {
    std::ostringstream os;
    os << "g=" << ledger.g_evals << " f=" << ledger.f_evals << " mu=" << ledger.mu_like
       << " sigma=" << ledger.sigma_like << " gauss=" << ledger.gaussian_draws
       << " unif=" << ledger.uniform_draws << " cells=" << ledger.euler_cells
       << " total=" << weighted_total << " recurrence=" << theoretical
       << " bound=" << upper_bound;
    if (!within_theoretical) os << " [exceeds recurrence]";
    if (!within_upper_bound) os << " [exceeds bound]";
    return os.str();
}

CostReport reconcile(const CostLedger& ledger, const MlpParams& params,
                     const CostModelParams& units) {
    CostReport r;
    r.ledger = ledger;
    r.weighted_total = static_cast<double>(ledger.weighted_total());
    r.theoretical = theoretical_cost(params.n, params.m, params.K, units, params.rounding);
    r.upper_bound = params.n >= 1 ? cost_upper_bound(params.n, params.m, params.K, units) : 0.0;
    r.within_theoretical = r.weighted_total <= r.theoretical;
    r.within_upper_bound = r.weighted_total <= r.upper_bound;
    return r;
}

}  // namespace mlpde

#include <cmath>

#include <doctest.h>

#include "mlpde/cost.hpp"
#include "mlpde/mlp.hpp"
#include "unit/support.hpp"

using namespace mlpde;

TEST_CASE("round_count") {
    CHECK(round_count(std::pow(std::cbrt(6.0), 6), Rounding::ceil) == 36);
    CHECK(round_count(2.0, Rounding::ceil) == 2);
    CHECK(round_count(2.01, Rounding::ceil) == 3);
    CHECK(round_count(2.5, Rounding::round) == 3);
    CHECK(round_count(2.49, Rounding::round) == 2);
    CHECK_THROWS_AS(round_count(-1.0, Rounding::ceil), std::domain_error);
    CHECK_THROWS_AS(round_count(INFINITY, Rounding::ceil), std::domain_error);
}

TEST_CASE("theoretical_cost hand-unrolled values") {
    const CostModelParams ones{1, 1, 1};
    CHECK(theoretical_cost(0, 2.0, 1, ones) == 0.0);
    CHECK(theoretical_cost(-1, 2.0, 1, ones) == 0.0);
    CHECK(theoretical_cost(1, 2.0, 1, ones) == 8.0);
    CHECK(theoretical_cost(2, 2.0, 1, ones) == 36.0);
    // C3 = 8 (K e + g) + 8 (2 + C0 + C-1) + 4 (2 + C1 + C0) + 2 (2 + C2 + C1)
    //    = 16 + 16 + 40 + 92 = 164
    CHECK(theoretical_cost(3, 2.0, 1, ones) == 164.0);
    // C4 = 16*2 + 16*2 + 8*(2+8) + 4*(2+36+8) + 2*(2+164+36) = 32+32+80+184+404 = 732
    CHECK(theoretical_cost(4, 2.0, 1, ones) == 732.0);
    // m = 1, K = 3, units (2, 5, 7): C1 = (6 + 7) + (6 + 5) = 24, C2 = 13 + (11) + (11 + 24) = 59
    CHECK(theoretical_cost(1, 1.0, 3, {2, 5, 7}) == 24.0);
    CHECK(theoretical_cost(2, 1.0, 3, {2, 5, 7}) == 59.0);
    CHECK_THROWS_AS(theoretical_cost(-2, 2.0, 1, ones), std::domain_error);
}

TEST_CASE("upper bound examples and the dominance sweep") {
    const CostModelParams ones{1, 1, 1};
    CHECK(cost_upper_bound(1, 2.0, 1, ones) == 18.0);
    CHECK(cost_upper_bound(2, 2.0, 1, ones) == 108.0);
    CHECK_THROWS_AS(cost_upper_bound(0, 2.0, 1, ones), std::domain_error);
    for (int n = 1; n <= 8; ++n)
        for (double m : {1.0, 1.5, 2.0, 3.0})
            for (int K : {1, 4, 16})
                for (const CostModelParams& u : {ones, canonical_units(1), canonical_units(16)})
                    CHECK(theoretical_cost(n, m, K, u) <= cost_upper_bound(n, m, K, u));
}

TEST_CASE("theoretical_cost is monotone in every argument") {
    const CostModelParams base{2, 1, 3};
    for (int n = 0; n <= 6; ++n) {
        const double c = theoretical_cost(n, 1.7, 5, base);
        CHECK(theoretical_cost(n + 1, 1.7, 5, base) >= c);
        CHECK(theoretical_cost(n, 1.9, 5, base) >= c);
        CHECK(theoretical_cost(n, 1.7, 6, base) >= c);
        CHECK(theoretical_cost(n, 1.7, 5, {2.5, 1, 3}) >= c);
        CHECK(theoretical_cost(n, 1.7, 5, {2, 1.5, 3}) >= c);
        CHECK(theoretical_cost(n, 1.7, 5, {2, 1, 3.5}) >= c);
    }
}

TEST_CASE("ledger arithmetic") {
    CostLedger a;
    a.g_evals = 1;
    a.gaussian_draws = 4;
    a.uniform_draws = 1;
    a.mu_like = 2;
    a.sigma_like = 3;
    a.f_evals = 5;
    CostLedger b = a + a;
    CHECK(b.g_evals == 2);
    CHECK(b.scalar_draws() == 10);
    CHECK(b.coeff_evals() == 10);
    CHECK(b.weighted_total() == 2 + 10 + 10 + 10);
}

TEST_CASE("executed ledgers stay within the recurrence and its bound") {
    std::vector<PdeProblem> problems = {make_manufactured_gradient_problem(1, 1.0, 0.5),
                                        make_nonlinear_diffusion_problem(3, 1.0),
                                        testing_support::coupled_problem()};
    std::vector<MlpParams> configs = {schedule(1), schedule(2), schedule(3), schedule(4),
                                      MlpParams{2, 2.0, 1, Rounding::ceil},
                                      MlpParams{3, 2.0, 5, Rounding::ceil},
                                      MlpParams{3, 1.3, 2, Rounding::round}};
    for (const auto& p : problems) {
        for (const auto& params : configs) {
            for (double t : {0.0, 0.37, 0.999}) {
                CostLedger ledger;
                mlp_value(p, params, t, Vec::Constant(p.d, 0.2), RandomKey(3), ledger);
                const CostReport r = reconcile(ledger, params, canonical_units(p.d));
                INFO(p.id << " n=" << params.n << " t=" << t << " " << r.describe());
                CHECK(r.within_theoretical);
                CHECK(r.within_upper_bound);
            }
        }
    }
}

TEST_CASE("n = 1, m = 1, K = 1 on the heat problem: exact counts") {
    const PdeProblem p = make_heat_problem(1, 1.0, HeatVariant::quadratic);
    CostLedger ledger;
    mlp_value(p, MlpParams{1, 1.0, 1, Rounding::ceil}, 0.0, Vec::Constant(1, 0.5), RandomKey(1),
              ledger);
    CHECK(ledger.g_evals == 3);
    CHECK(ledger.f_evals == 1);
    CHECK(ledger.uniform_draws == 1);
    CHECK(ledger.gaussian_draws == 2);
    // Constant coefficients: mu, sigma, sigma^-1 once per path.
    CHECK(ledger.mu_like == 2);
    CHECK(ledger.sigma_like == 4);
    CHECK(ledger.forward_paths == 2);
}

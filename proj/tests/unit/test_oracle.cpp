#include <cmath>

#include <doctest.h>

#include "mlpde/oracle.hpp"
#include "unit/support.hpp"

using namespace mlpde;

namespace {

double max_value_error(const ReferenceSolution& ref, const PdeProblem& p, double t, double half) {
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const Vec x = Vec::Constant(1, -half + 2.0 * half * i / 400.0);
        worst = std::max(worst, std::abs(ref(t, x)(0) - p.known_solution(t, x)(0)));
    }
    return worst;
}

}  // namespace

TEST_CASE("closed_form_reference") {
    const PdeProblem p = make_heat_problem(2, 1.0, HeatVariant::cosine);
    const ReferenceSolution ref = closed_form_reference(p);
    CHECK(ref.provenance == Provenance::closed_form);
    CHECK(ref(0.3, Vec::Zero(2)) == p.known_solution(0.3, Vec::Zero(2)));
    CHECK_THROWS_AS(closed_form_reference(make_nonlinear_diffusion_problem(1, 1.0)),
                    std::invalid_argument);
    CHECK(to_string(Provenance::finite_difference) == "finite-difference");
}

TEST_CASE("fd_solve_1d against closed forms") {
    const PdeProblem heat = make_heat_problem(1, 1.0, HeatVariant::cosine);
    const ReferenceSolution a = fd_solve_1d(heat);
    CHECK(a.provenance == Provenance::finite_difference);
    CHECK(max_value_error(a, heat, 0.0, 4.0) < 1e-4);

    const PdeProblem man = make_manufactured_gradient_problem(1, 1.0, 0.5);
    const ReferenceSolution b = fd_solve_1d(man);
    CHECK(max_value_error(b, man, 0.0, 4.0) < 1e-3);
    const Vec x = Vec::Constant(1, 0.3);
    CHECK(std::abs(b(0.0, x)(1) - man.known_solution(0.0, x)(1)) < 1e-3);
    CHECK(std::abs(b(0.5, x)(0) - man.known_solution(0.5, x)(0)) < 1e-3);
}

TEST_CASE("fd_solve_1d converges at second order") {
    const PdeProblem man = make_manufactured_gradient_problem(1, 1.0, 0.5);
    FdOptions coarse;
    coarse.nt = 100;
    coarse.nx = 161;
    FdOptions fine = coarse;
    fine.nt = 200;
    fine.nx = 321;
    // Compare on coarse nodes so interpolation does not enter.
    double ec = 0.0, ef = 0.0;
    const ReferenceSolution c = fd_solve_1d(man, coarse), f = fd_solve_1d(man, fine);
    for (int i = 40; i <= 120; ++i) {
        const Vec x = Vec::Constant(1, -8.0 + 0.1 * i);
        const double exact = man.known_solution(0.0, x)(0);
        ec = std::max(ec, std::abs(c(0.0, x)(0) - exact));
        ef = std::max(ef, std::abs(f(0.0, x)(0) - exact));
    }
    CHECK(ec / ef >= 3.0);
}

TEST_CASE("fd_solve_1d without a closed form and failure modes") {
    const PdeProblem nl = make_nonlinear_diffusion_problem(1, 1.0);
    const ReferenceSolution r = fd_solve_1d(nl);
    // Diffusion is within 10% of the heat equation, so the solution stays close.
    const Vec x = Vec::Constant(1, 0.2);
    const double heat = std::exp(-0.5) * std::cos(0.2);
    CHECK(std::abs(r(0.0, x)(0) - heat) < 0.1);

    PdeProblem explode = make_heat_problem(1, 1.0, HeatVariant::cosine);
    explode.f = [](double, const Vec&, const Vec& w) { return 1e3 * w(0); };
    FdOptions o;
    o.nt = 50;
    o.nx = 101;
    CHECK_THROWS_AS(fd_solve_1d(explode, o), std::runtime_error);
    CHECK_THROWS_AS(fd_solve_1d(make_heat_problem(2, 1.0, HeatVariant::cosine)), std::domain_error);
    CHECK_THROWS_AS(r(0.0, Vec::Constant(1, 100.0)), std::domain_error);
}

TEST_CASE("coupled_fine_reference") {
    const PdeProblem nl = make_nonlinear_diffusion_problem(2, 1.0);
    const Vec x = (Vec(2) << 0.1, 0.4).finished();
    const auto same = coupled_fine_reference(nl, 0.1, x, 0.9, 8, 8, RandomKey(1));
    CHECK(same.X_coarse == same.X_fine);
    CHECK(same.V_coarse == same.V_fine);

    const PdeProblem heat = make_heat_problem(2, 1.0, HeatVariant::cosine);
    const auto c = coupled_fine_reference(heat, 0.1, x, 0.9, 4, 64, RandomKey(2));
    CHECK((c.X_coarse - c.X_fine).norm() < 1e-12);
    CHECK((c.V_coarse - c.V_fine).norm() < 1e-12);

    const auto n = coupled_fine_reference(nl, 0.1, x, 0.9, 4, 64, RandomKey(2));
    CHECK((n.X_coarse - n.X_fine).norm() > 0.0);
    CHECK_THROWS_AS(coupled_fine_reference(nl, 0.1, x, 0.9, 4, 10, RandomKey(2)),
                    std::domain_error);
}

TEST_CASE("sfpe_residual") {
    const Vec x = (Vec(2) << 0.3, -0.1).finished();
    const std::int64_t M = 20000;

    const PdeProblem heat = make_heat_problem(2, 1.0, HeatVariant::cosine);
    const auto exact = sfpe_residual(heat, heat.known_solution, 0.0, x, M, 4, RandomKey(1));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(exact.mean(k)) < 3.5 * exact.std_error(k));

    const auto zero = sfpe_residual(
        heat, [](double, const Vec&) { return Vec::Zero(3); }, 0.0, x, M, 4, RandomKey(2));
    const Vec u = heat.known_solution(0.0, x);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(zero.mean(k) - u(k)) < 3.5 * zero.std_error(k));

    const PdeProblem man = make_manufactured_gradient_problem(2, 1.0, 0.5);
    const auto m = sfpe_residual(man, man.known_solution, 0.2, x, M, 4, RandomKey(3), 2);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(m.mean(k)) < 3.5 * m.std_error(k));
    const auto m1 = sfpe_residual(man, man.known_solution, 0.2, x, M, 4, RandomKey(3), 1);
    CHECK(m.mean == m1.mean);
}

TEST_CASE("nested_picard") {
    const Vec x = Vec::Constant(1, 0.3);
    const PdeProblem man = make_manufactured_gradient_problem(1, 1.0, 0.5);
    NestedPicardOptions o;
    o.depth = 0;
    CHECK(nested_picard(man, 0.0, x, RandomKey(1), o) == Vec::Zero(2));

    // Depth 1 on f = 0 and bel_value_and_gradient estimate the same E[g Z].
    const PdeProblem heat = make_heat_problem(1, 1.0, HeatVariant::cosine);
    o.depth = 1;
    o.samples_per_level = 20000;
    o.K = 4;
    const Vec np = nested_picard(heat, 0.0, x, RandomKey(5), o);
    const MeanEstimate bel = bel_value_and_gradient(heat, GridMap(1.0, 4), 0.0, x, 20000, RandomKey(6));
    for (int k = 0; k < 2; ++k) CHECK(std::abs(np(k) - bel.mean(k)) < 3.0 * std::sqrt(2.0) * bel.std_error(k));

    // Depth 2 targets Phi^2(0); replicate to get a standard error.
    o.depth = 2;
    o.samples_per_level = 30;
    const int R = 300;
    Vec sum = Vec::Zero(2), sq = Vec::Zero(2);
    for (int r = 0; r < R; ++r) {
        const Vec v = nested_picard(man, 0.0, x, RandomKey(7).child(r), o);
        sum += v;
        sq += v.array().square().matrix();
    }
    const Vec mean = sum / R;
    const Vec se = ((sq / R - mean.array().square().matrix()) / (R - 1)).cwiseSqrt();
    const Vec target = testing_support::PicardIterates(0.5, 1.0, 2)(0.0, 0.3);
    for (int k = 0; k < 2; ++k) CHECK(std::abs(mean(k) - target(k)) < 3.5 * se(k));

    o.depth = 3;
    o.samples_per_level = 2000;
    CHECK_THROWS_AS(nested_picard(man, 0.0, x, RandomKey(1), o), std::domain_error);
}

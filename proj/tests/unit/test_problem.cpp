#include <cmath>

#include <doctest.h>

#include "mlpde/problem.hpp"
#include "mlpde/rng.hpp"
#include "unit/support.hpp"

using namespace mlpde;

TEST_CASE("lambda weights and projections") {
    CHECK(lambda_weights(0.0, 3) == Vec::Unit(4, 0));
    CHECK(lambda_weights(1.0, 2) == Vec::Ones(3));
    CHECK(lambda_weights(0.25, 1) == (Vec(2) << 1.0, 0.5).finished());
    CHECK_THROWS_AS(lambda_weights(-0.1, 1), std::domain_error);
    const Vec w = (Vec(3) << 5.0, 1.0, 2.0).finished();
    CHECK(project(w, 0) == 5.0);
    CHECK(project(w, 2) == 2.0);
    CHECK_THROWS_AS(project(w, 3), std::domain_error);
}

namespace {

// Fourth-order central differences of the known solution; returns
// v_t + <mu, grad v> + 1/2 tr(sigma sigma^T Hess v) + f(t, x, v, grad v).
double pde_residual(const PdeProblem& p, double t, const Vec& x) {
    const double h = 1e-3;
    auto v = [&](double tt, const Vec& xx) { return p.known_solution(tt, xx)(0); };
    auto d1 = [&](auto&& fn) { return (-fn(2) + 8 * fn(1) - 8 * fn(-1) + fn(-2)) / (12 * h); };
    auto d2 = [&](auto&& fn) {
        return (-fn(2) + 16 * fn(1) - 30 * fn(0) + 16 * fn(-1) - fn(-2)) / (12 * h * h);
    };
    const double vt = d1([&](int k) { return v(t + k * h, x); });
    const int d = p.d;
    Vec grad(d);
    Mat hess(d, d);
    for (int i = 0; i < d; ++i) {
        grad(i) = d1([&](int k) {
            Vec y = x;
            y(i) += k * h;
            return v(t, y);
        });
        hess(i, i) = d2([&](int k) {
            Vec y = x;
            y(i) += k * h;
            return v(t, y);
        });
        for (int j = 0; j < i; ++j) {
            const double mixed = d1([&](int k) {
                Vec y = x;
                y(i) += k * h;
                return d1([&](int l) {
                    Vec z = y;
                    z(j) += l * h;
                    return v(t, z);
                });
            });
            hess(i, j) = hess(j, i) = mixed;
        }
    }
    const Mat a = p.sigma(x) * p.sigma(x).transpose();
    Vec w(d + 1);
    w << v(t, x), grad;
    return vt + grad.dot(p.mu(x)) + 0.5 * (a.cwiseProduct(hess)).sum() + p.f(t, x, w);
}

}  // namespace

TEST_CASE("built-in closed forms solve their PDEs") {
    RandomStream rs(RandomKey(1));
    std::vector<PdeProblem> problems;
    for (int d : {1, 2, 3}) {
        problems.push_back(make_heat_problem(d, 1.0, HeatVariant::quadratic));
        problems.push_back(make_heat_problem(d, 1.0, HeatVariant::cosine));
        problems.push_back(make_manufactured_gradient_problem(d, 1.0, 0.5));
        problems.push_back(make_manufactured_gradient_problem(d, 2.0, -0.3));
    }
    for (const auto& p : problems) {
        for (int trial = 0; trial < 100; ++trial) {
            const double t = 0.01 + 0.98 * p.T * rs.uniform();
            Vec x(p.d);
            for (int k = 0; k < p.d; ++k) x(k) = 4.0 * rs.uniform() - 2.0;
            CHECK(std::abs(pde_residual(p, t, x)) < 1e-8);
        }
        // Terminal condition and the gradient slot.
        const Vec x = Vec::LinSpaced(p.d, -0.3, 0.4);
        CHECK(p.known_solution(p.T, x)(0) == doctest::Approx(p.g(x)).epsilon(1e-14));
        const double h = 1e-5;
        for (int k = 0; k < p.d; ++k) {
            Vec xp = x, xm = x;
            xp(k) += h;
            xm(k) -= h;
            const double fd = (p.known_solution(0.3, xp)(0) - p.known_solution(0.3, xm)(0)) / (2 * h);
            CHECK(p.known_solution(0.3, x)(k + 1) == doctest::Approx(fd).epsilon(1e-8));
        }
    }
}

TEST_CASE("closed-form examples") {
    const PdeProblem q = make_heat_problem(2, 1.0, HeatVariant::quadratic);
    CHECK(q.known_solution(0.0, Vec::Zero(2))(0) == 2.0);
    CHECK(q.known_solution(0.4, Vec::Zero(2)).tail(2) == Vec::Zero(2));
    const PdeProblem c = make_heat_problem(1, 1.0, HeatVariant::cosine);
    CHECK(c.known_solution(1.0, Vec::Constant(1, 0.7))(0) == std::cos(0.7));
    const PdeProblem m = make_manufactured_gradient_problem(1, 1.0, 0.5);
    CHECK(m.g(Vec::Zero(1)) == 1.0);
    CHECK(m.known_solution(0.0, Vec::Constant(1, 0.3))(0) == doctest::Approx(std::exp(0.5) * std::cos(0.3)));
}

TEST_CASE("coefficient derivatives agree with finite differences") {
    std::vector<PdeProblem> problems = {make_nonlinear_diffusion_problem(3, 1.0),
                                        testing_support::coupled_problem()};
    for (const auto& p : problems) {
        const Vec x = Vec::LinSpaced(p.d, 0.2, 0.9);
        const Vec h = Vec::LinSpaced(p.d, 1.0, -0.5);
        const double eps = 1e-6;
        const Vec dmu = (p.mu(x + eps * h) - p.mu(x - eps * h)) / (2 * eps);
        CHECK((p.d_mu(x, h) - dmu).norm() < 1e-8);
        const Mat dsig = (p.sigma(x + eps * h) - p.sigma(x - eps * h)) / (2 * eps);
        CHECK((p.d_sigma(x, h) - dsig).norm() < 1e-8);
        CHECK((p.sigma(x) * p.sigma_inv(x) - Mat::Identity(p.d, p.d)).norm() < 1e-14);
    }
}

TEST_CASE("problem registry") {
    for (const auto& [id, text] : builtin_problems()) {
        const PdeProblem p = make_problem({id, 2, 1.5, 0.5});
        CHECK(p.id == id);
        CHECK(p.d == 2);
        CHECK(p.T == 1.5);
        CHECK(p.L.size() == 3);
        CHECK_FALSE(text.empty());
    }
    CHECK_THROWS_AS(make_problem({"nope", 1, 1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(make_heat_problem(0, 1.0, HeatVariant::cosine), std::domain_error);
    CHECK_THROWS_AS(make_heat_problem(1, 0.0, HeatVariant::cosine), std::domain_error);
}

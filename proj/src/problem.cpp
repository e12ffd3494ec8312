#include "mlpde/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlpde {

Vec lambda_weights(double t, int d) {
    if (!(t >= 0.0)) throw std::domain_error("lambda_weights: t must be nonnegative");
    if (d < 1) throw std::domain_error("lambda_weights: d must be positive");
    Vec w = Vec::Constant(d + 1, std::sqrt(t));
    w(0) = 1.0;
    return w;
}

double project(const Vec& w, int nu) {
    if (nu < 0 || nu >= w.size()) throw std::domain_error("project: index out of range");
    return w(nu);
}

namespace {

// mu = 0, sigma = I; shared by every built-in with additive noise.
void set_brownian_coefficients(PdeProblem& p) {
    const int d = p.d;
    p.mu = [d](const Vec&) { return Vec::Zero(d); };
    p.sigma = [d](const Vec&) { return Mat::Identity(d, d); };
    p.sigma_inv = [d](const Vec&) { return Mat::Identity(d, d); };
    p.d_mu = [d](const Vec&, const Vec&) { return Vec::Zero(d); };
    p.d_sigma = [d](const Vec&, const Vec&) { return Mat::Zero(d, d); };
    p.constant_coefficients = true;
}

void check_dims(int d, double T) {
    if (d < 1) throw std::domain_error("problem: d must be >= 1");
    if (!(T > 0.0)) throw std::domain_error("problem: T must be > 0");
}

}  // namespace

PdeProblem make_heat_problem(int d, double T, HeatVariant variant) {
    check_dims(d, T);
    PdeProblem p;
    p.d = d;
    p.T = T;
    set_brownian_coefficients(p);
    p.f = [](double, const Vec&, const Vec&) { return 0.0; };
    p.L = Vec::Zero(d + 1);

    switch (variant) {
    case HeatVariant::quadratic:
        p.id = "heat-quadratic";
        p.g = [](const Vec& x) { return x.squaredNorm(); };
        p.known_solution = [d, T](double t, const Vec& x) {
            Vec u(d + 1);
            u(0) = x.squaredNorm() + d * (T - t);
            u.tail(d) = 2.0 * x;
            return u;
        };
        // g is not globally Lipschitz; c is nominal here.
        p.c = 1.0;
        break;
    case HeatVariant::cosine:
        p.id = "heat-cosine";
        p.g = [](const Vec& x) { return std::cos(x.sum()); };
        p.known_solution = [d, T](double t, const Vec& x) {
            const double damp = std::exp(-0.5 * d * (T - t));
            const double s = x.sum();
            Vec u(d + 1);
            u(0) = damp * std::cos(s);
            u.tail(d).setConstant(-damp * std::sin(s));
            return u;
        };
        // |g(x) - g(y)| <= sqrt(d) |x - y|
        p.c = std::max(1.0, std::sqrt(d * T));
        break;
    }
    return p;
}

PdeProblem make_manufactured_gradient_problem(int d, double T, double kappa) {
    check_dims(d, T);
    PdeProblem p;
    p.id = "manufactured-grad";
    p.d = d;
    p.T = T;
    set_brownian_coefficients(p);

    const double shift = kappa + 0.5 * d - 1.0;
    auto source = [=](double t, const Vec& x) {
        const double grow = std::exp(kappa * (T - t));
        const double s = x.sum();
        return shift * grow * std::cos(s) + grow * std::sin(s);
    };
    p.f = [d, source](double t, const Vec& x, const Vec& w) {
        return w(0) + w.tail(d).sum() / d + source(t, x);
    };
    p.g = [](const Vec& x) { return std::cos(x.sum()); };
    p.known_solution = [=](double t, const Vec& x) {
        const double grow = std::exp(kappa * (T - t));
        const double s = x.sum();
        Vec u(d + 1);
        u(0) = grow * std::cos(s);
        u.tail(d).setConstant(-grow * std::sin(s));
        return u;
    };

    // |f(w1) - f(w2)| <= |dw_0| + (1/d) sum |dw_k|, and Lambda_k(T) = sqrt T.
    p.L = Vec::Constant(d + 1, 1.0 / (d * std::sqrt(T)));
    p.L(0) = 1.0;
    const double growth = std::exp(std::abs(kappa) * T);
    const double source_lip = (std::abs(shift) + 1.0) * growth * std::sqrt(static_cast<double>(d));
    p.c = std::max({1.0, p.L.sum(), std::sqrt(d * T), source_lip * T * std::sqrt(T)});
    return p;
}

PdeProblem make_nonlinear_diffusion_problem(int d, double T) {
    check_dims(d, T);
    PdeProblem p;
    p.id = "heat-cosine-nlsigma";
    p.d = d;
    p.T = T;
    p.mu = [d](const Vec&) { return Vec::Zero(d); };
    p.d_mu = [d](const Vec&, const Vec&) { return Vec::Zero(d); };
    p.sigma = [](const Vec& x) {
        return Mat((1.0 + 0.1 * x.array().sin()).matrix().asDiagonal());
    };
    p.sigma_inv = [](const Vec& x) {
        return Mat((1.0 + 0.1 * x.array().sin()).inverse().matrix().asDiagonal());
    };
    p.d_sigma = [](const Vec& x, const Vec& h) {
        return Mat((0.1 * x.array().cos() * h.array()).matrix().asDiagonal());
    };
    p.f = [](double, const Vec&, const Vec&) { return 0.0; };
    p.g = [](const Vec& x) { return std::cos(x.sum()); };
    p.L = Vec::Zero(d + 1);
    p.c = std::max(1.0, std::sqrt(d * T));
    return p;
}

PdeProblem make_zero_problem(int d, double T) {
    check_dims(d, T);
    PdeProblem p;
    p.id = "zero";
    p.d = d;
    p.T = T;
    set_brownian_coefficients(p);
    p.f = [](double, const Vec&, const Vec&) { return 0.0; };
    p.g = [](const Vec&) { return 0.0; };
    p.L = Vec::Zero(d + 1);
    p.known_solution = [d](double, const Vec&) { return Vec::Zero(d + 1); };
    return p;
}

PdeProblem make_problem(const ProblemSpec& spec) {
    if (spec.id == "heat-quadratic") return make_heat_problem(spec.d, spec.T, HeatVariant::quadratic);
    if (spec.id == "heat-cosine") return make_heat_problem(spec.d, spec.T, HeatVariant::cosine);
    if (spec.id == "manufactured-grad")
        return make_manufactured_gradient_problem(spec.d, spec.T, spec.kappa);
    if (spec.id == "heat-cosine-nlsigma") return make_nonlinear_diffusion_problem(spec.d, spec.T);
    if (spec.id == "zero") return make_zero_problem(spec.d, spec.T);
    throw std::invalid_argument("unknown problem id '" + spec.id + "'");
}

std::vector<std::pair<std::string, std::string>> builtin_problems() {
    return {
        {"heat-quadratic", "heat equation, g = |x|^2, u = |x|^2 + d(T-t)"},
        {"heat-cosine", "heat equation, g = cos(sum x), u = exp(-d(T-t)/2) cos(sum x)"},
        {"manufactured-grad", "f = y + mean(z) + c0(t,x), u = exp(kappa(T-t)) cos(sum x)"},
        {"heat-cosine-nlsigma", "g = cos(sum x), sigma = diag(1 + 0.1 sin x_k), no closed form"},
        {"zero", "g = 0, f = 0, u = 0"},
    };
}

}  // namespace mlpde

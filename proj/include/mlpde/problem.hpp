#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mlpde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A semilinear parabolic problem
///
///   v_t + <grad v, mu(x)> + 1/2 tr(sigma sigma^T Hess v) + f(t, x, v, grad v) = 0,
///   v(T, x) = g(x),
///
/// on [0,T) x R^d. The nonlinearity sees the packed vector w = (v, grad v) of
/// length d+1.
///
/// Instances are immutable after construction and may be shared across threads.
/// Every callable must be pure: no hidden mutable state.
struct PdeProblem {
    std::string id;
    int d = 1;
    double T = 1.0;

    std::function<Vec(const Vec&)> mu;
    std::function<Mat(const Vec&)> sigma;
    std::function<Mat(const Vec&)> sigma_inv;
    /// (D mu)(x)(h)
    std::function<Vec(const Vec&, const Vec&)> d_mu;
    /// (D sigma)(x)(h), a d x d matrix
    std::function<Mat(const Vec&, const Vec&)> d_sigma;

    std::function<double(double, const Vec&, const Vec&)> f;
    std::function<double(const Vec&)> g;

    /// Global constant c >= 1 and Lipschitz weights L_0..L_d. Metadata only.
    double c = 1.0;
    Vec L;

    /// Exact (u, grad u) when known; empty otherwise.
    std::function<Vec(double, const Vec&)> known_solution;

    /// mu and sigma do not depend on x, so D mu and D sigma vanish. The Euler
    /// integrator then evaluates the coefficients once per path.
    bool constant_coefficients = false;

    bool has_known_solution() const { return static_cast<bool>(known_solution); }
};

/// Lambda^d(t) = (1, sqrt t, ..., sqrt t), length d+1.
Vec lambda_weights(double t, int d);

/// Component nu of w.
double project(const Vec& w, int nu);

enum class HeatVariant { quadratic, cosine };

/// mu = 0, sigma = I, f = 0.
///   quadratic: g = |x|^2,      u = |x|^2 + d (T-t)
///   cosine:    g = cos(sum x), u = exp(-d (T-t)/2) cos(sum x)
PdeProblem make_heat_problem(int d, double T, HeatVariant variant);

/// mu = 0, sigma = I, f(t,x,y,z) = y + mean(z) + c0(t,x) with c0 chosen so that
/// v = exp(kappa (T-t)) cos(sum x) solves the equation exactly.
PdeProblem make_manufactured_gradient_problem(int d, double T, double kappa);

/// Heat-cosine terminal data with state-dependent diffusion
/// sigma(x) = diag(1 + 0.1 sin x_k). No closed-form solution.
PdeProblem make_nonlinear_diffusion_problem(int d, double T);

/// g = 0, f = 0. The solution is identically zero.
PdeProblem make_zero_problem(int d, double T);

struct ProblemSpec {
    std::string id;
    int d = 1;
    double T = 1.0;
    double kappa = 0.5;
};

/// Builds a built-in problem by id: "heat-quadratic", "heat-cosine",
/// "manufactured-grad", "heat-cosine-nlsigma", "zero".
/// Throws std::invalid_argument for an unknown id.
PdeProblem make_problem(const ProblemSpec& spec);

/// Ids accepted by make_problem, with a one-line description each.
std::vector<std::pair<std::string, std::string>> builtin_problems();

}  // namespace mlpde

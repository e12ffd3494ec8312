#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mlpde/problem.hpp"

namespace testing_support {

using mlpde::Mat;
using mlpde::Vec;

/// d = 2 problem with state-dependent, non-diagonal coefficients:
///   mu(x)    = (0.3 sin x1, -0.2 x0)
///   sigma(x) = [[1 + 0.1 cos x0, 0.2], [0, 1 + 0.1 sin x1]]
inline mlpde::PdeProblem coupled_problem(double T = 1.0) {
    mlpde::PdeProblem p;
    p.id = "coupled-test";
    p.d = 2;
    p.T = T;
    p.mu = [](const Vec& x) {
        Vec m(2);
        m << 0.3 * std::sin(x(1)), -0.2 * x(0);
        return m;
    };
    p.d_mu = [](const Vec& x, const Vec& h) {
        Vec m(2);
        m << 0.3 * std::cos(x(1)) * h(1), -0.2 * h(0);
        return m;
    };
    p.sigma = [](const Vec& x) {
        Mat s(2, 2);
        s << 1.0 + 0.1 * std::cos(x(0)), 0.2, 0.0, 1.0 + 0.1 * std::sin(x(1));
        return s;
    };
    p.sigma_inv = [p](const Vec& x) { return Mat(p.sigma(x).inverse()); };
    p.d_sigma = [](const Vec& x, const Vec& h) {
        Mat s(2, 2);
        s << -0.1 * std::sin(x(0)) * h(0), 0.0, 0.0, 0.1 * std::cos(x(1)) * h(1);
        return s;
    };
    p.f = [](double, const Vec&, const Vec& w) { return 0.5 * w(0); };
    p.g = [](const Vec& x) { return std::cos(x.sum()); };
    p.L = Vec::Zero(3);
    return p;
}

/// Picard iterates Phi^k(0) of manufactured-grad in d = 1, computed without
/// Monte Carlo. Every iterate has the form (Re[a e^{ix}], Re[i a e^{ix}]), and
/// the Brownian expectations reduce to the Volterra recursion
///   a_{k+1}(t) = e^{-(T-t)/2}
///              + int_t^T e^{-(r-t)/2} [(1+i) a_k(r) + e^{kappa(T-r)} (kappa - 1/2 - i)] dr,
/// integrated here with the trapezoid rule on N uniform steps.
class PicardIterates {
public:
    PicardIterates(double kappa, double T, int depth, int N = 4000) : T_(T), N_(N) {
        using C = std::complex<double>;
        const double h = T / N;
        std::vector<C> a(N + 1, C(0.0, 0.0));
        for (int k = 0; k < depth; ++k) {
            std::vector<C> next(N + 1);
            std::vector<C> integrand(N + 1);
            for (int j = 0; j <= N; ++j) {
                const double r = j * h;
                integrand[j] = C(1.0, 1.0) * a[j] + std::exp(kappa * (T - r)) * C(kappa - 0.5, -1.0);
            }
            // I(t_i) = e^{-h/2} I(t_{i+1}) + trapezoid over [t_i, t_{i+1}].
            const double decay = std::exp(-0.5 * h);
            C acc(0.0, 0.0);
            next[N] = C(1.0, 0.0);
            for (int i = N - 1; i >= 0; --i) {
                acc = decay * acc + 0.5 * h * (integrand[i] + decay * integrand[i + 1]);
                next[i] = std::exp(-0.5 * (T - i * h)) + acc;
            }
            a = std::move(next);
        }
        a_ = std::move(a);
    }

    /// (value, gradient) of Phi^depth(0) at (t, x).
    Vec operator()(double t, double x) const {
        const double pos = t / T_ * N_;
        const int i = std::min(static_cast<int>(pos), N_ - 1);
        const double w = pos - i;
        const std::complex<double> a = (1.0 - w) * a_[i] + w * a_[i + 1];
        const std::complex<double> e = std::exp(std::complex<double>(0.0, x));
        Vec out(2);
        out << (a * e).real(), (std::complex<double>(0.0, 1.0) * a * e).real();
        return out;
    }

private:
    double T_;
    int N_;
    std::vector<std::complex<double>> a_;
};

}  // namespace testing_support

#include "mlpde/mlp.hpp"

#include <cmath>
#include <limits>

#include "mlpde/forward.hpp"
#include "mlpde/parallel.hpp"

namespace mlpde {

std::int64_t MlpParams::sample_count(int exponent) const {
    return round_count(std::pow(m, exponent), rounding);
}

MlpParams schedule(int n, bool allow_large) {
    if (n < 1) throw std::domain_error("schedule: n must be >= 1");
    if (n >= 20 && !allow_large)
        throw std::domain_error("schedule: n >= 20 is beyond desk scale (pass allow_large)");
    MlpParams p;
    p.n = n;
    p.m = std::cbrt(static_cast<double>(n));
    p.K = static_cast<int>(std::max<std::int64_t>(
        1, round_count(std::pow(static_cast<double>(n), n / 3.0), Rounding::ceil)));
    p.rounding = Rounding::ceil;
    return p;
}

namespace {

class Recursion {
public:
    Recursion(const PdeProblem& p, const MlpParams& params, CostLedger& ledger,
              const MlpHooks* hooks)
        : p_(p), params_(params), grid_(p.T, params.K), ledger_(ledger), hooks_(hooks) {}

    Vec evaluate(int n, double t, const Vec& x, const RandomKey& key, bool top) {
        const int d = p_.d;
        if (n <= 0) return Vec::Zero(d + 1);
        ledger_.recursive_calls += 1;

        const double T = p_.T;
        const double terminal[] = {T};

        Vec result = Vec::Zero(d + 1);
        result(0) = p_.g(x);
        ledger_.g_evals += 1;

        const std::int64_t M0 = params_.sample_count(n);
        Vec block = Vec::Zero(d + 1);
        for (std::int64_t i = 1; i <= M0; ++i) {
            const RandomKey k = key.child(0, -i);
            RandomStream stream(k);
            const ForwardSample fs = forward(t, x, terminal, stream, k);
            const double diff = p_.g(fs.X[0]) - p_.g(x);
            ledger_.g_evals += 2;
            block += diff * fs.Z[0];
            if (!block.allFinite()) throw MlpFailure("mlp: non-finite terminal term", k);
        }
        block /= static_cast<double>(M0);
        if (top && hooks_ && hooks_->blocks) hooks_->blocks->push_back(block);
        result += block;

        for (int l = 0; l < n; ++l) {
            const std::int64_t Ml = params_.sample_count(n - l);
            block.setZero();
            for (std::int64_t i = 1; i <= Ml; ++i) {
                const RandomKey k = key.child(l, i);
                RandomStream stream(k);
                const double s = sample_proxy_time(stream, t, T);
                ledger_.uniform_draws += 1;
                const double query[] = {s};
                const ForwardSample fs = forward(t, x, query, stream, k);
                const Vec& Xs = fs.X[0];

                const Vec w_plus = inner(l, s, Xs, k);
                double df = p_.f(s, Xs, w_plus);
                ledger_.f_evals += 1;
                if (l >= 1) {
                    const Vec w_minus = inner(l - 1, s, Xs, key.child(l, -i));
                    df -= p_.f(s, Xs, w_minus);
                    ledger_.f_evals += 1;
                }
                block += (df / rho(t, s, T)) * fs.Z[0];
                if (!block.allFinite()) throw MlpFailure("mlp: non-finite level term", k);
            }
            block /= static_cast<double>(Ml);
            if (top && hooks_ && hooks_->blocks) hooks_->blocks->push_back(block);
            result += block;
        }
        return result;
    }

private:
    ForwardSample forward(double t, const Vec& x, std::span<const double> query,
                          RandomStream& stream, const RandomKey& k) {
        try {
            return simulate_forward(p_, grid_, t, x, query, stream, &ledger_);
        } catch (const SimulationError& e) {
            throw MlpFailure(e.what(), k);
        }
    }

    Vec inner(int level, double s, const Vec& xs, const RandomKey& k) {
        if (hooks_ && hooks_->inner) {
            if (level >= 1) ledger_.recursive_calls += 1;
            return hooks_->inner(level, s, xs, k);
        }
        return evaluate(level, s, xs, k, false);
    }

    const PdeProblem& p_;
    const MlpParams& params_;
    GridMap grid_;
    CostLedger& ledger_;
    const MlpHooks* hooks_;
};

}  // namespace

Vec mlp_value(const PdeProblem& problem, const MlpParams& params, double t, const Vec& x,
              const RandomKey& key, CostLedger& ledger, const MlpHooks* hooks) {
    if (!(t >= 0.0 && t < problem.T)) throw std::domain_error("mlp: t must lie in [0,T)");
    if (x.size() != problem.d) throw std::domain_error("mlp: x has wrong dimension");
    if (!(params.m > 0.0) || params.K < 1) throw std::domain_error("mlp: bad m or K");
    Recursion rec(problem, params, ledger, hooks);
    return rec.evaluate(params.n, t, x, key, true);
}

Estimate mlp_estimate(const PdeProblem& problem, const MlpParams& params, double t, const Vec& x,
                      const RandomKey& key) {
    Estimate e;
    e.value = mlp_value(problem, params, t, x, key, e.ledger);
    return e;
}

std::vector<std::vector<Realization>> mlp_batch(const PdeProblem& problem, const MlpParams& params,
                                                const std::vector<EvalPoint>& points, int R,
                                                const RandomKey& base_key, int threads) {
    if (R < 1) throw std::domain_error("mlp_batch: R must be >= 1");
    const std::size_t P = points.size();
    std::vector<std::vector<Realization>> out(P, std::vector<Realization>(R));
    parallel_for(P * static_cast<std::size_t>(R), threads, [&](std::size_t item) {
        const std::size_t p = item / R;
        const std::size_t r = item % R;
        Realization& slot = out[p][r];
        try {
            slot.value = mlp_value(problem, params, points[p].t, points[p].x,
                                   base_key.child(static_cast<std::int64_t>(p),
                                                  static_cast<std::int64_t>(r)),
                                   slot.ledger);
        } catch (const std::exception& e) {
            slot.ok = false;
            slot.error = e.what();
            slot.value = Vec::Constant(problem.d + 1, std::numeric_limits<double>::quiet_NaN());
        }
    });
    return out;
}

}  // namespace mlpde

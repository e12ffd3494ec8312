#include "mlpde/forward.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mlpde/parallel.hpp"

namespace mlpde {

GridMap::GridMap(double T, int K) : T_(T), K_(K) {
    if (!(T > 0.0)) throw std::domain_error("GridMap: T must be > 0");
    if (K < 1) throw std::domain_error("GridMap: K must be >= 1");
}

double GridMap::floor(double t) const {
    if (!(t >= 0.0 && t <= T_)) throw std::domain_error("floor_K: t outside [0,T]");
    if (t == 0.0) return 0.0;
    int k = static_cast<int>(std::ceil(t / T_ * K_)) - 1;
    k = std::clamp(k, 0, K_);
    while (k + 1 <= K_ && point(k + 1) < t) ++k;
    while (k > 0 && point(k) >= t) --k;
    return point(k);
}

int GridMap::first_index_above(double t) const {
    int k = static_cast<int>(std::floor(t / T_ * K_)) + 1;
    k = std::clamp(k, 0, K_ + 1);
    while (k > 0 && point(k - 1) > t) --k;
    while (k <= K_ && point(k) <= t) ++k;
    return k;
}

std::vector<EulerCell> euler_schedule(const GridMap& grid, double s,
                                      std::span<const double> query_times) {
    if (!(s >= 0.0 && s < grid.T())) throw std::domain_error("euler_schedule: s outside [0,T)");
    if (query_times.empty()) throw std::domain_error("euler_schedule: no query times");
    for (std::size_t i = 0; i < query_times.size(); ++i) {
        const double q = query_times[i];
        if (!(q > s)) throw std::domain_error("euler_schedule: query time must exceed s");
        if (!(q <= grid.T())) throw std::domain_error("euler_schedule: query time beyond T");
        if (i > 0 && !(q > query_times[i - 1]))
            throw std::domain_error("euler_schedule: query times must be strictly increasing");
    }

    const double end = query_times.back();
    std::vector<EulerCell> cells;
    cells.reserve(static_cast<std::size_t>(grid.K()) + query_times.size() + 1);

    double prev = s;
    bool prev_freezes = true;
    int k = grid.first_index_above(s);
    std::size_t q = 0;
    while (q < query_times.size()) {
        const double gp = k <= grid.K() ? grid.point(k) : std::numeric_limits<double>::infinity();
        const double qt = query_times[q];
        EulerCell cell{prev, 0.0, prev_freezes, -1};
        if (gp < qt) {
            cell.t1 = gp;
            prev_freezes = true;
            ++k;
        } else {
            cell.t1 = qt;
            cell.query = static_cast<int>(q);
            prev_freezes = gp == qt;
            if (gp == qt) ++k;
            ++q;
        }
        prev = cell.t1;
        cells.push_back(cell);
        if (prev >= end && q == query_times.size()) break;
    }
    return cells;
}

namespace {

constexpr double kDegenerateGap = 1e-12;

class EulerIntegrator {
public:
    EulerIntegrator(const PdeProblem& p, double s, const Vec& x, CostLedger* ledger)
        : p_(p), d_(p.d), s_(s), ledger_(ledger), X_(x), A_(Vec::Zero(p.d)) {
        if (x.size() != d_) throw std::domain_error("simulate_forward: x has wrong dimension");
        if (!x.allFinite()) throw std::domain_error("simulate_forward: x not finite");
        if (!p_.constant_coefficients) D_ = Mat::Identity(d_, d_);
        dsig_.resize(d_, d_);
    }

    template <class Source>
    ForwardSample run(std::span<const EulerCell> cells, std::span<const double> query_times,
                      Source&& increment) {
        ForwardSample out;
        out.s = s_;
        out.x = X_;
        out.query_times.assign(query_times.begin(), query_times.end());
        out.X.resize(query_times.size());
        out.Z.resize(query_times.size());
        out.cells = cells.size();

        Vec dW(d_);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const EulerCell& c = cells[j];
            if (c.refreeze) freeze(c.t0);
            const double dt = c.t1 - c.t0;
            increment(j, dt, dW);
            step(dt, dW);
            if (c.query >= 0) record(c, out);
        }
        if (ledger_) {
            ledger_->euler_cells += cells.size();
            ledger_->forward_paths += 1;
        }
        return out;
    }

private:
    void freeze(double t) {
        if (p_.constant_coefficients && frozen_) return;
        frozen_ = true;
        mu_a_ = p_.mu(X_);
        sigma_a_ = p_.sigma(X_);
        const Mat sigma_inv = p_.sigma_inv(X_);
        if (p_.constant_coefficients) {
            B_a_ = sigma_inv.transpose();
            if (ledger_) {
                ledger_->mu_like += 1;
                ledger_->sigma_like += 2;
            }
        } else {
            X_a_ = X_;
            D_a_ = D_;
            B_a_ = (sigma_inv * D_a_).transpose();
            dmu_a_.resize(d_, d_);
            for (int k = 0; k < d_; ++k) dmu_a_.col(k) = p_.d_mu(X_a_, D_a_.col(k));
            if (ledger_) {
                ledger_->mu_like += 1 + d_;
                ledger_->sigma_like += 2;
            }
            if (!dmu_a_.allFinite()) fail("D mu", t);
        }
        if (!mu_a_.allFinite() || !sigma_a_.allFinite() || !B_a_.allFinite())
            fail("mu/sigma/sigma_inv", t);
    }

    void step(double dt, const Vec& dW) {
        X_ += mu_a_ * dt;
        X_.noalias() += sigma_a_.lazyProduct(dW);
        if (!p_.constant_coefficients) {
            for (int k = 0; k < d_; ++k) dsig_.col(k).noalias() = p_.d_sigma(X_a_, D_a_.col(k)) * dW;
            D_ += dmu_a_ * dt + dsig_;
            if (ledger_) ledger_->sigma_like += d_;
        }
        A_.noalias() += B_a_.lazyProduct(dW);
    }

    void record(const EulerCell& c, ForwardSample& out) {
        if (!X_.allFinite() || !A_.allFinite()) fail("state", c.t1);
        out.X[c.query] = X_;
        Vec z(d_ + 1);
        z(0) = 1.0;
        const double gap = c.t1 - s_;
        if (gap < kDegenerateGap) {
            z.tail(d_).setZero();
            if (ledger_) ledger_->degenerate_weights += 1;
        } else {
            z.tail(d_) = A_ / gap;
        }
        out.Z[c.query] = std::move(z);
    }

    [[noreturn]] void fail(const char* what, double t) const {
        std::ostringstream os;
        os << "simulate_forward: non-finite " << what << " at t=" << t << " (start s=" << s_
           << ", problem " << p_.id << ")";
        throw SimulationError(os.str());
    }

    const PdeProblem& p_;
    int d_;
    double s_;
    CostLedger* ledger_;
    bool frozen_ = false;

    Vec X_, A_;
    Mat D_;
    Vec X_a_, mu_a_;
    Mat D_a_, sigma_a_, B_a_, dmu_a_, dsig_;
};

}  // namespace

ForwardSample integrate_increments(const PdeProblem& problem, const GridMap& grid, double s,
                                   const Vec& x, std::span<const double> query_times,
                                   std::span<const double> increments, CostLedger* ledger) {
    const auto cells = euler_schedule(grid, s, query_times);
    const std::size_t d = static_cast<std::size_t>(problem.d);
    if (increments.size() != cells.size() * d)
        throw std::domain_error("integrate_increments: expected one increment block per cell");
    EulerIntegrator integ(problem, s, x, ledger);
    return integ.run(cells, query_times, [&](std::size_t j, double, Vec& dW) {
        for (std::size_t k = 0; k < d; ++k) dW(k) = increments[j * d + k];
    });
}

ForwardSample simulate_forward(const PdeProblem& problem, const GridMap& grid, double s,
                               const Vec& x, std::span<const double> query_times,
                               RandomStream& stream, CostLedger* ledger) {
    const auto cells = euler_schedule(grid, s, query_times);
    EulerIntegrator integ(problem, s, x, ledger);
    const std::uint64_t before = stream.normals_drawn();
    ForwardSample out = integ.run(cells, query_times, [&](std::size_t, double dt, Vec& dW) {
        const double scale = std::sqrt(dt);
        for (Eigen::Index k = 0; k < dW.size(); ++k) dW(k) = scale * stream.normal();
    });
    out.draws_used = stream.normals_drawn() - before;
    if (ledger) ledger->gaussian_draws += out.draws_used;
    return out;
}

ForwardSample simulate_forward(const PdeProblem& problem, const GridMap& grid, double s,
                               const Vec& x, std::span<const double> query_times,
                               const RandomKey& key, CostLedger* ledger) {
    RandomStream stream(key);
    return simulate_forward(problem, grid, s, x, query_times, stream, ledger);
}

namespace {

// Chan et al. pairwise combination of (count, mean, M2).
struct Moments {
    double n = 0.0;
    Vec mean;
    Vec m2;

    void add(const Vec& y) {
        if (n == 0.0) {
            mean = Vec::Zero(y.size());
            m2 = Vec::Zero(y.size());
        }
        n += 1.0;
        const Vec delta = y - mean;
        mean += delta / n;
        m2 += delta.cwiseProduct(y - mean);
    }

    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double total = n + o.n;
        const Vec delta = o.mean - mean;
        mean += delta * (o.n / total);
        m2 += o.m2 + delta.cwiseProduct(delta) * (n * o.n / total);
        n = total;
    }
};

}  // namespace

MeanEstimate bel_value_and_gradient(const PdeProblem& problem, const GridMap& grid, double t,
                                    const Vec& x, std::int64_t M, const RandomKey& key,
                                    int threads, CostLedger* ledger) {
    if (M <= 0) throw std::domain_error("bel_value_and_gradient: M must be positive");
    const double gx = problem.g(x);
    const double terminal[] = {problem.T};

    constexpr std::int64_t kChunk = 4096;
    const std::size_t chunks = static_cast<std::size_t>((M + kChunk - 1) / kChunk);
    std::vector<Moments> parts(chunks);
    std::vector<CostLedger> ledgers(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
        const std::int64_t hi = std::min(M, lo + kChunk);
        for (std::int64_t i = lo + 1; i <= hi; ++i) {
            const ForwardSample fs =
                simulate_forward(problem, grid, t, x, terminal, key.child(i), &ledgers[c]);
            parts[c].add((problem.g(fs.X[0]) - gx) * fs.Z[0]);
            ledgers[c].g_evals += 1;
        }
    });

    Moments total;
    for (const auto& part : parts) total.merge(part);
    if (ledger) {
        ledger->g_evals += 1;
        for (const auto& l : ledgers) *ledger += l;
    }

    MeanEstimate est;
    est.mean = total.mean;
    est.mean(0) += gx;
    if (M >= 2) {
        est.std_error = (total.m2 / (total.n - 1.0) / total.n).cwiseSqrt();
    } else {
        est.std_error = Vec::Constant(problem.d + 1, std::numeric_limits<double>::quiet_NaN());
    }
    return est;
}

}  // namespace mlpde

#include "mlpde/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mlpde/parallel.hpp"

namespace mlpde {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::closed_form: return "closed-form";
    case Provenance::finite_difference: return "finite-difference";
    case Provenance::nested_picard: return "nested-picard";
    }
    return "unknown";
}

ReferenceSolution closed_form_reference(const PdeProblem& problem) {
    if (!problem.has_known_solution())
        throw std::invalid_argument("closed_form_reference: problem '" + problem.id +
                                    "' has no known solution");
    return {problem.known_solution, Provenance::closed_form};
}

namespace {

// Solves a tridiagonal system in place (Thomas algorithm). sub[0] and sup[n-1]
// are ignored.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                       std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct FdGrid {
    double T = 1.0;
    double x0 = 0.0;
    double h = 1.0;
    double dtau = 1.0;
    int nt = 0;
    int nx = 0;
    // values[k * nx + i]: v at t = T - k dtau, x = x0 + i h
    std::vector<double> values;
    std::vector<double> slopes;

    Vec evaluate(double t, double x) const {
        if (!(t >= 0.0 && t <= T)) throw std::domain_error("fd reference: t outside [0,T]");
        const double xmax = x0 + (nx - 1) * h;
        if (!(x >= x0 && x <= xmax)) throw std::domain_error("fd reference: x outside domain");
        const double tau = (T - t) / dtau;
        const int k = std::clamp(static_cast<int>(std::floor(tau)), 0, nt - 1);
        const double a = std::clamp(tau - k, 0.0, 1.0);
        const double xi = (x - x0) / h;
        const int i = std::clamp(static_cast<int>(std::floor(xi)), 0, nx - 2);
        const double b = std::clamp(xi - i, 0.0, 1.0);
        auto bilinear = [&](const std::vector<double>& f) {
            const auto at = [&](int kk, int ii) { return f[static_cast<std::size_t>(kk) * nx + ii]; };
            return (1 - a) * ((1 - b) * at(k, i) + b * at(k, i + 1)) +
                   a * ((1 - b) * at(k + 1, i) + b * at(k + 1, i + 1));
        };
        Vec out(2);
        out(0) = bilinear(values);
        out(1) = bilinear(slopes);
        return out;
    }
};

}  // namespace

ReferenceSolution fd_solve_1d(const PdeProblem& problem, const FdOptions& opt) {
    if (problem.d != 1) throw std::domain_error("fd_solve_1d: requires d = 1");
    if (opt.nt < 1 || opt.nx < 5 || !(opt.radius > 0.0))
        throw std::domain_error("fd_solve_1d: bad grid options");

    auto grid = std::make_shared<FdGrid>();
    FdGrid& G = *grid;
    G.T = problem.T;
    G.nt = opt.nt;
    G.nx = opt.nx;
    G.x0 = opt.center - opt.radius;
    G.h = 2.0 * opt.radius / (opt.nx - 1);
    G.dtau = problem.T / opt.nt;
    const int nx = opt.nx;
    const double h = G.h;
    const double dtau = G.dtau;

    std::vector<double> xs(nx), diffusion(nx), drift(nx);
    Vec pt(1);
    for (int i = 0; i < nx; ++i) {
        xs[i] = G.x0 + i * h;
        pt(0) = xs[i];
        const double sig = problem.sigma(pt)(0, 0);
        diffusion[i] = 0.5 * sig * sig;
        drift[i] = problem.mu(pt)(0);
    }

    G.values.assign(static_cast<std::size_t>(opt.nt + 1) * nx, 0.0);
    double scale = 1.0;
    for (int i = 0; i < nx; ++i) {
        pt(0) = xs[i];
        G.values[i] = problem.g(pt);
        scale = std::max(scale, std::abs(G.values[i]));
    }

    // L v_i = a_i (v_{i+1} - 2 v_i + v_{i-1}) / h^2 + b_i (v_{i+1} - v_{i-1}) / (2h)
    std::vector<double> lo(nx), mid(nx), up(nx);
    for (int i = 0; i < nx; ++i) {
        lo[i] = diffusion[i] / (h * h) - drift[i] / (2 * h);
        mid[i] = -2 * diffusion[i] / (h * h);
        up[i] = diffusion[i] / (h * h) + drift[i] / (2 * h);
    }

    auto nonlinearity = [&](const double* v, double t, std::vector<double>& out) {
        Vec w(2);
        for (int i = 1; i < nx - 1; ++i) {
            pt(0) = xs[i];
            w(0) = v[i];
            w(1) = (v[i + 1] - v[i - 1]) / (2 * h);
            out[i] = problem.f(t, pt, w);
        }
    };

    const int n_in = nx - 2;
    std::vector<double> sub(n_in), diag(n_in), sup(n_in), rhs(n_in);
    std::vector<double> f_prev(nx, 0.0), f_curr(nx, 0.0);
    for (int k = 0; k < opt.nt; ++k) {
        const double t_now = problem.T - k * dtau;
        const double t_next = problem.T - (k + 1) * dtau;
        const double* v = &G.values[static_cast<std::size_t>(k) * nx];
        double* vn = &G.values[static_cast<std::size_t>(k + 1) * nx];

        nonlinearity(v, t_now, f_curr);

        double left, right;
        if (problem.has_known_solution()) {
            pt(0) = xs[0];
            left = problem.known_solution(t_next, pt)(0);
            pt(0) = xs[nx - 1];
            right = problem.known_solution(t_next, pt)(0);
        } else {
            left = 2 * v[1] - v[2];
            right = 2 * v[nx - 2] - v[nx - 3];
        }

        for (int j = 0; j < n_in; ++j) {
            const int i = j + 1;
            const double Lv = lo[i] * v[i - 1] + mid[i] * v[i] + up[i] * v[i + 1];
            const double fhalf = k == 0 ? f_curr[i] : 1.5 * f_curr[i] - 0.5 * f_prev[i];
            rhs[j] = v[i] + 0.5 * dtau * Lv + dtau * fhalf;
            sub[j] = -0.5 * dtau * lo[i];
            diag[j] = 1.0 - 0.5 * dtau * mid[i];
            sup[j] = -0.5 * dtau * up[i];
        }
        rhs[0] -= sub[0] * left;
        rhs[n_in - 1] -= sup[n_in - 1] * right;
        solve_tridiagonal(sub, diag, sup, rhs);

        vn[0] = left;
        vn[nx - 1] = right;
        double peak = 0.0;
        for (int j = 0; j < n_in; ++j) {
            vn[j + 1] = rhs[j];
            peak = std::max(peak, std::abs(rhs[j]));
        }
        if (!std::isfinite(peak) || peak > 1e8 * scale) {
            throw std::runtime_error("fd_solve_1d: solution blew up at step " + std::to_string(k) +
                                     "; try nt >= " + std::to_string(4 * opt.nt));
        }
        std::swap(f_prev, f_curr);
    }

    G.slopes.assign(G.values.size(), 0.0);
    for (int k = 0; k <= opt.nt; ++k) {
        const double* v = &G.values[static_cast<std::size_t>(k) * nx];
        double* s = &G.slopes[static_cast<std::size_t>(k) * nx];
        for (int i = 1; i < nx - 1; ++i) s[i] = (v[i + 1] - v[i - 1]) / (2 * h);
        s[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
        s[nx - 1] = (3 * v[nx - 1] - 4 * v[nx - 2] + v[nx - 3]) / (2 * h);
    }

    ReferenceSolution ref;
    ref.provenance = Provenance::finite_difference;
    ref.evaluate = [grid](double t, const Vec& x) { return grid->evaluate(t, x(0)); };
    return ref;
}

CoupledPaths coupled_fine_reference(const PdeProblem& problem, double s, const Vec& x, double t,
                                    int K_coarse, int K_fine, const RandomKey& key) {
    if (K_coarse < 1 || K_fine < K_coarse || K_fine % K_coarse != 0)
        throw std::domain_error("coupled_fine_reference: K_fine must be a multiple of K_coarse");
    const GridMap fine(problem.T, K_fine);
    const GridMap coarse(problem.T, K_coarse);
    const double query[] = {t};
    const auto fine_cells = euler_schedule(fine, s, query);
    const auto coarse_cells = euler_schedule(coarse, s, query);
    const std::size_t d = static_cast<std::size_t>(problem.d);

    RandomStream stream(key);
    std::vector<double> dW_fine(fine_cells.size() * d);
    for (std::size_t j = 0; j < fine_cells.size(); ++j) {
        gaussian_increments(stream, fine_cells[j].t1 - fine_cells[j].t0,
                            std::span(dW_fine).subspan(j * d, d));
    }

    // Coarse cell boundaries are a bitwise subset of the fine ones.
    std::vector<double> dW_coarse(coarse_cells.size() * d, 0.0);
    std::size_t j = 0;
    for (std::size_t c = 0; c < coarse_cells.size(); ++c) {
        while (j < fine_cells.size() && fine_cells[j].t1 <= coarse_cells[c].t1) {
            for (std::size_t k = 0; k < d; ++k) dW_coarse[c * d + k] += dW_fine[j * d + k];
            ++j;
        }
    }
    if (j != fine_cells.size()) throw std::logic_error("coupled_fine_reference: grids misaligned");

    const ForwardSample f = integrate_increments(problem, fine, s, x, query, dW_fine);
    const ForwardSample g = integrate_increments(problem, coarse, s, x, query, dW_coarse);
    return {g.X[0], f.X[0], g.Z[0].tail(problem.d), f.Z[0].tail(problem.d)};
}

namespace {

struct Sums {
    Vec sum;
    Vec sumsq;
};

MeanEstimate finish(const std::vector<Sums>& parts, std::int64_t M, int width) {
    Vec sum = Vec::Zero(width), sumsq = Vec::Zero(width);
    for (const auto& p : parts) {
        sum += p.sum;
        sumsq += p.sumsq;
    }
    MeanEstimate e;
    e.mean = sum / static_cast<double>(M);
    if (M >= 2) {
        const Vec var = ((sumsq - sum.cwiseProduct(e.mean)) / (M - 1.0)).cwiseMax(0.0);
        e.std_error = (var / static_cast<double>(M)).cwiseSqrt();
    } else {
        e.std_error = Vec::Constant(width, std::numeric_limits<double>::quiet_NaN());
    }
    return e;
}

}  // namespace

MeanEstimate sfpe_residual(const PdeProblem& problem,
                           const std::function<Vec(double, const Vec&)>& candidate, double t,
                           const Vec& x, std::int64_t M, int K, const RandomKey& key,
                           int threads) {
    if (M < 1) throw std::domain_error("sfpe_residual: M must be positive");
    if (!(t >= 0.0 && t < problem.T)) throw std::domain_error("sfpe_residual: t outside [0,T)");
    const GridMap grid(problem.T, K);
    const int width = problem.d + 1;

    constexpr std::int64_t kChunk = 1024;
    const std::size_t chunks = static_cast<std::size_t>((M + kChunk - 1) / kChunk);
    std::vector<Sums> parts(chunks, Sums{Vec::Zero(width), Vec::Zero(width)});
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
        const std::int64_t hi = std::min(M, lo + kChunk);
        for (std::int64_t i = lo + 1; i <= hi; ++i) {
            RandomStream stream(key.child(i));
            const double s = sample_proxy_time(stream, t, problem.T);
            const double query[] = {s, problem.T};
            const ForwardSample fs = simulate_forward(problem, grid, t, x, query, stream);
            const Vec& Xs = fs.X[0];
            const Vec y = problem.g(fs.X[1]) * fs.Z[1] +
                          (problem.f(s, Xs, candidate(s, Xs)) / rho(t, s, problem.T)) * fs.Z[0];
            parts[c].sum += y;
            parts[c].sumsq += y.cwiseProduct(y);
        }
    });
    MeanEstimate e = finish(parts, M, width);
    e.mean -= candidate(t, x);
    return e;
}

namespace {

class NestedPicard {
public:
    NestedPicard(const PdeProblem& p, const NestedPicardOptions& o)
        : p_(p), opt_(o), grid_(p.T, o.K) {}

    Vec sample_term(int depth, double t, const Vec& x, double gx, const RandomKey& k) const {
        RandomStream stream(k);
        const double s = sample_proxy_time(stream, t, p_.T);
        const double query[] = {s, p_.T};
        const ForwardSample fs = simulate_forward(p_, grid_, t, x, query, stream);
        const Vec& Xs = fs.X[0];
        const Vec prev = evaluate(depth - 1, s, Xs, k);
        return (p_.g(fs.X[1]) - gx) * fs.Z[1] + (p_.f(s, Xs, prev) / rho(t, s, p_.T)) * fs.Z[0];
    }

    Vec evaluate(int depth, double t, const Vec& x, const RandomKey& key) const {
        if (depth <= 0) return Vec::Zero(p_.d + 1);
        const double gx = p_.g(x);
        Vec acc = Vec::Zero(p_.d + 1);
        for (std::int64_t i = 1; i <= opt_.samples_per_level; ++i)
            acc += sample_term(depth, t, x, gx, key.child(i));
        acc /= static_cast<double>(opt_.samples_per_level);
        acc(0) += gx;
        return acc;
    }

private:
    const PdeProblem& p_;
    const NestedPicardOptions& opt_;
    GridMap grid_;
};

}  // namespace

Vec nested_picard(const PdeProblem& problem, double t, const Vec& x, const RandomKey& key,
                  const NestedPicardOptions& options) {
    if (options.depth < 0) throw std::domain_error("nested_picard: depth must be >= 0");
    if (options.samples_per_level < 1) throw std::domain_error("nested_picard: need samples");
    if (!(t >= 0.0 && t < problem.T)) throw std::domain_error("nested_picard: t outside [0,T)");
    if (options.depth == 0) return Vec::Zero(problem.d + 1);

    double paths = 0.0;
    for (int k = 1; k <= options.depth; ++k)
        paths += std::pow(static_cast<double>(options.samples_per_level), k);
    const double steps = paths * (options.K + 2);
    if (steps > options.max_forward_steps)
        throw std::domain_error("nested_picard: projected " + std::to_string(steps) +
                                " forward steps exceeds the cost guard");

    const NestedPicard np(problem, options);
    const std::int64_t N = options.samples_per_level;
    const double gx = problem.g(x);
    std::vector<Vec> terms(static_cast<std::size_t>(N));
    parallel_for(terms.size(), options.threads, [&](std::size_t i) {
        terms[i] = np.sample_term(options.depth, t, x, gx, key.child(static_cast<std::int64_t>(i) + 1));
    });
    Vec acc = Vec::Zero(problem.d + 1);
    for (const auto& v : terms) acc += v;
    acc /= static_cast<double>(N);
    acc(0) += gx;
    return acc;
}

}  // namespace mlpde

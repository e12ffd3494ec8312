#include "mlpde/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mlpde/forward.hpp"
#include "mlpde/mlp.hpp"
#include "mlpde/oracle.hpp"
#include "mlpde/parallel.hpp"

namespace mlpde {

using nlohmann::json;

WeightedError estimate_weighted_error(const std::vector<Vec>& estimates, const Vec& exact,
                                      double t, double T) {
    const std::size_t R = estimates.size();
    if (R < 2) throw std::domain_error("estimate_weighted_error: need at least 2 estimates");
    const int width = static_cast<int>(exact.size());
    const Vec weight = lambda_weights(T - t, width - 1);

    Vec sq_sum = Vec::Zero(width);
    std::vector<Vec> sq(R);
    for (std::size_t i = 0; i < R; ++i) {
        sq[i] = (estimates[i] - exact).array().square().matrix();
        sq_sum += sq[i];
    }
    WeightedError out;
    out.rms = weight.cwiseProduct((sq_sum / static_cast<double>(R)).cwiseSqrt());

    Vec loo_mean = Vec::Zero(width);
    std::vector<Vec> loo(R);
    for (std::size_t i = 0; i < R; ++i) {
        loo[i] = weight.cwiseProduct(((sq_sum - sq[i]) / static_cast<double>(R - 1)).cwiseSqrt());
        loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(R);
    Vec var = Vec::Zero(width);
    for (const auto& v : loo) var += (v - loo_mean).array().square().matrix();
    out.rms_se = (var * (static_cast<double>(R - 1) / R)).cwiseSqrt();
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::domain_error("loglog_slope: bad input");
    double mx = 0, my = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string opt(const std::optional<T>& v) {
    if (!v) return "";
    if constexpr (std::is_floating_point_v<T>) {
        return fmt_double(*v);
    } else {
        return std::to_string(*v);
    }
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::vector<std::string> csv_header() {
    return {"schema",        "config_hash",  "mode",          "problem",      "d",
            "n",             "m",            "K",             "point",        "t",
            "x",             "nu",           "mean",          "std_error",    "exact",
            "weighted_rms",  "weighted_rms_se", "metric",     "metric_value", "g_evals",
            "f_evals",       "coeff_evals",  "scalar_draws",  "weighted_cost", "theoretical_cost",
            "upper_bound",   "wall_time_s"};
}

std::string records_to_csv(const std::vector<ResultRecord>& records) {
    std::ostringstream os;
    const auto header = csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\r\n";
    for (const auto& r : records) {
        std::string xs;
        for (std::size_t i = 0; i < r.x.size(); ++i) xs += (i ? " " : "") + fmt_double(r.x[i]);
        std::vector<std::string> cells = {
            std::to_string(kCsvSchemaVersion), r.config_hash, r.mode, r.problem,
            std::to_string(r.d), opt(r.n), opt(r.m), opt(r.K), opt(r.point), opt(r.t), xs,
            opt(r.nu), opt(r.mean), opt(r.std_error), opt(r.exact), opt(r.weighted_rms),
            opt(r.weighted_rms_se), r.metric, opt(r.metric_value)};
        if (r.ledger) {
            cells.push_back(std::to_string(r.ledger->g_evals));
            cells.push_back(std::to_string(r.ledger->f_evals));
            cells.push_back(std::to_string(r.ledger->coeff_evals()));
            cells.push_back(std::to_string(r.ledger->scalar_draws()));
            cells.push_back(std::to_string(r.ledger->weighted_total()));
        } else {
            cells.insert(cells.end(), 5, "");
        }
        cells.push_back(opt(r.theoretical_cost));
        cells.push_back(opt(r.upper_bound));
        cells.push_back(fmt_double(r.wall_time_s));
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_escape(cells[i]);
        os << "\r\n";
    }
    return os.str();
}

int RunResult::exit_code(bool check_assertions) const {
    if (!estimator_failures.empty()) return 1;
    if (check_assertions && !assertion_failures.empty()) return 2;
    return 0;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

MlpParams params_for_level(int n) {
    if (n >= 1) return schedule(n);
    MlpParams p;
    p.n = n;
    return p;
}

ProblemSpec with_dimension(ProblemSpec spec, int d) {
    spec.d = d;
    return spec;
}

class Runner {
public:
    Runner(const ExperimentConfig& c, const RunOptions& o) : cfg_(c), opt_(o) {
        hash_ = config_hash(cfg_);
    }

    RunResult execute() {
        switch (cfg_.mode) {
        case Mode::convergence: convergence(); break;
        case Mode::dimension_scan: dimension_scan(); break;
        case Mode::em_rate: em_rate(); break;
        case Mode::cost_audit: cost_audit(); break;
        case Mode::residual: residual(); break;
        }
        out_.config = cfg_;
        return std::move(out_);
    }

private:
    ResultRecord base(const PdeProblem& p) const {
        ResultRecord r;
        r.config_hash = hash_;
        r.mode = to_string(cfg_.mode);
        r.problem = p.id;
        r.d = p.d;
        return r;
    }

    std::vector<EvalPoint> points_for(const PdeProblem& p) const {
        std::vector<EvalPoint> pts;
        for (auto& [t, x] : expand_points(cfg_, p.d, p.T))
            pts.push_back({t, Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()))});
        return pts;
    }

    ReferenceSolution reference(const PdeProblem& p) const {
        if (p.has_known_solution()) return closed_form_reference(p);
        if (p.d == 1) return fd_solve_1d(p);
        throw ConfigError("problem.id", "mode needs a reference solution; '" + p.id +
                                            "' has none in d=" + std::to_string(p.d));
    }

    void fail_assert(const std::string& what) { out_.assertion_failures.push_back(what); }

    void convergence() {
        const PdeProblem p = make_problem(cfg_.problem);
        const auto pts = points_for(p);
        const ReferenceSolution ref = reference(p);
        const int R = cfg_.replications;
        std::vector<double> sups;

        for (std::size_t li = 0; li < cfg_.levels.size(); ++li) {
            const auto start = Clock::now();
            const MlpParams params = params_for_level(cfg_.levels[li]);
            const auto batch = mlp_batch(p, params, pts, R,
                                         RandomKey(seed()).child(static_cast<std::int64_t>(li)),
                                         opt_.threads);
            const double elapsed = seconds_since(start);
            double sup = 0.0;
            bool sup_valid = R >= 2;
            for (std::size_t pi = 0; pi < pts.size(); ++pi) {
                std::vector<Vec> values;
                CostLedger ledger;
                for (const auto& real : batch[pi]) {
                    ledger += real.ledger;
                    if (real.ok) {
                        values.push_back(real.value);
                    } else {
                        out_.estimator_failures.push_back(real.error);
                    }
                }
                const Vec exact = ref(pts[pi].t, pts[pi].x);
                std::optional<WeightedError> werr;
                if (values.size() >= 2) {
                    werr = estimate_weighted_error(values, exact, pts[pi].t, p.T);
                    sup = std::max(sup, werr->rms.maxCoeff());
                } else {
                    sup_valid = false;
                }
                for (int nu = 0; nu <= p.d; ++nu) {
                    ResultRecord r = level_record(p, params, pi, pts[pi], elapsed);
                    r.nu = nu;
                    if (!values.empty()) {
                        double mean = 0.0;
                        for (const auto& v : values) mean += v(nu);
                        mean /= values.size();
                        r.mean = mean;
                        if (values.size() >= 2) {
                            double var = 0.0;
                            for (const auto& v : values) var += (v(nu) - mean) * (v(nu) - mean);
                            r.std_error = std::sqrt(var / (values.size() - 1) / values.size());
                        }
                    }
                    r.exact = exact(nu);
                    if (werr) {
                        r.weighted_rms = werr->rms(nu);
                        r.weighted_rms_se = werr->rms_se(nu);
                    }
                    r.ledger = ledger;
                    out_.records.push_back(std::move(r));
                }
            }
            ResultRecord summary = base(p);
            summary.n = params.n;
            summary.m = params.m;
            summary.K = params.K;
            summary.metric = "sup_weighted_rms";
            if (sup_valid) summary.metric_value = sup;
            summary.wall_time_s = elapsed;
            out_.records.push_back(std::move(summary));
            if (sup_valid) sups.push_back(sup);
        }
        if (sups.size() == cfg_.levels.size()) {
            for (std::size_t i = 1; i < sups.size(); ++i) {
                if (!(sups[i] < sups[i - 1]))
                    fail_assert("convergence: sup weighted RMS did not decrease from level " +
                                std::to_string(cfg_.levels[i - 1]) + " to " +
                                std::to_string(cfg_.levels[i]));
            }
        } else {
            fail_assert("convergence: weighted errors unavailable (need R >= 2 and no failures)");
        }
    }

    ResultRecord level_record(const PdeProblem& p, const MlpParams& params, std::size_t pi,
                              const EvalPoint& pt, double elapsed) const {
        ResultRecord r = base(p);
        r.n = params.n;
        r.m = params.m;
        r.K = params.K;
        r.point = static_cast<int>(pi);
        r.t = pt.t;
        r.x.assign(pt.x.data(), pt.x.data() + pt.x.size());
        r.wall_time_s = elapsed;
        return r;
    }

    void dimension_scan() {
        const MlpParams params = params_for_level(cfg_.levels.front());
        std::vector<double> ds, gauss, coeff;
        for (std::size_t di = 0; di < cfg_.dimensions.size(); ++di) {
            const int d = cfg_.dimensions[di];
            const PdeProblem p = make_problem(with_dimension(cfg_.problem, d));
            const double t = points_for(p).front().t;
            const std::vector<EvalPoint> pts{{t, Vec::Zero(d)}};
            const auto start = Clock::now();
            // Same keys for every d, so the random times and cell counts coincide.
            const auto batch = mlp_batch(p, params, pts, cfg_.replications, RandomKey(seed()),
                                         opt_.threads);
            const double elapsed = seconds_since(start);
            CostLedger ledger;
            for (const auto& real : batch[0]) {
                ledger += real.ledger;
                if (!real.ok) out_.estimator_failures.push_back(real.error);
            }
            const double R = cfg_.replications;
            const std::pair<const char*, double> metrics[] = {
                {"gaussian_draws_per_call", ledger.gaussian_draws / R},
                {"scalar_draws_per_call", ledger.scalar_draws() / R},
                {"coeff_evals_per_call", ledger.coeff_evals() / R},
                {"weighted_cost_per_call", ledger.weighted_total() / R},
            };
            for (const auto& [name, value] : metrics) {
                ResultRecord r = level_record(p, params, 0, pts[0], elapsed);
                r.metric = name;
                r.metric_value = value;
                r.ledger = ledger;
                r.theoretical_cost = theoretical_cost(params.n, params.m, params.K,
                                                      canonical_units(d), params.rounding);
                if (params.n >= 1)
                    r.upper_bound = cost_upper_bound(params.n, params.m, params.K, canonical_units(d));
                out_.records.push_back(std::move(r));
            }
            ds.push_back(d);
            gauss.push_back(ledger.gaussian_draws / R);
            coeff.push_back(ledger.coeff_evals() / R);
        }
        if (ds.size() >= 2 && params.n >= 1) {
            const PdeProblem p = make_problem(cfg_.problem);
            const double g_exp = loglog_slope(ds, gauss);
            const double c_exp = loglog_slope(ds, coeff);
            for (const auto& [name, value] : {std::pair{"gaussian_draws_exponent", g_exp},
                                              std::pair{"coeff_evals_exponent", c_exp}}) {
                ResultRecord r = base(p);
                r.d = 0;
                r.n = params.n;
                r.m = params.m;
                r.K = params.K;
                r.metric = name;
                r.metric_value = value;
                out_.records.push_back(std::move(r));
            }
            if (std::abs(g_exp - 1.0) > 0.1)
                fail_assert("dimension-scan: draw exponent " + fmt_double(g_exp) + " not 1 +- 0.1");
            if (c_exp > 2.1)
                fail_assert("dimension-scan: coefficient exponent " + fmt_double(c_exp) + " > 2.1");
        }
    }

    void em_rate() {
        const PdeProblem p = make_problem(cfg_.problem);
        const EvalPoint start_pt = points_for(p).front();
        const double s = start_pt.t;
        const double t_weight = s + cfg_.weight_gap;
        if (!(t_weight <= p.T)) throw ConfigError("weight_gap", "s + weight_gap exceeds T");
        for (int K : cfg_.grids)
            if (cfg_.K_ref % K != 0) throw ConfigError("K_ref", "must be a multiple of every grid");

        std::vector<double> Ks, errX, errV;
        for (std::size_t ki = 0; ki < cfg_.grids.size(); ++ki) {
            const int K = cfg_.grids[ki];
            const auto start = Clock::now();
            constexpr std::int64_t kChunk = 256;
            const std::int64_t M = cfg_.paths;
            const std::size_t chunks = static_cast<std::size_t>((M + kChunk - 1) / kChunk);
            std::vector<double> sx(chunks, 0.0), sv(chunks, 0.0);
            const RandomKey key = RandomKey(seed());
            parallel_for(chunks, opt_.threads, [&](std::size_t c) {
                const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
                const std::int64_t hi = std::min(M, lo + kChunk);
                for (std::int64_t i = lo + 1; i <= hi; ++i) {
                    const auto a = coupled_fine_reference(p, s, start_pt.x, p.T, K, cfg_.K_ref,
                                                          key.child(0, i));
                    sx[c] += (a.X_coarse - a.X_fine).squaredNorm();
                    const auto b = coupled_fine_reference(p, s, start_pt.x, t_weight, K,
                                                          cfg_.K_ref, key.child(1, i));
                    sv[c] += (b.V_coarse - b.V_fine).squaredNorm();
                }
            });
            double tx = 0, tv = 0;
            for (std::size_t c = 0; c < chunks; ++c) {
                tx += sx[c];
                tv += sv[c];
            }
            const double ex = std::sqrt(tx / M), ev = std::sqrt(tv / M);
            const double elapsed = seconds_since(start);
            for (const auto& [name, value] : {std::pair{"strong_error_X", ex},
                                              std::pair{"strong_error_V", ev}}) {
                ResultRecord r = base(p);
                r.K = K;
                r.point = 0;
                r.t = s;
                r.x.assign(start_pt.x.data(), start_pt.x.data() + p.d);
                r.metric = name;
                r.metric_value = value;
                r.wall_time_s = elapsed;
                out_.records.push_back(std::move(r));
            }
            Ks.push_back(K);
            errX.push_back(ex);
            errV.push_back(ev);
        }
        if (Ks.size() >= 2) {
            const double slope_x = loglog_slope(Ks, errX);
            const double slope_v = loglog_slope(Ks, errV);
            for (const auto& [name, value] : {std::pair{"slope_X", slope_x},
                                              std::pair{"slope_V", slope_v}}) {
                ResultRecord r = base(p);
                r.metric = name;
                r.metric_value = value;
                out_.records.push_back(std::move(r));
            }
            if (std::abs(slope_x + 0.5) > 0.15)
                fail_assert("em-rate: X slope " + fmt_double(slope_x) + " not -0.5 +- 0.15");
            if (std::abs(slope_v + 0.5) > 0.2)
                fail_assert("em-rate: V slope " + fmt_double(slope_v) + " not -0.5 +- 0.2");
        }
    }

    void cost_audit() {
        const PdeProblem p = make_problem(cfg_.problem);
        const auto pts = points_for(p);
        const CostModelParams units = canonical_units(p.d);
        for (std::size_t li = 0; li < cfg_.levels.size(); ++li) {
            const MlpParams params = params_for_level(cfg_.levels[li]);
            const auto start = Clock::now();
            const auto batch = mlp_batch(p, params, pts, cfg_.replications,
                                         RandomKey(seed()).child(static_cast<std::int64_t>(li)),
                                         opt_.threads);
            const double elapsed = seconds_since(start);
            for (std::size_t pi = 0; pi < pts.size(); ++pi) {
                for (std::size_t r = 0; r < batch[pi].size(); ++r) {
                    const auto& real = batch[pi][r];
                    if (!real.ok) out_.estimator_failures.push_back(real.error);
                    const CostReport rep = reconcile(real.ledger, params, units);
                    ResultRecord rec = level_record(p, params, pi, pts[pi], elapsed);
                    rec.metric = "within_bound";
                    rec.metric_value = rep.ok() ? 1.0 : 0.0;
                    rec.ledger = real.ledger;
                    rec.theoretical_cost = rep.theoretical;
                    rec.upper_bound = rep.upper_bound;
                    out_.records.push_back(std::move(rec));
                    if (params.n >= 1 && !rep.ok())
                        fail_assert("cost-audit: n=" + std::to_string(params.n) + " point " +
                                    std::to_string(pi) + " rep " + std::to_string(r) + ": " +
                                    rep.describe());
                    if (params.n <= 0 && real.ledger.weighted_total() != 0)
                        fail_assert("cost-audit: n <= 0 run did work");
                }
            }
        }
    }

    void residual() {
        const PdeProblem p = make_problem(cfg_.problem);
        const auto pts = points_for(p);
        const ReferenceSolution ref = reference(p);
        const int K = cfg_.grids.front();
        for (std::size_t pi = 0; pi < pts.size(); ++pi) {
            const auto start = Clock::now();
            const RandomKey key = RandomKey(seed()).child(0, static_cast<std::int64_t>(pi));
            const auto res = sfpe_residual(p, ref.evaluate, pts[pi].t, pts[pi].x, cfg_.paths, K,
                                           key, opt_.threads);
            const auto res2 = sfpe_residual(p, ref.evaluate, pts[pi].t, pts[pi].x, cfg_.paths,
                                            2 * K, key, opt_.threads);
            const double elapsed = seconds_since(start);
            for (int nu = 0; nu <= p.d; ++nu) {
                const double bias = std::abs(res.mean(nu) - res2.mean(nu));
                ResultRecord r = base(p);
                r.K = K;
                r.point = static_cast<int>(pi);
                r.t = pts[pi].t;
                r.x.assign(pts[pi].x.data(), pts[pi].x.data() + p.d);
                r.nu = nu;
                r.mean = res.mean(nu);
                r.std_error = res.std_error(nu);
                r.exact = 0.0;
                r.metric = "em_bias_budget";
                r.metric_value = bias;
                r.wall_time_s = elapsed;
                out_.records.push_back(std::move(r));
                if (std::abs(res.mean(nu)) > 3.0 * res.std_error(nu) + bias)
                    fail_assert("residual: exact solution residual component " +
                                std::to_string(nu) + " at point " + std::to_string(pi) +
                                " outside 3 SE + bias");
            }
        }

        std::vector<double> sups;
        for (std::size_t li = 0; li < cfg_.levels.size(); ++li) {
            const MlpParams params = params_for_level(cfg_.levels[li]);
            const auto start = Clock::now();
            const int R = cfg_.replications;
            const std::size_t items = pts.size() * static_cast<std::size_t>(R);
            std::vector<Vec> resid(items);
            parallel_for(items, opt_.threads, [&](std::size_t item) {
                const std::size_t pi = item / R;
                const std::size_t r = item % R;
                const RandomKey cand_key = RandomKey(seed()).child(1 + static_cast<std::int64_t>(li),
                                                                   static_cast<std::int64_t>(r));
                auto candidate = [&](double t, const Vec& x) {
                    CostLedger scratch;
                    return mlp_value(p, params, t, x, cand_key, scratch);
                };
                const RandomKey path_key =
                    RandomKey(seed()).child(-1 - static_cast<std::int64_t>(pi),
                                            static_cast<std::int64_t>(r));
                resid[item] = sfpe_residual(p, candidate, pts[pi].t, pts[pi].x,
                                            cfg_.candidate_paths, K, path_key)
                                  .mean;
            });
            const double elapsed = seconds_since(start);
            double sup = 0.0;
            for (std::size_t pi = 0; pi < pts.size(); ++pi) {
                const Vec weight = lambda_weights(p.T - pts[pi].t, p.d);
                Vec ms = Vec::Zero(p.d + 1);
                for (int r = 0; r < R; ++r) ms += resid[pi * R + r].array().square().matrix();
                const Vec rms = weight.cwiseProduct((ms / R).cwiseSqrt());
                sup = std::max(sup, rms.maxCoeff());
                for (int nu = 0; nu <= p.d; ++nu) {
                    ResultRecord rec = level_record(p, params, pi, pts[pi], elapsed);
                    rec.nu = nu;
                    rec.metric = "candidate_residual_weighted_rms";
                    rec.metric_value = rms(nu);
                    out_.records.push_back(std::move(rec));
                }
            }
            sups.push_back(sup);
            ResultRecord summary = base(p);
            summary.n = params.n;
            summary.m = params.m;
            summary.K = params.K;
            summary.metric = "sup_candidate_residual";
            summary.metric_value = sup;
            summary.wall_time_s = elapsed;
            out_.records.push_back(std::move(summary));
        }
        for (std::size_t i = 1; i < sups.size(); ++i)
            if (!(sups[i] < sups[i - 1]))
                fail_assert("residual: candidate residual did not decrease from level " +
                            std::to_string(cfg_.levels[i - 1]) + " to " +
                            std::to_string(cfg_.levels[i]));
    }

    std::uint64_t seed() const { return opt_.seed.value_or(cfg_.seed); }

    const ExperimentConfig& cfg_;
    const RunOptions& opt_;
    std::string hash_;
    RunResult out_;
};

json environment_fingerprint(int threads) {
    return {{"compiler", __VERSION__},
            {"cplusplus", static_cast<long>(__cplusplus)},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"threads", threads},
            {"hardware_concurrency", std::thread::hardware_concurrency()}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
    ExperimentConfig effective = config;
    if (options.seed) effective.seed = *options.seed;
    RunOptions opts = options;
    opts.seed.reset();

    RunResult result = Runner(effective, opts).execute();
    result.sidecar = {{"schema_version", kCsvSchemaVersion},
                      {"config", config_to_json(effective)},
                      {"config_hash", config_hash(effective)},
                      {"environment", environment_fingerprint(options.threads)},
                      {"records", result.records.size()},
                      {"assertion_failures", result.assertion_failures},
                      {"estimator_failures", result.estimator_failures}};

    if (options.write_files) {
        const std::filesystem::path dir(options.out_dir);
        std::filesystem::create_directories(dir);
        write_text(dir / effective.csv_name, records_to_csv(result.records));
        write_text(dir / effective.json_name, result.sidecar.dump(2) + "\n");
    }
    return result;
}

std::string write_oracle_golden(const ExperimentConfig& config, const std::string& out_dir,
                                bool regenerate) {
    const std::filesystem::path path = std::filesystem::path(out_dir) / "oracle.json";
    const std::string hash = config_hash(config);
    if (std::filesystem::exists(path) && !regenerate) {
        std::ifstream in(path);
        const json existing = json::parse(in);
        if (existing.value("config_hash", "") == hash) return path.string();
        throw std::runtime_error(path.string() + " was generated for config " +
                                 existing.value("config_hash", "?") +
                                 "; pass --regenerate to overwrite");
    }

    const PdeProblem p = make_problem(config.problem);
    std::optional<ReferenceSolution> fd;
    if (p.d == 1) fd = fd_solve_1d(p);
    json values = json::array();
    for (const auto& [t, x] : expand_points(config, p.d, p.T)) {
        const Vec xv = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
        json entry = {{"t", t}, {"x", x}};
        if (p.has_known_solution()) {
            const Vec u = p.known_solution(t, xv);
            entry["closed_form"] = std::vector<double>(u.data(), u.data() + u.size());
        }
        if (fd) {
            const Vec u = (*fd)(t, xv);
            entry["finite_difference"] = std::vector<double>(u.data(), u.data() + u.size());
        }
        values.push_back(entry);
    }
    const json doc = {{"config_hash", hash}, {"problem", config_to_json(config)["problem"]},
                      {"values", values}};
    std::filesystem::create_directories(out_dir);
    write_text(path, doc.dump(2) + "\n");
    return path.string();
}

}  // namespace mlpde

#include "itecp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "itecp/errors.hpp"
#include "itecp/rng.hpp"
#include "itecp/svg.hpp"
#include "itecp/wcp.hpp"

namespace itecp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}
}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::CmDr: return "cm_dr";
        case Method::CmIpw: return "cm_ipw";
        case Method::CmX: return "cm_x";
        case Method::WcpNaive: return "wcp_naive";
        case Method::WcpExact: return "wcp_exact";
        case Method::WcpInexact: return "wcp_inexact";
        case Method::Oracle: return "oracle";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::CmDr, Method::CmIpw, Method::CmX, Method::WcpNaive,
                     Method::WcpExact, Method::WcpInexact, Method::Oracle})
        if (name == method_name(m)) return m;
    throw ConfigError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw ConfigError("config: methods list is empty");
    if (replications < 1) throw ConfigError("config: replications must be >= 1");
    if (alphas.empty()) throw ConfigError("config: no alpha given");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("config: alpha must lie in (0,1)");
    if (!(splits.test > 0.0 && splits.test < 1.0))
        throw ConfigError("config: splits.test must lie in (0,1)");
    if (!(splits.calib > 0.0 && splits.calib < 1.0))
        throw ConfigError("config: splits.calib must lie in (0,1)");
    if (!(splits.phi >= 0.0 && splits.phi < 1.0))
        throw ConfigError("config: splits.phi must lie in [0,1)");
    if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
    gbm.validate();
    if (dataset.kind == DataSource::Kind::Csv && dataset.csv_path.empty())
        throw ConfigError("config: dataset.path required for csv datasets");
}

double metric_coverage(std::span<const ItemInterval> intervals,
                       std::span<const double> true_ites) {
    if (intervals.size() != true_ites.size())
        throw DataError("metric_coverage: length mismatch");
    if (intervals.empty()) throw DataError("metric_coverage: empty input");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < intervals.size(); ++i)
        if (intervals[i].contains(true_ites[i])) ++hit;
    return static_cast<double>(hit) / static_cast<double>(intervals.size());
}

double metric_avg_len(std::span<const ItemInterval> intervals) {
    if (intervals.empty()) throw DataError("metric_avg_len: empty input");
    double acc = 0.0;
    for (const auto& iv : intervals) {
        if (iv.vacuous()) return kInf;
        acc += iv.width();
    }
    return acc / static_cast<double>(intervals.size());
}

double metric_rmse(std::span<const double> tau_hat, std::span<const double> tau_true) {
    if (tau_hat.size() != tau_true.size()) throw DataError("metric_rmse: length mismatch");
    if (tau_hat.empty()) throw DataError("metric_rmse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < tau_hat.size(); ++i) {
        const double d = tau_hat[i] - tau_true[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(tau_hat.size()));
}

namespace {

struct RepOutput {
    std::vector<MethodRep> per_method;
    std::map<Learner, RepScores> scores;
};

struct TestBlock {
    Matrix x;
    std::vector<std::size_t> rows;
    std::vector<double> ites;      // empty when potential outcomes are absent
    std::vector<double> tau_true;  // empty when unknown
};

std::vector<std::size_t> complement(std::size_t n, const SplitIndices& s) {
    std::vector<char> used(n, 0);
    for (std::size_t i : s.phi_set) used[i] = 1;
    for (std::size_t i : s.train_set) used[i] = 1;
    for (std::size_t i : s.calib_set) used[i] = 1;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (!used[i]) out.push_back(i);
    return out;
}

void fill_metrics(MethodRep& cell, const std::vector<ItemInterval>& intervals,
                  const std::vector<double>& tau_hat, const TestBlock& test) {
    if (!test.ites.empty()) {
        cell.coverage = metric_coverage(intervals, test.ites);
        cell.has_coverage = true;
    }
    double len_acc = 0.0;
    for (const auto& iv : intervals) {
        if (iv.vacuous()) {
            cell.vacuous++;
        } else {
            len_acc += iv.width();
            cell.finite_count++;
        }
    }
    if (cell.finite_count > 0)
        cell.avg_len = len_acc / static_cast<double>(cell.finite_count);
    if (!test.tau_true.empty() && !tau_hat.empty()) {
        // NaN tau_hat entries mark rows without a usable point estimate
        // (vacuous intervals of the midpoint-based baselines).
        double acc = 0.0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < tau_hat.size(); ++i) {
            if (!std::isfinite(tau_hat[i])) continue;
            const double d = tau_hat[i] - test.tau_true[i];
            acc += d * d;
            ++k;
        }
        if (k > 0) {
            cell.rmse = std::sqrt(acc / static_cast<double>(k));
            cell.has_rmse = true;
        }
    }
}

std::vector<double> midpoints(const std::vector<ItemInterval>& intervals) {
    std::vector<double> mid(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i)
        mid[i] = intervals[i].vacuous() ? std::nan("")
                                        : 0.5 * (intervals[i].lo + intervals[i].hi);
    return mid;
}

bool is_cm(Method m) {
    return m == Method::CmDr || m == Method::CmIpw || m == Method::CmX;
}

Learner learner_of(Method m) {
    switch (m) {
        case Method::CmDr: return Learner::DR;
        case Method::CmIpw: return Learner::IPW;
        case Method::CmX: return Learner::X;
        default: throw ConfigError("not a conformal meta-learner method");
    }
}

RepOutput run_replication(const ExperimentConfig& cfg, double alpha,
                          const CausalDataset* shared_csv, std::uint64_t rep_seed) {
    RepOutput out;
    out.per_method.resize(cfg.methods.size());

    CausalDataset generated;
    const CausalDataset* ds = shared_csv;
    if (cfg.dataset.kind == DataSource::Kind::Synthetic) {
        SynthConfig sc = cfg.dataset.synth;
        sc.seed = hash_seed(rep_seed, 11);
        generated = generate_synthetic(sc);
        ds = &generated;
    }

    const double t = cfg.splits.test, c = cfg.splits.calib, p = cfg.splits.phi;
    SplitFractions fr;
    fr.train = (1.0 - t) * (1.0 - c) * (1.0 - p);
    fr.calib = (1.0 - t) * c;
    fr.phi = (1.0 - t) * (1.0 - c) * p;
    const SplitIndices splits = split(*ds, fr, hash_seed(rep_seed, 22));

    TestBlock test;
    test.rows = complement(ds->n(), splits);
    if (test.rows.empty()) throw DataError("replication: empty test split");
    test.x = ds->x.gather(test.rows);
    if (ds->has_potential_outcomes()) {
        test.ites.resize(test.rows.size());
        for (std::size_t i = 0; i < test.rows.size(); ++i)
            test.ites[i] = (*ds->y1)[test.rows[i]] - (*ds->y0)[test.rows[i]];
    }
    if (ds->tau_true) {
        test.tau_true.resize(test.rows.size());
        for (std::size_t i = 0; i < test.rows.size(); ++i)
            test.tau_true[i] = (*ds->tau_true)[test.rows[i]];
    }

    // Shared stages: one nuisance fit for all CM methods, one stage-1 for
    // both nested WCP variants.
    std::optional<NuisanceModel> nuisance;
    std::optional<NestedStage1> stage1;
    const bool any_cm = std::any_of(cfg.methods.begin(), cfg.methods.end(), is_cm);
    const bool any_nested =
        std::any_of(cfg.methods.begin(), cfg.methods.end(), [](Method m) {
            return m == Method::WcpExact || m == Method::WcpInexact;
        });
    std::string shared_error;
    try {
        if (any_cm) nuisance = fit_nuisance(*ds, splits.phi_set, cfg.gbm);
        if (any_nested) stage1 = nested_stage1(*ds, splits, alpha, cfg.gbm);
    } catch (const std::exception& e) {
        shared_error = e.what();
    }

    Matrix calib_x;
    std::vector<double> calib_oracle;
    if (cfg.collect_scores && ds->has_potential_outcomes() && any_cm) {
        calib_x = ds->x.gather(splits.calib_set);
        calib_oracle.resize(splits.calib_set.size());
        for (std::size_t i = 0; i < splits.calib_set.size(); ++i)
            calib_oracle[i] =
                (*ds->y1)[splits.calib_set[i]] - (*ds->y0)[splits.calib_set[i]];
    }

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const Method m = cfg.methods[mi];
        MethodRep& cell = out.per_method[mi];
        const auto tic = std::chrono::steady_clock::now();
        try {
            if (!shared_error.empty() && (is_cm(m) || m == Method::WcpExact ||
                                          m == Method::WcpInexact))
                throw DataError(shared_error);

            std::vector<ItemInterval> intervals(test.rows.size());
            std::vector<double> tau_hat;

            if (is_cm(m)) {
                const Learner learner = learner_of(m);
                const auto art = conformal_meta_learner(*ds, splits, learner,
                                                        cfg.score_kind, alpha,
                                                        cfg.gbm, *nuisance);
                for (std::size_t i = 0; i < test.rows.size(); ++i)
                    intervals[i] = art.interval_at(test.x.row(i));
                tau_hat = art.cate.point.predict(test.x);

                if (cfg.collect_scores && ds->has_potential_outcomes()) {
                    RepScores& bank = out.scores[learner];
                    std::vector<double> pseudo(splits.calib_set.size());
                    for (std::size_t i = 0; i < splits.calib_set.size(); ++i) {
                        const std::size_t row = splits.calib_set[i];
                        pseudo[i] = pseudo_outcome(ds->x.row(row), ds->w[row], ds->y[row],
                                                   ds->pi[row], *nuisance, learner);
                    }
                    bank.pseudo_abs = abs_residual_scores(art.cate.point, calib_x, pseudo,
                                                          ScoreSource::pseudo(learner))
                                          .values;
                    bank.oracle_abs = abs_residual_scores(art.cate.point, calib_x,
                                                          calib_oracle,
                                                          ScoreSource::oracle())
                                          .values;
                    if (art.cate.quantile_pair) {
                        bank.pseudo_cqr = cqr_scores(*art.cate.quantile_pair, calib_x,
                                                     pseudo, ScoreSource::pseudo(learner))
                                              .values;
                        bank.oracle_cqr = cqr_scores(*art.cate.quantile_pair, calib_x,
                                                     calib_oracle, ScoreSource::oracle())
                                              .values;
                    }
                    const bool cqr_mode = cfg.score_kind == ScoreKind::SignedDistanceCQR;
                    cell.order = order_report(cqr_mode ? bank.pseudo_cqr : bank.pseudo_abs,
                                              cqr_mode ? bank.oracle_cqr : bank.oracle_abs);
                }
            } else if (m == Method::Oracle) {
                if (!ds->has_potential_outcomes())
                    throw DataError("oracle method needs simulated potential outcomes");
                Matrix train_x = ds->x.gather(splits.train_set);
                std::vector<double> train_ite(splits.train_set.size());
                for (std::size_t i = 0; i < splits.train_set.size(); ++i)
                    train_ite[i] = (*ds->y1)[splits.train_set[i]] -
                                   (*ds->y0)[splits.train_set[i]];
                CateModel cate;
                cate.point = fit(train_x, train_ite,
                                 cfg.gbm.with_loss(Loss::SquaredError));
                if (cfg.score_kind == ScoreKind::SignedDistanceCQR)
                    cate.quantile_pair = fit_quantile_pair(
                        train_x, train_ite, alpha / 2.0, 1.0 - alpha / 2.0, cfg.gbm);

                Matrix cx = ds->x.gather(splits.calib_set);
                std::vector<double> cal_ite(splits.calib_set.size());
                for (std::size_t i = 0; i < splits.calib_set.size(); ++i)
                    cal_ite[i] =
                        (*ds->y1)[splits.calib_set[i]] - (*ds->y0)[splits.calib_set[i]];
                const auto scores =
                    cfg.score_kind == ScoreKind::AbsoluteResidual
                        ? abs_residual_scores(cate.point, cx, cal_ite,
                                              ScoreSource::oracle())
                        : cqr_scores(*cate.quantile_pair, cx, cal_ite,
                                     ScoreSource::oracle());
                const auto q = conformal_quantile(scores.values, alpha);
                for (std::size_t i = 0; i < test.rows.size(); ++i)
                    intervals[i] =
                        issue_interval(cate, q, cfg.score_kind, test.x.row(i));
                tau_hat = cate.point.predict(test.x);
            } else if (m == Method::WcpNaive) {
                const auto issuer = wcp_naive(*ds, splits, alpha, cfg.gbm);
                for (std::size_t i = 0; i < test.rows.size(); ++i)
                    intervals[i] =
                        issuer.at(test.x.row(i), ds->pi[test.rows[i]]);
                tau_hat = midpoints(intervals);
            } else if (m == Method::WcpExact) {
                const auto issuer = wcp_exact_nested(*ds, splits, alpha, cfg.gbm, *stage1);
                for (std::size_t i = 0; i < test.rows.size(); ++i)
                    intervals[i] = issuer.at(test.x.row(i));
                tau_hat = midpoints(intervals);
            } else {  // WcpInexact
                const auto issuer =
                    wcp_inexact_nested(*ds, splits, alpha, cfg.gbm, *stage1);
                for (std::size_t i = 0; i < test.rows.size(); ++i)
                    intervals[i] = issuer.at(test.x.row(i));
                tau_hat = midpoints(intervals);
            }

            fill_metrics(cell, intervals, tau_hat, test);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        cell.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    }
    return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, double alpha) {
    cfg.validate();

    CausalDataset csv_data;
    const CausalDataset* shared_csv = nullptr;
    if (cfg.dataset.kind == DataSource::Kind::Csv) {
        csv_data = load_csv(cfg.dataset.csv_path, cfg.dataset.propensity);
        shared_csv = &csv_data;
    }

    const std::size_t reps = static_cast<std::size_t>(cfg.replications);
    std::vector<RepOutput> outs(reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= reps) break;
            try {
                outs[r] = run_replication(cfg, alpha, shared_csv,
                                          hash_seed(cfg.master_seed, r));
            } catch (const std::exception& e) {
                outs[r].per_method.assign(cfg.methods.size(), MethodRep{});
                for (auto& cell : outs[r].per_method) cell.error = e.what();
            }
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), reps);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Merge in replication order so the result is schedule-independent.
    RunResult result;
    result.alpha = alpha;
    result.methods = cfg.methods;
    result.cells.assign(cfg.methods.size(), {});
    for (auto& row : result.cells) row.resize(reps);
    for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t m = 0; m < cfg.methods.size(); ++m)
            result.cells[m][r] = std::move(outs[r].per_method[m]);
    for (std::size_t r = 0; r < reps; ++r)
        for (auto& [learner, bank] : outs[r].scores)
            result.scores[learner].push_back(std::move(bank));
    return result;
}

std::vector<RunResult> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<RunResult> results;
    results.reserve(cfg.alphas.size());
    for (double a : cfg.alphas) results.push_back(run_experiment(cfg, a));
    return results;
}

namespace {
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    out.count = xs.size();
    if (xs.empty()) return out;
    double s = 0.0;
    for (double x : xs) s += x;
    out.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                 std::sqrt(static_cast<double>(xs.size()));
    }
    return out;
}
}  // namespace

std::vector<MethodSummary> summarize(const RunResult& result) {
    std::vector<MethodSummary> out;
    for (std::size_t m = 0; m < result.methods.size(); ++m) {
        MethodSummary s;
        s.method = result.methods[m];
        std::vector<double> covs, lens, rmses;
        for (const auto& cell : result.cells[m]) {
            if (!cell.ok) continue;
            s.reps_ok++;
            s.vacuous += cell.vacuous;
            if (cell.has_coverage) covs.push_back(cell.coverage);
            if (cell.finite_count > 0) lens.push_back(cell.avg_len);
            if (cell.has_rmse) rmses.push_back(cell.rmse);
        }
        const auto c = mean_se(covs), l = mean_se(lens), r = mean_se(rmses);
        s.coverage = c.count ? c.mean : std::nan("");
        s.coverage_se = c.count ? c.se : std::nan("");
        s.avg_len = l.count ? l.mean : std::nan("");
        s.avg_len_se = l.count ? l.se : std::nan("");
        s.rmse = r.count ? r.mean : std::nan("");
        s.rmse_se = r.count ? r.se : std::nan("");
        out.push_back(s);
    }
    return out;
}

void emit_reports(const std::vector<RunResult>& results, const std::string& outdir) {
    if (results.empty()) throw ConfigError("emit_reports: no results");
    for (const auto& res : results)
        if (res.methods.empty()) throw ConfigError("emit_reports: empty method list");

    std::filesystem::create_directories(outdir);
    const auto path_of = [&](const std::string& name) {
        return (std::filesystem::path(outdir) / name).string();
    };
    const auto open_csv = [&](const std::string& name) {
        std::ofstream f(path_of(name));
        if (!f) throw DataError("emit_reports: cannot write '" + name + "'");
        return f;
    };

    {
        auto f = open_csv("summary.csv");
        f << "method,coverage,coverage_se,avg_len,avg_len_se,rmse,rmse_se,vacuous\n";
        for (const auto& s : summarize(results.front())) {
            f << method_name(s.method) << "," << fmt(s.coverage) << ","
              << fmt(s.coverage_se) << "," << fmt(s.avg_len) << "," << fmt(s.avg_len_se)
              << "," << fmt(s.rmse) << "," << fmt(s.rmse_se) << "," << s.vacuous << "\n";
        }
    }

    if (results.size() > 1) {
        auto f = open_csv("coverage_vs_alpha.csv");
        f << "alpha,method,coverage,coverage_se,avg_len,avg_len_se,rmse,rmse_se,"
             "vacuous\n";
        for (const auto& res : results)
            for (const auto& s : summarize(res))
                f << fmt(res.alpha) << "," << method_name(s.method) << ","
                  << fmt(s.coverage) << "," << fmt(s.coverage_se) << "," << fmt(s.avg_len)
                  << "," << fmt(s.avg_len_se) << "," << fmt(s.rmse) << ","
                  << fmt(s.rmse_se) << "," << s.vacuous << "\n";

        static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#e377c2", "#ff7f0e", "#7f7f7f"};
        const auto sweep_svg = [&](const std::string& file, const std::string& title,
                                   auto pick) {
            std::vector<SvgSeries> series;
            bool any_points = false;
            for (std::size_t m = 0; m < results.front().methods.size(); ++m) {
                SvgSeries ser;
                ser.label = method_name(results.front().methods[m]);
                ser.color = kColors[m % 7];
                for (const auto& res : results) {
                    const auto sums = summarize(res);
                    const double v = pick(sums[m]);
                    if (std::isfinite(v)) ser.points.emplace_back(res.alpha, v);
                }
                any_points = any_points || !ser.points.empty();
                series.push_back(std::move(ser));
            }
            if (any_points) write_svg_lines(path_of(file), title, "alpha", title, series);
        };
        sweep_svg("sweep_coverage.svg", "coverage",
                  [](const MethodSummary& s) { return s.coverage; });
        sweep_svg("sweep_avg_len.svg", "avg_len",
                  [](const MethodSummary& s) { return s.avg_len; });
        sweep_svg("sweep_rmse.svg", "rmse",
                  [](const MethodSummary& s) { return s.rmse; });
    }

    const RunResult& first = results.front();
    for (const auto& [learner, reps] : first.scores) {
        std::vector<std::vector<double>> pseudo, oracle;
        for (const auto& bank : reps) {
            const auto& p = bank.pseudo_cqr.empty() ? bank.pseudo_abs : bank.pseudo_cqr;
            const auto& o = bank.oracle_cqr.empty() ? bank.oracle_abs : bank.oracle_cqr;
            if (!p.empty() && !o.empty()) {
                pseudo.push_back(p);
                oracle.push_back(o);
            }
        }
        if (pseudo.empty()) continue;
        const auto avg = averaged_ecdf(pseudo, oracle);
        const std::string stem = std::string("ecdf_") + learner_name(learner);
        {
            auto f = open_csv(stem + ".csv");
            f << "t,F_pseudo,F_oracle\n";
            for (std::size_t j = 0; j < avg.grid.size(); ++j)
                f << fmt(avg.grid[j]) << "," << fmt(avg.f_pseudo[j]) << ","
                  << fmt(avg.f_oracle[j]) << "\n";
        }
        std::vector<SvgSeries> series(2);
        series[0].label = "pseudo";
        series[0].color = "#d62728";
        series[1].label = "oracle";
        series[1].color = "#1f77b4";
        for (std::size_t j = 0; j < avg.grid.size(); ++j) {
            series[0].points.emplace_back(avg.grid[j], avg.f_pseudo[j]);
            series[1].points.emplace_back(avg.grid[j], avg.f_oracle[j]);
        }
        write_svg_lines(path_of(stem + ".svg"),
                        std::string("score ECDF (") + learner_name(learner) + ")",
                        "score", "F", series);
    }
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number '" + v + "' for key '" + key + "'");
    }
}

long to_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer '" + v + "' for key '" + key + "'");
    }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "dataset.kind") {
            if (val == "synthetic") cfg.dataset.kind = DataSource::Kind::Synthetic;
            else if (val == "csv") cfg.dataset.kind = DataSource::Kind::Csv;
            else throw ConfigError("config: dataset.kind must be synthetic or csv");
        } else if (key == "dataset.n") {
            cfg.dataset.synth.n = static_cast<std::size_t>(to_long(val, key));
        } else if (key == "dataset.d") {
            cfg.dataset.synth.d = static_cast<std::size_t>(to_long(val, key));
        } else if (key == "dataset.setup") {
            if (val == "A" || val == "a") cfg.dataset.synth.setup = Setup::A;
            else if (val == "B" || val == "b") cfg.dataset.synth.setup = Setup::B;
            else if (val == "custom") cfg.dataset.synth.setup = Setup::CustomGamma;
            else throw ConfigError("config: dataset.setup must be A, B or custom");
        } else if (key == "dataset.gamma") {
            cfg.dataset.synth.gamma = to_double(val, key);
        } else if (key == "dataset.path") {
            cfg.dataset.csv_path = val;
        } else if (key == "dataset.propensity") {
            if (val == "column") cfg.dataset.propensity = PropensitySpec::column();
            else if (val == "beta24") cfg.dataset.propensity = PropensitySpec::beta24();
            else cfg.dataset.propensity =
                     PropensitySpec::constant_value(to_double(val, key));
        } else if (key == "methods") {
            cfg.methods.clear();
            for (const auto& tok : split_list(val)) cfg.methods.push_back(parse_method(tok));
        } else if (key == "alpha") {
            cfg.alphas.clear();
            for (const auto& tok : split_list(val)) cfg.alphas.push_back(to_double(tok, key));
        } else if (key == "replications") {
            cfg.replications = static_cast<int>(to_long(val, key));
        } else if (key == "splits.test") {
            cfg.splits.test = to_double(val, key);
        } else if (key == "splits.calib") {
            cfg.splits.calib = to_double(val, key);
        } else if (key == "splits.phi") {
            cfg.splits.phi = to_double(val, key);
        } else if (key == "score") {
            if (val == "cqr") cfg.score_kind = ScoreKind::SignedDistanceCQR;
            else if (val == "abs") cfg.score_kind = ScoreKind::AbsoluteResidual;
            else throw ConfigError("config: score must be cqr or abs");
        } else if (key == "gbm.trees") {
            cfg.gbm.n_trees = static_cast<int>(to_long(val, key));
        } else if (key == "gbm.max_depth") {
            cfg.gbm.max_depth = static_cast<int>(to_long(val, key));
        } else if (key == "gbm.learning_rate") {
            cfg.gbm.learning_rate = to_double(val, key);
        } else if (key == "gbm.min_samples_leaf") {
            cfg.gbm.min_samples_leaf = static_cast<int>(to_long(val, key));
        } else if (key == "seed") {
            cfg.master_seed = static_cast<std::uint64_t>(to_long(val, key));
        } else if (key == "out") {
            cfg.out_dir = val;
        } else if (key == "jobs") {
            cfg.jobs = static_cast<int>(to_long(val, key));
        } else {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace itecp

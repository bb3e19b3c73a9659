// Acceptance suite: every release criterion as a pass/fail line, run by ctest.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "itecp/bench.hpp"
#include "itecp/rng.hpp"
#include "itecp/special.hpp"
#include "itecp/stochord.hpp"
#include "itecp/wcp.hpp"

using namespace itecp;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%-34s %s  %s\n", name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// --- criterion 1: split-CP exactness on oracle regressions ----------------

void criterion_split_cp_exactness() {
    const auto tic = std::chrono::steady_clock::now();
    const double alpha = 0.1;
    const int reps = 500;
    const std::size_t n_train = 60, n_calib = 99;
    int hits = 0;
    GbmConfig gcfg;
    gcfg.n_trees = 25;
    gcfg.max_depth = 2;
    for (int r = 0; r < reps; ++r) {
        SynthConfig cfg;
        cfg.n = n_train + n_calib + 1;
        cfg.d = 2;
        cfg.seed = 7000 + r;
        cfg.setup = Setup::B;
        const auto ds = generate_synthetic(cfg);

        Matrix train_x(n_train, 2);
        std::vector<double> train_ite(n_train);
        for (std::size_t i = 0; i < n_train; ++i) {
            train_x.at(i, 0) = ds.x.at(i, 0);
            train_x.at(i, 1) = ds.x.at(i, 1);
            train_ite[i] = (*ds.y1)[i] - (*ds.y0)[i];
        }
        const auto model = fit(train_x, train_ite, gcfg);

        std::vector<double> scores(n_calib);
        for (std::size_t i = 0; i < n_calib; ++i) {
            const std::size_t row = n_train + i;
            scores[i] = std::abs(model.predict_row(ds.x.row(row)) -
                                 ((*ds.y1)[row] - (*ds.y0)[row]));
        }
        const auto q = conformal_quantile(scores, alpha);
        const std::size_t t = n_train + n_calib;
        const double v =
            std::abs(model.predict_row(ds.x.row(t)) - ((*ds.y1)[t] - (*ds.y0)[t]));
        if (v <= q.value) ++hits;
    }
    const double coverage = static_cast<double>(hits) / reps;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    const bool pass =
        coverage >= 0.90 - 0.02 && coverage <= 0.91 + 0.02 && seconds < 60.0;
    report("1 split-CP exactness", pass,
           "coverage=" + fmt(coverage) + " target [0.88,0.93], n_c=99, 500 reps, " +
               fmt(seconds) + "s (limit 60s)");
}

// --- criteria 2/3/4/6 share the two synthetic experiment runs -------------

struct BigRuns {
    RunResult setup_a;
    RunResult setup_b;
    std::vector<Method> methods_a;
    std::vector<Method> methods_b;
    double seconds = 0.0;
};

BigRuns run_big_experiments() {
    ExperimentConfig cfg;
    cfg.dataset.kind = DataSource::Kind::Synthetic;
    cfg.dataset.synth.n = 2000;
    cfg.dataset.synth.d = 10;
    cfg.replications = 100;
    cfg.alphas = {0.1};
    cfg.gbm = GbmConfig{};  // 100 trees, depth 3, lr 0.1, min leaf 5
    cfg.score_kind = ScoreKind::SignedDistanceCQR;
    cfg.master_seed = 20240901;
    cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    cfg.collect_scores = true;

    BigRuns runs;
    runs.methods_a = {Method::CmDr, Method::CmIpw, Method::CmX, Method::WcpNaive,
                      Method::WcpExact};
    runs.methods_b = {Method::CmDr, Method::CmIpw, Method::CmX, Method::WcpNaive,
                      Method::WcpExact, Method::WcpInexact};

    const auto tic = std::chrono::steady_clock::now();
    cfg.dataset.synth.setup = Setup::A;
    cfg.methods = runs.methods_a;
    runs.setup_a = run_experiment(cfg, 0.1);

    cfg.dataset.synth.setup = Setup::B;
    cfg.methods = runs.methods_b;
    runs.setup_b = run_experiment(cfg, 0.1);
    runs.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
    return runs;
}

double coverage_of(const RunResult& res, Method m) {
    const auto sums = summarize(res);
    for (const auto& s : sums)
        if (s.method == m) return s.coverage;
    return std::nan("");
}

void criterion_coverage_pattern(const BigRuns& runs) {
    bool pass = true;
    std::string detail;
    for (const auto* res : {&runs.setup_a, &runs.setup_b}) {
        const double dr = coverage_of(*res, Method::CmDr);
        const double ipw = coverage_of(*res, Method::CmIpw);
        const double x = coverage_of(*res, Method::CmX);
        const double naive = coverage_of(*res, Method::WcpNaive);
        const double exact = coverage_of(*res, Method::WcpExact);
        pass = pass && dr >= 0.88 && ipw >= 0.88 && x < dr && x < ipw &&
               naive >= 0.88 && exact >= 0.88;
        detail += (res == &runs.setup_a ? "A[" : " B[") + std::string("dr=") + fmt(dr) +
                  " ipw=" + fmt(ipw) + " x=" + fmt(x) + " nv=" + fmt(naive) +
                  " ex=" + fmt(exact) + "]";
    }
    pass = pass && runs.seconds < 900.0;
    report("2 benchmark coverage pattern", pass,
           detail + " runs=" + fmt(runs.seconds) + "s (limit 900s)");
}

void criterion_averaged_ecdf(const BigRuns& runs) {
    bool pass = true;
    std::string detail;
    for (Learner learner : {Learner::DR, Learner::IPW, Learner::X}) {
        const auto it = runs.setup_b.scores.find(learner);
        if (it == runs.setup_b.scores.end()) {
            pass = false;
            detail += std::string(learner_name(learner)) + "=missing ";
            continue;
        }
        std::vector<std::vector<double>> pseudo, oracle;
        for (const auto& bank : it->second) {
            if (!bank.pseudo_cqr.empty() && !bank.oracle_cqr.empty()) {
                pseudo.push_back(bank.pseudo_cqr);
                oracle.push_back(bank.oracle_cqr);
            }
        }
        const auto avg = averaged_ecdf(pseudo, oracle, 512);
        std::size_t below = 0, above = 0;
        for (std::size_t j = 0; j < avg.grid.size(); ++j) {
            if (avg.f_pseudo[j] <= avg.f_oracle[j] + 1e-12) ++below;
            if (avg.f_oracle[j] <= avg.f_pseudo[j] + 1e-12) ++above;
        }
        const double frac_below = static_cast<double>(below) / avg.grid.size();
        const double frac_above = static_cast<double>(above) / avg.grid.size();
        if (learner == Learner::X) {
            pass = pass && frac_above >= 0.95;
            detail += std::string(learner_name(learner)) + "_inv=" + fmt(frac_above) + " ";
        } else {
            pass = pass && frac_below >= 0.95;
            detail += std::string(learner_name(learner)) + "=" + fmt(frac_below) + " ";
        }
    }
    report("3 averaged-ECDF dominance", pass, detail + "(threshold 0.95)");
}

// Distribution-level claim, so each replication scores a fresh 4000-row
// evaluation draw: calibration-sized samples leave visible noise in the
// extreme order statistics that the stop-loss comparison is sensitive to.
void criterion_mcx_audit() {
    const int reps = 100;
    const std::size_t m_eval = 4000;
    std::atomic<int> next{0};
    std::vector<int> fails(reps, 0);
    auto worker = [&] {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= reps) break;
            SynthConfig sc;
            sc.n = 2000;
            sc.d = 10;
            sc.setup = r % 2 ? Setup::A : Setup::B;
            sc.seed = hash_seed(4400, r);
            const auto ds = generate_synthetic(sc);
            const SplitIndices sp =
                split(ds, {0.50625, 0.225, 0.16875}, hash_seed(4500, r));
            GbmConfig g;
            const auto nuis = fit_nuisance(ds, sp.phi_set, g);

            SynthConfig ec = sc;
            ec.n = m_eval;
            ec.seed = hash_seed(4600, r);
            const auto eval = generate_synthetic(ec);
            std::vector<double> ite(m_eval);
            for (std::size_t i = 0; i < m_eval; ++i)
                ite[i] = (*eval.y1)[i] - (*eval.y0)[i];

            for (Learner learner : {Learner::DR, Learner::IPW}) {
                const auto art = conformal_meta_learner(
                    ds, sp, learner, ScoreKind::SignedDistanceCQR, 0.1, g, nuis);
                std::vector<double> pseudo(m_eval);
                for (std::size_t i = 0; i < m_eval; ++i)
                    pseudo[i] = pseudo_outcome(eval.x.row(i), eval.w[i], eval.y[i],
                                               eval.pi[i], nuis, learner);
                for (ScoreKind kind :
                     {ScoreKind::AbsoluteResidual, ScoreKind::SignedDistanceCQR}) {
                    std::vector<double> ps, os;
                    if (kind == ScoreKind::AbsoluteResidual) {
                        ps = abs_residual_scores(art.cate.point, eval.x, pseudo,
                                                 ScoreSource::pseudo(learner))
                                 .values;
                        os = abs_residual_scores(art.cate.point, eval.x, ite,
                                                 ScoreSource::oracle())
                                 .values;
                    } else {
                        ps = cqr_scores(*art.cate.quantile_pair, eval.x, pseudo,
                                        ScoreSource::pseudo(learner))
                                 .values;
                        os = cqr_scores(*art.cate.quantile_pair, eval.x, ite,
                                        ScoreSource::oracle())
                                 .values;
                    }
                    const auto f = make_ecdf(ps);
                    const auto gg = make_ecdf(os);
                    if (!check_mcx(f, gg, merged_grid(f, gg)).holds) fails[r]++;
                }
            }
        }
    };
    const int n_threads =
        static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    int bad_reps = 0, bad_checks = 0;
    for (int r = 0; r < reps; ++r) {
        if (fails[r]) ++bad_reps;
        bad_checks += fails[r];
    }
    report("4 convex-dominance audit", bad_reps == 0,
           std::to_string(reps - bad_reps) + "/" + std::to_string(reps) +
               " replications hold (DR and IPW, both score kinds, " +
               std::to_string(bad_checks) + " failing checks)");
}

// --- criterion 5: exact mixture-vs-convex-combination dominance -----------

double discrete_stop_loss(const std::vector<double>& support,
                          const std::vector<double>& prob, double t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i)
        acc += prob[i] * std::max(support[i] - t, 0.0);
    return acc;
}

void criterion_mixture_dominance() {
    Rng rng(314159);
    int holds = 0;
    const int instances = 1000;
    for (int inst = 0; inst < instances; ++inst) {
        const std::size_t support = 1 + rng.below(6);
        std::vector<double> xs(support), ys(support), prob(support);
        double total = 0.0;
        for (std::size_t i = 0; i < support; ++i) {
            xs[i] = rng.normal() * 5.0;
            ys[i] = rng.normal() * 5.0;
            prob[i] = 0.05 + rng.uniform();
            total += prob[i];
        }
        for (auto& p : prob) p /= total;
        const double pi = rng.uniform();

        std::vector<double> v_sup, v_p, z_sup, z_p, grid;
        for (std::size_t i = 0; i < support; ++i) {
            v_sup.push_back(std::abs(xs[i]));
            v_p.push_back(pi * prob[i]);
            v_sup.push_back(std::abs(ys[i]));
            v_p.push_back((1.0 - pi) * prob[i]);
            z_sup.push_back(std::abs(pi * xs[i] + (1.0 - pi) * ys[i]));
            z_p.push_back(prob[i]);
        }
        grid = v_sup;
        grid.insert(grid.end(), z_sup.begin(), z_sup.end());
        bool ok = true;
        for (double t : grid)
            if (discrete_stop_loss(v_sup, v_p, t) - discrete_stop_loss(z_sup, z_p, t) <
                -1e-10)
                ok = false;
        if (ok) ++holds;
    }
    report("5 mixture dominance exactness", holds == instances,
           std::to_string(holds) + "/" + std::to_string(instances) +
               " discrete instances dominate exactly");
}

// --- criterion 6: efficiency orderings -------------------------------------

// The DR-vs-IPW width gap in this synthetic model is a small systematic
// effect (the IPW transform amplifies the whole outcome, DR only the
// residual), so its paired audit runs at a sample size where nuisance noise
// does not drown it: n = 16000 with 50-sample leaves. The exact-vs-inexact
// comparison comes straight from the Setup-B benchmark run.
void criterion_efficiency(const BigRuns& runs) {
    const int reps = 50;
    std::atomic<int> next{0};
    std::vector<int> dr_shorter(reps, 0);
    auto worker = [&] {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= reps) break;
            SynthConfig sc;
            sc.n = 16000;
            sc.d = 10;
            sc.setup = Setup::B;
            sc.seed = hash_seed(7070, r);
            const auto ds = generate_synthetic(sc);
            const SplitIndices sp =
                split(ds, {0.50625, 0.225, 0.16875}, hash_seed(7171, r));
            GbmConfig g;
            g.min_samples_leaf = 50;
            const auto nuis = fit_nuisance(ds, sp.phi_set, g);
            std::vector<char> used(ds.n(), 0);
            for (auto i : sp.phi_set) used[i] = 1;
            for (auto i : sp.train_set) used[i] = 1;
            for (auto i : sp.calib_set) used[i] = 1;
            double width[2] = {0.0, 0.0};
            int li = 0;
            for (Learner learner : {Learner::DR, Learner::IPW}) {
                const auto art = conformal_meta_learner(
                    ds, sp, learner, ScoreKind::SignedDistanceCQR, 0.1, g, nuis);
                double acc = 0.0;
                int k = 0;
                for (std::size_t i = 0; i < ds.n(); ++i) {
                    if (used[i]) continue;
                    const auto iv = art.interval_at(ds.x.row(i));
                    if (!iv.vacuous()) {
                        acc += iv.width();
                        ++k;
                    }
                }
                width[li++] = acc / std::max(1, k);
            }
            dr_shorter[r] = width[0] < width[1] ? 1 : 0;
        }
    };
    const int n_threads =
        static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    int dr_wins = 0;
    for (int r = 0; r < reps; ++r) dr_wins += dr_shorter[r];
    const double f1 = static_cast<double>(dr_wins) / reps;

    const auto index_of = [&](Method m) {
        for (std::size_t i = 0; i < runs.methods_b.size(); ++i)
            if (runs.methods_b[i] == m) return i;
        return runs.methods_b.size();
    };
    const auto& cells = runs.setup_b.cells;
    const std::size_t i_ex = index_of(Method::WcpExact),
                      i_inex = index_of(Method::WcpInexact);
    int exact_wider = 0, wcp_pairs = 0;
    for (std::size_t r = 0; r < cells[i_ex].size(); ++r) {
        const auto& ex = cells[i_ex][r];
        const auto& inex = cells[i_inex][r];
        if (ex.ok && inex.ok && ex.finite_count > 0 && inex.finite_count > 0) {
            ++wcp_pairs;
            if (ex.avg_len >= inex.avg_len) ++exact_wider;
        }
    }
    const double f2 = wcp_pairs ? static_cast<double>(exact_wider) / wcp_pairs : 0.0;
    const bool pass = wcp_pairs > 0 && f1 >= 0.9 && f2 >= 0.9;
    report("6 efficiency orderings", pass,
           "len(DR)<len(IPW) in " + fmt(100 * f1) + "% of reps, len(Exact)>=len(Inexact) in " +
               fmt(100 * f2) + "% (need 90%)");
}

// --- criterion 7: numerical primitives -------------------------------------

void criterion_primitives() {
    // incomplete beta against an independent binomial tail oracle
    bool beta_ok = true;
    {
        const int n = 5;
        double pascal[6] = {1, 5, 10, 10, 5, 1};
        for (int i = 0; i <= 1000 && beta_ok; ++i) {
            const double x = i / 1000.0;
            double oracle = 0.0;
            for (int j = 2; j <= n; ++j)
                oracle += pascal[j] * std::pow(x, j) * std::pow(1.0 - x, n - j);
            if (std::abs(regularized_incomplete_beta(x, 2, 4) - oracle) >= 1e-12)
                beta_ok = false;
        }
    }

    // conformal quantile index arithmetic, exhaustively
    bool quantile_ok = true;
    for (std::size_t n = 1; n <= 200 && quantile_ok; ++n) {
        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) scores[i] = static_cast<double>(i + 1);
        for (int i = 1; i <= 99; ++i) {
            const std::size_t num = (n + 1) * static_cast<std::size_t>(100 - i);
            const std::size_t k = (num + 99) / 100;
            const auto q = conformal_quantile(scores, i / 100.0);
            if (k > n ? q.finite() : q.value != static_cast<double>(k)) {
                quantile_ok = false;
                break;
            }
        }
    }

    // pinball training coverage at n = 5000
    bool pinball_ok = true;
    std::string pinball_detail;
    {
        Rng rng(271828);
        const std::size_t n = 5000;
        Matrix x(n, 3);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < 3; ++c) x.at(i, c) = rng.uniform();
            y[i] = 2.0 * x.at(i, 0) + rng.normal();
        }
        for (double q : {0.1, 0.5, 0.9}) {
            GbmConfig cfg;
            cfg.loss = Loss::Pinball;
            cfg.pinball_q = q;
            const auto model = fit(x, y, cfg);
            const auto pred = model.predict(x);
            double below = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (y[i] <= pred[i]) below += 1.0;
            below /= static_cast<double>(n);
            if (std::abs(below - q) >= 0.05) pinball_ok = false;
            pinball_detail += fmt(below) + "@" + fmt(q) + " ";
        }
    }

    report("7 numerical primitives", beta_ok && quantile_ok && pinball_ok,
           std::string("beta=") + (beta_ok ? "ok" : "bad") +
               " quantile_index=" + (quantile_ok ? "ok" : "bad") +
               " pinball_cov=" + pinball_detail);
}

// --- criterion 8: byte-identical outputs across thread counts --------------

std::map<std::string, std::string> dir_contents(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[entry.path().filename().string()] = ss.str();
    }
    return out;
}

void criterion_determinism() {
    ExperimentConfig cfg;
    cfg.dataset.synth.n = 400;
    cfg.dataset.synth.d = 3;
    cfg.dataset.synth.setup = Setup::B;
    cfg.methods = {Method::CmDr, Method::WcpNaive, Method::Oracle};
    cfg.alphas = {0.1, 0.3};
    cfg.replications = 6;
    cfg.gbm.n_trees = 20;
    cfg.master_seed = 5150;

    const auto dir1 = std::filesystem::temp_directory_path() / "itecp_acc_j1";
    const auto dir2 = std::filesystem::temp_directory_path() / "itecp_acc_j4";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);

    cfg.jobs = 1;
    emit_reports(run_sweep(cfg), dir1.string());
    cfg.jobs = 4;
    emit_reports(run_sweep(cfg), dir2.string());

    const auto c1 = dir_contents(dir1);
    const auto c2 = dir_contents(dir2);
    bool pass = c1.size() == c2.size() && !c1.empty();
    std::size_t compared = 0;
    if (pass) {
        for (const auto& [name, bytes] : c1) {
            const auto it = c2.find(name);
            if (it == c2.end() || it->second != bytes) {
                pass = false;
                break;
            }
            ++compared;
        }
    }
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
    report("8 determinism across jobs", pass,
           std::to_string(compared) + " files byte-identical between --jobs 1 and 4");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n----------------\n");
    criterion_split_cp_exactness();

    const auto runs = run_big_experiments();
    criterion_coverage_pattern(runs);
    criterion_averaged_ecdf(runs);
    criterion_mcx_audit();
    criterion_mixture_dominance();
    criterion_efficiency(runs);
    criterion_primitives();
    criterion_determinism();

    std::printf("----------------\n%s (%d failing)\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "CRITERIA FAILING", g_failures);
    return g_failures == 0 ? 0 : 1;
}

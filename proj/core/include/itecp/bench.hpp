#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "itecp/conformal.hpp"
#include "itecp/csv.hpp"
#include "itecp/dgp.hpp"
#include "itecp/stochord.hpp"

namespace itecp {

enum class Method { CmDr, CmIpw, CmX, WcpNaive, WcpExact, WcpInexact, Oracle };

const char* method_name(Method m);
Method parse_method(const std::string& name);

struct DataSource {
    enum class Kind { Synthetic, Csv };
    Kind kind = Kind::Synthetic;
    SynthConfig synth;
    std::string csv_path;
    PropensitySpec propensity = PropensitySpec::column();
};

// Split protocol: test fraction of all rows; calib fraction of the training
// remainder; phi fraction of the proper-training remainder.
struct BenchSplits {
    double test = 0.1;
    double calib = 0.25;
    double phi = 0.25;
};

struct ExperimentConfig {
    DataSource dataset;
    std::vector<Method> methods = {Method::CmDr};
    std::vector<double> alphas = {0.1};
    int replications = 100;
    BenchSplits splits;
    GbmConfig gbm;
    ScoreKind score_kind = ScoreKind::SignedDistanceCQR;
    std::uint64_t master_seed = 0;
    std::string out_dir = "results";
    int jobs = 1;
    bool collect_scores = true;

    void validate() const;
};

// fraction of test ITEs inside their intervals
double metric_coverage(std::span<const ItemInterval> intervals,
                       std::span<const double> true_ites);
// mean width; +inf as soon as any interval is infinite
double metric_avg_len(std::span<const ItemInterval> intervals);
double metric_rmse(std::span<const double> tau_hat, std::span<const double> tau_true);

// Per-method, per-replication cell. avg_len here is the mean over finite
// intervals only; vacuous counts the infinite ones (they are never averaged
// silently).
struct MethodRep {
    bool ok = false;
    std::string error;
    double coverage = 0.0;
    bool has_coverage = false;
    double avg_len = 0.0;
    std::size_t finite_count = 0;
    std::size_t vacuous = 0;
    double rmse = 0.0;
    bool has_rmse = false;
    double wall_seconds = 0.0;
    std::optional<OrderReport> order;
};

// Calibration-set conformity scores kept per replication for diagnostics,
// both score kinds, pseudo and oracle targets.
struct RepScores {
    std::vector<double> pseudo_abs, oracle_abs;
    std::vector<double> pseudo_cqr, oracle_cqr;
};

struct RunResult {
    double alpha = 0.1;
    std::vector<Method> methods;
    // cells[m][r] for methods[m], replication r
    std::vector<std::vector<MethodRep>> cells;
    // per CM learner: one RepScores per replication (simulation only)
    std::map<Learner, std::vector<RepScores>> scores;
};

struct MethodSummary {
    Method method = Method::CmDr;
    std::size_t reps_ok = 0;
    double coverage = 0.0, coverage_se = 0.0;
    double avg_len = 0.0, avg_len_se = 0.0;
    double rmse = 0.0, rmse_se = 0.0;
    std::size_t vacuous = 0;
};

RunResult run_experiment(const ExperimentConfig& cfg, double alpha);
// One RunResult per alpha in cfg.alphas.
std::vector<RunResult> run_sweep(const ExperimentConfig& cfg);

std::vector<MethodSummary> summarize(const RunResult& result);

// summary.csv for the first result; coverage_vs_alpha.csv plus sweep SVGs
// when several alphas ran; ecdf_<learner>.csv and SVG per CM learner with
// collected scores. Fails before writing anything if there is nothing to
// report.
void emit_reports(const std::vector<RunResult>& results, const std::string& outdir);

// Flat key=value config text with dotted sections; '#' starts a comment;
// unknown keys are rejected. See README for the schema.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace itecp

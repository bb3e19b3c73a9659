#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "itecp/dgp.hpp"
#include "itecp/metalearner.hpp"

namespace itecp {

enum class ScoreKind { AbsoluteResidual, SignedDistanceCQR };

struct ScoreSource {
    enum class Kind { Oracle, Pseudo, PotentialOutcome };
    Kind kind = Kind::Oracle;
    Learner learner = Learner::DR;  // Pseudo only
    int arm = 0;                    // PotentialOutcome only

    static ScoreSource oracle() { return {Kind::Oracle, Learner::DR, 0}; }
    static ScoreSource pseudo(Learner l) { return {Kind::Pseudo, l, 0}; }
    static ScoreSource potential_outcome(int arm) {
        return {Kind::PotentialOutcome, Learner::DR, arm};
    }
};

struct ConformityScores {
    std::vector<double> values;
    ScoreKind kind = ScoreKind::AbsoluteResidual;
    ScoreSource source;
};

// Empirical conformal quantile at level 1 - alpha; +infinity when the
// calibration set is too small for the level (alpha < 1/(n+1)).
struct CalibratedQuantile {
    double level = 0.9;  // 1 - alpha
    double value = std::numeric_limits<double>::infinity();
    std::size_t n_calib = 0;

    bool finite() const { return std::isfinite(value); }
};

struct ItemInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double v) const { return lo <= v && v <= hi; }
    double width() const { return hi - lo; }
    bool vacuous() const { return !std::isfinite(lo) || !std::isfinite(hi); }
};

// The ceil((n+1)(1-alpha))-th smallest score (stable ascending sort, ties
// kept), or +infinity when alpha < 1/(n+1). A 1e-9 slack absorbs upward
// float rounding in (n+1)(1-alpha) so grid alphas give exact indices.
CalibratedQuantile conformal_quantile(std::span<const double> scores, double alpha);

// |model(x_k) - target_k| per row; target choice (pseudo-outcome, oracle
// effect, potential outcome) is recorded in `source`.
ConformityScores abs_residual_scores(const GbmModel& model, const Matrix& rows,
                                     std::span<const double> targets,
                                     ScoreSource source);

// Signed distance max{lo(x) - t, t - hi(x)}; negative when the target sits
// strictly inside the quantile band.
ConformityScores cqr_scores(const QuantilePair& pair, const Matrix& rows,
                            std::span<const double> targets, ScoreSource source);

// Point mode: [tau(x) - q, tau(x) + q]. Quantile mode: [lo(x) - q, hi(x) + q].
// An infinite quantile issues the whole line. The quantile's score kind must
// match the model mode.
ItemInterval issue_interval(const CateModel& cate, const CalibratedQuantile& q,
                            ScoreKind kind, std::span<const double> x_row);

// End-to-end pipeline artifacts: everything needed to issue intervals at any
// test point, plus the calibration scores for diagnostics.
struct MetaLearnerArtifacts {
    CateModel cate;
    CalibratedQuantile quantile;
    NuisanceModel nuisance;
    ConformityScores calib_scores;
    ScoreKind score_kind = ScoreKind::SignedDistanceCQR;

    ItemInterval interval_at(std::span<const double> x_row) const {
        return issue_interval(cate, quantile, score_kind, x_row);
    }
};

// Fit nuisance on the phi set, regress pseudo-outcomes on the train set,
// score pseudo-outcomes on the calibration set, calibrate the quantile.
// SignedDistanceCQR uses base quantiles (alpha/2, 1 - alpha/2).
MetaLearnerArtifacts conformal_meta_learner(const CausalDataset& dataset,
                                            const SplitIndices& splits,
                                            Learner learner, ScoreKind score_kind,
                                            double alpha, const GbmConfig& gbm_cfg);

// Same pipeline with an already-fitted nuisance model (several learners can
// share one phi-set fit).
MetaLearnerArtifacts conformal_meta_learner(const CausalDataset& dataset,
                                            const SplitIndices& splits,
                                            Learner learner, ScoreKind score_kind,
                                            double alpha, const GbmConfig& gbm_cfg,
                                            const NuisanceModel& nuisance);

}  // namespace itecp

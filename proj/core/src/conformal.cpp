#include "itecp/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "itecp/errors.hpp"

namespace itecp {

CalibratedQuantile conformal_quantile(std::span<const double> scores, double alpha) {
    if (scores.empty()) throw DataError("conformal_quantile: empty score set");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("conformal_quantile: alpha must lie in (0,1)");

    const std::size_t n = scores.size();
    CalibratedQuantile q;
    q.level = 1.0 - alpha;
    q.n_calib = n;

    // ceil((n+1)(1-alpha)) with slack absorbing upward float rounding; an
    // index past n means alpha < 1/(n+1), the vacuous +inf branch.
    const double pos = static_cast<double>(n + 1) * (1.0 - alpha);
    const double slack = 1e-9 * static_cast<double>(n + 1);
    const double k_real = std::ceil(pos - slack);
    if (k_real > static_cast<double>(n)) return q;  // +inf
    std::size_t k = k_real < 1.0 ? 1 : static_cast<std::size_t>(k_real);

    std::vector<double> sorted(scores.begin(), scores.end());
    std::stable_sort(sorted.begin(), sorted.end());
    q.value = sorted[k - 1];
    return q;
}

ConformityScores abs_residual_scores(const GbmModel& model, const Matrix& rows,
                                     std::span<const double> targets,
                                     ScoreSource source) {
    if (rows.rows() != targets.size())
        throw DataError("abs_residual_scores: rows/targets length mismatch");
    ConformityScores s;
    s.kind = ScoreKind::AbsoluteResidual;
    s.source = source;
    s.values.resize(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i)
        s.values[i] = std::abs(model.predict_row(rows.row(i)) - targets[i]);
    return s;
}

ConformityScores cqr_scores(const QuantilePair& pair, const Matrix& rows,
                            std::span<const double> targets, ScoreSource source) {
    if (rows.rows() != targets.size())
        throw DataError("cqr_scores: rows/targets length mismatch");
    ConformityScores s;
    s.kind = ScoreKind::SignedDistanceCQR;
    s.source = source;
    s.values.resize(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto [lo, hi] = pair.predict_row(rows.row(i));
        s.values[i] = std::max(lo - targets[i], targets[i] - hi);
    }
    return s;
}

ItemInterval issue_interval(const CateModel& cate, const CalibratedQuantile& q,
                            ScoreKind kind, std::span<const double> x_row) {
    ItemInterval iv;
    if (!q.finite()) return iv;  // the whole line
    if (kind == ScoreKind::AbsoluteResidual) {
        const double c = cate.point.predict_row(x_row);
        iv.lo = c - q.value;
        iv.hi = c + q.value;
    } else {
        if (!cate.quantile_pair)
            throw DataError("issue_interval: CQR quantile without a quantile-pair model");
        const auto [lo, hi] = cate.quantile_pair->predict_row(x_row);
        iv.lo = lo - q.value;
        iv.hi = hi + q.value;
    }
    return iv;
}

MetaLearnerArtifacts conformal_meta_learner(const CausalDataset& dataset,
                                            const SplitIndices& splits,
                                            Learner learner, ScoreKind score_kind,
                                            double alpha, const GbmConfig& gbm_cfg) {
    if (splits.phi_set.empty())
        throw DataError("conformal_meta_learner: phi split must be nonempty");
    return conformal_meta_learner(dataset, splits, learner, score_kind, alpha, gbm_cfg,
                                  fit_nuisance(dataset, splits.phi_set, gbm_cfg));
}

MetaLearnerArtifacts conformal_meta_learner(const CausalDataset& dataset,
                                            const SplitIndices& splits,
                                            Learner learner, ScoreKind score_kind,
                                            double alpha, const GbmConfig& gbm_cfg,
                                            const NuisanceModel& nuisance) {
    if (splits.train_set.empty() || splits.calib_set.empty())
        throw DataError("conformal_meta_learner: train and calib splits must be nonempty");

    MetaLearnerArtifacts art;
    art.score_kind = score_kind;
    art.nuisance = nuisance;

    const auto train = make_pseudo_samples(dataset, splits.train_set, art.nuisance, learner);
    const CateFitMode mode = score_kind == ScoreKind::AbsoluteResidual
                                 ? CateFitMode::point()
                                 : CateFitMode::quantile_pair(alpha / 2.0, 1.0 - alpha / 2.0);
    art.cate = fit_cate(train, mode, gbm_cfg);

    Matrix calib_x = dataset.x.gather(splits.calib_set);
    std::vector<double> calib_targets(splits.calib_set.size());
    for (std::size_t i = 0; i < splits.calib_set.size(); ++i) {
        const std::size_t row = splits.calib_set[i];
        calib_targets[i] = pseudo_outcome(dataset.x.row(row), dataset.w[row],
                                          dataset.y[row], dataset.pi[row],
                                          art.nuisance, learner);
    }
    art.calib_scores =
        score_kind == ScoreKind::AbsoluteResidual
            ? abs_residual_scores(art.cate.point, calib_x, calib_targets,
                                  ScoreSource::pseudo(learner))
            : cqr_scores(*art.cate.quantile_pair, calib_x, calib_targets,
                         ScoreSource::pseudo(learner));
    art.quantile = conformal_quantile(art.calib_scores.values, alpha);
    return art;
}

}  // namespace itecp

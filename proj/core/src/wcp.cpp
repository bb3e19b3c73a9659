#include "itecp/wcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "itecp/errors.hpp"

namespace itecp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double arm_weight(int arm, double pi) {
    return arm == 1 ? 1.0 / pi : 1.0 / (1.0 - pi);
}
}  // namespace

double weighted_conformal_quantile(const WeightedScores& ws, double alpha) {
    if (ws.values.empty()) throw DataError("weighted_conformal_quantile: empty scores");
    if (ws.values.size() != ws.weights.size())
        throw DataError("weighted_conformal_quantile: score/weight length mismatch");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("weighted_conformal_quantile: alpha must lie in (0,1)");
    if (!(ws.test_weight >= 0.0) || !std::isfinite(ws.test_weight))
        throw DataError("weighted_conformal_quantile: bad test weight");

    double total = ws.test_weight;
    for (double w : ws.weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw DataError("weighted_conformal_quantile: weights must be finite and >= 0");
        total += w;
    }
    if (total <= 0.0) throw DataError("weighted_conformal_quantile: all weights are zero");

    std::vector<std::size_t> order(ws.values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ws.values[a] < ws.values[b];
    });

    // Smallest score whose cumulative weight reaches (1-alpha) of the total
    // mass; the slack mirrors conformal_quantile so uniform weights agree
    // bit-for-bit with the unweighted index rule.
    const double threshold = (1.0 - alpha) * total - 1e-9 * total;
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += ws.weights[i];
        if (cum >= threshold) return ws.values[i];
    }
    return kInf;  // the +inf-augmented mass point holds the quantile
}

ItemInterval PoIssuer::at(std::span<const double> x_row, double pi_row) const {
    WeightedScores ws;
    ws.values = calib_scores;
    ws.weights = calib_weights;
    ws.test_weight = arm_weight(arm, pi_row);
    const double q = weighted_conformal_quantile(ws, alpha);
    ItemInterval iv;
    if (!std::isfinite(q)) return iv;
    const auto [lo, hi] = pair.predict_row(x_row);
    iv.lo = lo - q;
    iv.hi = hi + q;
    return iv;
}

PoIssuer po_interval_on(const CausalDataset& dataset,
                        const std::vector<std::size_t>& fit_rows,
                        const std::vector<std::size_t>& calib_rows, int arm,
                        double alpha, const GbmConfig& gbm_cfg) {
    if (arm != 0 && arm != 1) throw ConfigError("po_interval: arm must be 0 or 1");
    std::vector<std::size_t> fit_arm, calib_arm;
    for (std::size_t i : fit_rows)
        if (dataset.w[i] == arm) fit_arm.push_back(i);
    for (std::size_t i : calib_rows)
        if (dataset.w[i] == arm) calib_arm.push_back(i);
    if (fit_arm.empty())
        throw DataError("po_interval: no fit rows in arm " + std::to_string(arm));
    if (calib_arm.empty())
        throw DataError("po_interval: no calibration rows in arm " + std::to_string(arm));

    PoIssuer issuer;
    issuer.arm = arm;
    issuer.alpha = alpha;
    {
        Matrix x = dataset.x.gather(fit_arm);
        std::vector<double> y = gather(dataset.y, fit_arm);
        issuer.pair = fit_quantile_pair(x, y, alpha / 2.0, 1.0 - alpha / 2.0, gbm_cfg);
    }
    Matrix cx = dataset.x.gather(calib_arm);
    std::vector<double> cy = gather(dataset.y, calib_arm);
    const auto scores = cqr_scores(issuer.pair, cx, cy, ScoreSource::potential_outcome(arm));
    issuer.calib_scores = scores.values;
    issuer.calib_weights.resize(calib_arm.size());
    for (std::size_t i = 0; i < calib_arm.size(); ++i)
        issuer.calib_weights[i] = arm_weight(arm, dataset.pi[calib_arm[i]]);
    return issuer;
}

PoIssuer po_interval(const CausalDataset& dataset, const SplitIndices& splits,
                     int arm, double alpha, const GbmConfig& gbm_cfg) {
    return po_interval_on(dataset, splits.phi_set, splits.calib_set, arm, alpha, gbm_cfg);
}

ItemInterval NaiveWcpIssuer::at(std::span<const double> x_row, double pi_row) const {
    const ItemInterval iv1 = c1.at(x_row, pi_row);
    const ItemInterval iv0 = c0.at(x_row, pi_row);
    return {iv1.lo - iv0.hi, iv1.hi - iv0.lo};
}

NaiveWcpIssuer wcp_naive(const CausalDataset& dataset, const SplitIndices& splits,
                         double alpha, const GbmConfig& gbm_cfg) {
    NaiveWcpIssuer issuer;
    issuer.c1 = po_interval(dataset, splits, 1, alpha / 2.0, gbm_cfg);
    issuer.c0 = po_interval(dataset, splits, 0, alpha / 2.0, gbm_cfg);
    return issuer;
}

NestedStage1 nested_stage1(const CausalDataset& dataset, const SplitIndices& splits,
                           double alpha, const GbmConfig& gbm_cfg) {
    NestedStage1 s1;
    s1.c1 = po_interval_on(dataset, splits.phi_set, splits.train_set, 1, alpha / 2.0,
                           gbm_cfg);
    s1.c0 = po_interval_on(dataset, splits.phi_set, splits.train_set, 0, alpha / 2.0,
                           gbm_cfg);
    s1.label_lo.resize(splits.calib_set.size());
    s1.label_hi.resize(splits.calib_set.size());
    for (std::size_t i = 0; i < splits.calib_set.size(); ++i) {
        const std::size_t row = splits.calib_set[i];
        const auto x_row = dataset.x.row(row);
        const double y = dataset.y[row];
        ItemInterval counterfactual;
        if (dataset.w[row]) {
            counterfactual = s1.c0.at(x_row, dataset.pi[row]);
            s1.label_lo[i] = y - counterfactual.hi;
            s1.label_hi[i] = y - counterfactual.lo;
        } else {
            counterfactual = s1.c1.at(x_row, dataset.pi[row]);
            s1.label_lo[i] = counterfactual.lo - y;
            s1.label_hi[i] = counterfactual.hi - y;
        }
        if (counterfactual.vacuous()) s1.degenerate = true;
    }
    return s1;
}

ItemInterval ExactNestedIssuer::at(std::span<const double> x_row) const {
    ItemInterval iv;
    if (degenerate || !std::isfinite(margin)) return iv;
    iv.lo = m_lo.predict_row(x_row) - margin;
    iv.hi = m_hi.predict_row(x_row) + margin;
    if (iv.lo > iv.hi) iv.lo = iv.hi = 0.5 * (iv.lo + iv.hi);
    return iv;
}

ExactNestedIssuer wcp_exact_nested(const CausalDataset& dataset,
                                   const SplitIndices& splits, double alpha,
                                   const GbmConfig& gbm_cfg, const NestedStage1& s1) {
    const std::size_t m = splits.calib_set.size();
    if (m < 4) throw DataError("wcp_exact_nested: calibration split too small");

    ExactNestedIssuer issuer;
    if (s1.degenerate) {
        issuer.degenerate = true;
        return issuer;
    }

    // First half fits the endpoint models, second half calibrates the margin.
    const std::size_t half = m / 2;
    std::vector<std::size_t> fit_pos(half), cal_pos(m - half);
    std::iota(fit_pos.begin(), fit_pos.end(), 0);
    std::iota(cal_pos.begin(), cal_pos.end(), half);

    const auto rows_at = [&](const std::vector<std::size_t>& pos) {
        std::vector<std::size_t> rows(pos.size());
        for (std::size_t i = 0; i < pos.size(); ++i) rows[i] = splits.calib_set[pos[i]];
        return rows;
    };
    {
        const auto rows = rows_at(fit_pos);
        Matrix x = dataset.x.gather(rows);
        std::vector<double> lo(half), hi(half);
        for (std::size_t i = 0; i < half; ++i) {
            lo[i] = s1.label_lo[fit_pos[i]];
            hi[i] = s1.label_hi[fit_pos[i]];
        }
        const GbmConfig cfg = gbm_cfg.with_loss(Loss::SquaredError);
        issuer.m_lo = fit(x, lo, cfg);
        issuer.m_hi = fit(x, hi, cfg);
    }
    {
        const auto rows = rows_at(cal_pos);
        Matrix x = dataset.x.gather(rows);
        std::vector<double> scores(cal_pos.size());
        for (std::size_t i = 0; i < cal_pos.size(); ++i) {
            const double lo_hat = issuer.m_lo.predict_row(x.row(i));
            const double hi_hat = issuer.m_hi.predict_row(x.row(i));
            scores[i] = std::max(lo_hat - s1.label_lo[cal_pos[i]],
                                 s1.label_hi[cal_pos[i]] - hi_hat);
        }
        issuer.margin = conformal_quantile(scores, alpha / 2.0).value;
    }
    return issuer;
}

ExactNestedIssuer wcp_exact_nested(const CausalDataset& dataset,
                                   const SplitIndices& splits, double alpha,
                                   const GbmConfig& gbm_cfg) {
    return wcp_exact_nested(dataset, splits, alpha, gbm_cfg,
                            nested_stage1(dataset, splits, alpha, gbm_cfg));
}

ItemInterval InexactNestedIssuer::at(std::span<const double> x_row) const {
    ItemInterval iv;
    if (degenerate) return iv;
    double lo = m_lo.predict_row(x_row);
    double hi = m_hi.predict_row(x_row);
    if (lo > hi) lo = hi = 0.5 * (lo + hi);
    iv.lo = lo;
    iv.hi = hi;
    return iv;
}

InexactNestedIssuer wcp_inexact_nested(const CausalDataset& dataset,
                                       const SplitIndices& splits, double alpha,
                                       const GbmConfig& gbm_cfg,
                                       const NestedStage1& s1) {
    InexactNestedIssuer issuer;
    if (s1.degenerate) {
        issuer.degenerate = true;
        return issuer;
    }
    Matrix x = dataset.x.gather(splits.calib_set);
    issuer.m_lo = fit(x, s1.label_lo, gbm_cfg.with_loss(Loss::Pinball, alpha / 2.0));
    issuer.m_hi = fit(x, s1.label_hi, gbm_cfg.with_loss(Loss::Pinball, 1.0 - alpha / 2.0));
    return issuer;
}

InexactNestedIssuer wcp_inexact_nested(const CausalDataset& dataset,
                                       const SplitIndices& splits, double alpha,
                                       const GbmConfig& gbm_cfg) {
    return wcp_inexact_nested(dataset, splits, alpha, gbm_cfg,
                              nested_stage1(dataset, splits, alpha, gbm_cfg));
}

}  // namespace itecp

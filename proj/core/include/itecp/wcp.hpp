#pragma once

#include <vector>

#include "itecp/conformal.hpp"
#include "itecp/dgp.hpp"
#include "itecp/gbm.hpp"

namespace itecp {

// Calibration scores with likelihood-ratio weights, plus the weight at the
// test point (the augmented mass that sits at +infinity).
struct WeightedScores {
    std::vector<double> values;
    std::vector<double> weights;
    double test_weight = 1.0;
};

// (1-alpha)-quantile of the weighted empirical score distribution augmented
// with {+inf at test_weight}. Returns +inf when the calibration mass cannot
// reach 1-alpha (normalized test mass exceeds alpha). Uniform weights reduce
// bit-identically to conformal_quantile.
double weighted_conformal_quantile(const WeightedScores& ws, double alpha);

// Weighted split-CP issuer for one potential outcome Y(arm): CQR pair fit on
// the arm's phi rows, signed-distance scores on the arm's calibration rows,
// weights 1/pi (arm 1) or 1/(1-pi) (arm 0) correcting P_{X|W=arm} -> P_X.
class PoIssuer {
  public:
    ItemInterval at(std::span<const double> x_row, double pi_row) const;

    int arm = 1;
    double alpha = 0.1;
    QuantilePair pair;
    std::vector<double> calib_scores;
    std::vector<double> calib_weights;
};

PoIssuer po_interval(const CausalDataset& dataset, const SplitIndices& splits,
                     int arm, double alpha, const GbmConfig& gbm_cfg);

// Same construction with explicit fit/calibration row sets (the nested
// variants calibrate stage 1 on the train split instead of the calib split).
PoIssuer po_interval_on(const CausalDataset& dataset,
                        const std::vector<std::size_t>& fit_rows,
                        const std::vector<std::size_t>& calib_rows, int arm,
                        double alpha, const GbmConfig& gbm_cfg);

// Bonferroni combination: Y(1) and Y(0) intervals at level 1 - alpha/2 each,
// ITE interval [L1 - U0, U1 - L0].
class NaiveWcpIssuer {
  public:
    ItemInterval at(std::span<const double> x_row, double pi_row) const;
    PoIssuer c1;
    PoIssuer c0;
};

NaiveWcpIssuer wcp_naive(const CausalDataset& dataset, const SplitIndices& splits,
                         double alpha, const GbmConfig& gbm_cfg);

// Stage 1 of the nested variants: counterfactual PO issuers calibrated on the
// train split, then plug-in ITE interval labels on the calib split
// (treated: [y - U0, y - L0], control: [L1 - y, U1 - y]).
struct NestedStage1 {
    PoIssuer c1;
    PoIssuer c0;
    std::vector<double> label_lo;  // aligned with splits.calib_set
    std::vector<double> label_hi;
    bool degenerate = false;  // some stage-1 interval was infinite
};

NestedStage1 nested_stage1(const CausalDataset& dataset, const SplitIndices& splits,
                           double alpha, const GbmConfig& gbm_cfg);

// Exact nested: mean regressions of the stage-1 endpoints on half the calib
// split, secondary CP margin from max-endpoint residual scores on the other
// half. Conservative by construction (alpha/2 per stage).
class ExactNestedIssuer {
  public:
    ItemInterval at(std::span<const double> x_row) const;
    GbmModel m_lo;
    GbmModel m_hi;
    double margin = 0.0;
    bool degenerate = false;
};

ExactNestedIssuer wcp_exact_nested(const CausalDataset& dataset,
                                   const SplitIndices& splits, double alpha,
                                   const GbmConfig& gbm_cfg);
ExactNestedIssuer wcp_exact_nested(const CausalDataset& dataset,
                                   const SplitIndices& splits, double alpha,
                                   const GbmConfig& gbm_cfg, const NestedStage1& stage1);

// Inexact nested: quantile regressions of the stage-1 endpoints issued
// directly, no secondary calibration and no coverage guarantee.
class InexactNestedIssuer {
  public:
    ItemInterval at(std::span<const double> x_row) const;
    GbmModel m_lo;
    GbmModel m_hi;
    bool degenerate = false;
};

InexactNestedIssuer wcp_inexact_nested(const CausalDataset& dataset,
                                       const SplitIndices& splits, double alpha,
                                       const GbmConfig& gbm_cfg);
InexactNestedIssuer wcp_inexact_nested(const CausalDataset& dataset,
                                       const SplitIndices& splits, double alpha,
                                       const GbmConfig& gbm_cfg,
                                       const NestedStage1& stage1);

}  // namespace itecp

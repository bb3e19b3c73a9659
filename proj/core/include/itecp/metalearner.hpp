#pragma once

#include <optional>
#include <vector>

#include "itecp/dgp.hpp"
#include "itecp/gbm.hpp"

namespace itecp {

enum class Learner { IPW, X, DR };

const char* learner_name(Learner l);

// Outcome regressors fit on the phi subset, one per treatment arm, plus the
// known propensity carried by the dataset. The propensity is never estimated.
struct NuisanceModel {
    GbmModel mu0_hat;
    GbmModel mu1_hat;
};

struct PseudoSample {
    std::vector<double> x_row;
    double y_tilde = 0.0;
    Learner learner = Learner::DR;
};

// Second-stage effect model: a point regressor, plus lower/upper quantile
// models when built for signed-distance calibration.
struct CateModel {
    GbmModel point;
    std::optional<QuantilePair> quantile_pair;
};

struct CateFitMode {
    enum class Kind { PointAbsResidual, QuantilePair };
    Kind kind = Kind::PointAbsResidual;
    double q_lo = 0.05;
    double q_hi = 0.95;

    static CateFitMode point() { return {Kind::PointAbsResidual, 0, 0}; }
    static CateFitMode quantile_pair(double lo, double hi) {
        return {Kind::QuantilePair, lo, hi};
    }
};

// mu0_hat on the w=0 rows of phi_indices, mu1_hat on the w=1 rows. An arm
// with fewer than min_samples_leaf rows is an error naming the arm.
NuisanceModel fit_nuisance(const CausalDataset& dataset,
                           const std::vector<std::size_t>& phi_indices,
                           const GbmConfig& gbm_cfg);

// Observable-only transformed target for one observation:
//   IPW: (w - pi) / (pi (1 - pi)) * y
//   X  : w (y - mu0(x)) + (1 - w) (mu1(x) - y)
//   DR : (w - pi) / (pi (1 - pi)) * (y - mu_w(x)) + mu1(x) - mu0(x)
// where mu_w reads the arm selected by the observed w.
double pseudo_outcome(std::span<const double> x_row, std::uint8_t w, double y,
                      double pi, const NuisanceModel& nuisance, Learner learner);

std::vector<PseudoSample> make_pseudo_samples(const CausalDataset& dataset,
                                              const std::vector<std::size_t>& rows,
                                              const NuisanceModel& nuisance,
                                              Learner learner);

// Regresses pseudo-outcomes on covariates. QuantilePair mode fits the pinball
// pair and the mean model (the latter backs point estimates); samples must all
// carry the same learner tag.
CateModel fit_cate(const std::vector<PseudoSample>& pseudo_samples,
                   const CateFitMode& mode, const GbmConfig& gbm_cfg);

}  // namespace itecp

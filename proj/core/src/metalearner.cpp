#include "itecp/metalearner.hpp"

#include <cmath>
#include <string>

#include "itecp/errors.hpp"

namespace itecp {

const char* learner_name(Learner l) {
    switch (l) {
        case Learner::IPW: return "ipw";
        case Learner::X: return "x";
        case Learner::DR: return "dr";
    }
    return "?";
}

NuisanceModel fit_nuisance(const CausalDataset& dataset,
                           const std::vector<std::size_t>& phi_indices,
                           const GbmConfig& gbm_cfg) {
    std::vector<std::size_t> arm0, arm1;
    for (std::size_t i : phi_indices)
        (dataset.w[i] ? arm1 : arm0).push_back(i);
    const std::size_t msl = static_cast<std::size_t>(gbm_cfg.min_samples_leaf);
    if (arm0.size() < msl)
        throw DataError("fit_nuisance: control arm has " + std::to_string(arm0.size()) +
                        " rows in the phi set, need >= " + std::to_string(msl));
    if (arm1.size() < msl)
        throw DataError("fit_nuisance: treated arm has " + std::to_string(arm1.size()) +
                        " rows in the phi set, need >= " + std::to_string(msl));

    const GbmConfig cfg = gbm_cfg.with_loss(Loss::SquaredError);
    NuisanceModel nm;
    {
        Matrix x0 = dataset.x.gather(arm0);
        std::vector<double> y0 = gather(dataset.y, arm0);
        nm.mu0_hat = fit(x0, y0, cfg);
    }
    {
        Matrix x1 = dataset.x.gather(arm1);
        std::vector<double> y1 = gather(dataset.y, arm1);
        nm.mu1_hat = fit(x1, y1, cfg);
    }
    return nm;
}

double pseudo_outcome(std::span<const double> x_row, std::uint8_t w, double y,
                      double pi, const NuisanceModel& nuisance, Learner learner) {
    if (!(pi > kPositivityEps && pi < 1.0 - kPositivityEps))
        throw DataError("pseudo_outcome: propensity " + std::to_string(pi) +
                        " violates the positivity guard");
    switch (learner) {
        case Learner::IPW: {
            return (w - pi) / (pi * (1.0 - pi)) * y;
        }
        case Learner::X: {
            if (w) return y - nuisance.mu0_hat.predict_row(x_row);
            return nuisance.mu1_hat.predict_row(x_row) - y;
        }
        case Learner::DR: {
            const double mu0 = nuisance.mu0_hat.predict_row(x_row);
            const double mu1 = nuisance.mu1_hat.predict_row(x_row);
            const double mu_w = w ? mu1 : mu0;
            return (w - pi) / (pi * (1.0 - pi)) * (y - mu_w) + mu1 - mu0;
        }
    }
    throw DataError("pseudo_outcome: unknown learner");
}

std::vector<PseudoSample> make_pseudo_samples(const CausalDataset& dataset,
                                              const std::vector<std::size_t>& rows,
                                              const NuisanceModel& nuisance,
                                              Learner learner) {
    std::vector<PseudoSample> out;
    out.reserve(rows.size());
    for (std::size_t i : rows) {
        const auto x_row = dataset.x.row(i);
        PseudoSample ps;
        ps.x_row.assign(x_row.begin(), x_row.end());
        ps.y_tilde = pseudo_outcome(x_row, dataset.w[i], dataset.y[i], dataset.pi[i],
                                    nuisance, learner);
        ps.learner = learner;
        out.push_back(std::move(ps));
    }
    return out;
}

CateModel fit_cate(const std::vector<PseudoSample>& pseudo_samples,
                   const CateFitMode& mode, const GbmConfig& gbm_cfg) {
    if (pseudo_samples.empty()) throw DataError("fit_cate: no pseudo samples");
    const Learner tag = pseudo_samples.front().learner;
    for (const auto& ps : pseudo_samples)
        if (ps.learner != tag)
            throw DataError("fit_cate: mixed learner tags in pseudo sample set");

    const std::size_t n = pseudo_samples.size();
    const std::size_t d = pseudo_samples.front().x_row.size();
    Matrix x(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ps = pseudo_samples[i];
        if (ps.x_row.size() != d) throw DataError("fit_cate: ragged covariate rows");
        auto row = x.row(i);
        for (std::size_t c = 0; c < d; ++c) row[c] = ps.x_row[c];
        y[i] = ps.y_tilde;
    }

    CateModel cm;
    cm.point = fit(x, y, gbm_cfg.with_loss(Loss::SquaredError));
    if (mode.kind == CateFitMode::Kind::QuantilePair)
        cm.quantile_pair = fit_quantile_pair(x, y, mode.q_lo, mode.q_hi, gbm_cfg);
    return cm;
}

}  // namespace itecp

#include "itecp/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "itecp/errors.hpp"
#include "itecp/rng.hpp"
#include "itecp/special.hpp"

namespace itecp {

void CausalDataset::validate() const {
    const std::size_t rows = n();
    if (rows == 0) throw DataError("dataset has no rows");
    if (w.size() != rows || y.size() != rows || pi.size() != rows)
        throw DataError("dataset column lengths disagree");
    if (y0.has_value() != y1.has_value())
        throw DataError("y0 and y1 must be present together");
    if (y0 && (y0->size() != rows || y1->size() != rows))
        throw DataError("potential outcome lengths disagree");
    if (tau_true && tau_true->size() != rows)
        throw DataError("tau_true length disagrees");

    for (std::size_t i = 0; i < rows; ++i) {
        if (w[i] > 1)
            throw DataError("row " + std::to_string(i) + ": w must be 0 or 1");
        if (!(pi[i] > kPositivityEps && pi[i] < 1.0 - kPositivityEps))
            throw DataError("row " + std::to_string(i) + ": propensity " +
                            std::to_string(pi[i]) + " violates positivity");
        if (y0) {
            const double factual = w[i] ? (*y1)[i] : (*y0)[i];
            if (y[i] != factual)
                throw DataError("row " + std::to_string(i) +
                                ": y does not equal the selected potential outcome");
        }
    }
}

double zeta(double t) { return 1.0 / (1.0 + std::exp(-12.0 * (t - 0.5))); }

double propensity_fn(std::span<const double> x_row) {
    return (1.0 + regularized_incomplete_beta(x_row[0], 2, 4)) / 4.0;
}

CausalDataset generate_synthetic(const SynthConfig& cfg) {
    if (cfg.n < 1) throw ConfigError("generate_synthetic: n must be >= 1");
    if (cfg.d < 2) throw ConfigError("generate_synthetic: d must be >= 2");

    double gamma = cfg.gamma;
    switch (cfg.setup) {
        case Setup::A: gamma = 1.0; break;
        case Setup::B: gamma = 0.0; break;
        case Setup::CustomGamma: break;
    }
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ConfigError("generate_synthetic: gamma must lie in [0,1]");

    Rng rng(cfg.seed);
    CausalDataset ds;
    ds.x = Matrix(cfg.n, cfg.d);
    ds.w.resize(cfg.n);
    ds.y.resize(cfg.n);
    ds.pi.resize(cfg.n);
    ds.y0 = std::vector<double>(cfg.n);
    ds.y1 = std::vector<double>(cfg.n);
    ds.tau_true = std::vector<double>(cfg.n);

    constexpr double clamp = 1e-12;  // keeps -log(x1) finite
    for (std::size_t i = 0; i < cfg.n; ++i) {
        auto row = ds.x.row(i);
        for (std::size_t c = 0; c < cfg.d; ++c) row[c] = rng.uniform();
        row[0] = std::min(std::max(row[0], clamp), 1.0 - clamp);

        const double p = propensity_fn(row);
        ds.pi[i] = p;
        const bool treated = rng.bernoulli(p);
        ds.w[i] = treated ? 1 : 0;

        const double mu1 = zeta(row[0]) * zeta(row[1]);
        const double mu0 = gamma * mu1;
        const double sigma = std::sqrt(-std::log(row[0]));
        const double e0 = rng.normal();
        const double e1 = rng.normal();
        (*ds.y0)[i] = mu0 + sigma * e0;
        (*ds.y1)[i] = mu1 + sigma * e1;
        (*ds.tau_true)[i] = mu1 - mu0;
        ds.y[i] = treated ? (*ds.y1)[i] : (*ds.y0)[i];
    }
    return ds;
}

SplitIndices split(const CausalDataset& dataset, const SplitFractions& f,
                   std::uint64_t seed) {
    const std::size_t n = dataset.n();
    if (f.train < 0 || f.calib < 0 || f.phi < 0 || f.train + f.calib + f.phi > 1.0 + 1e-12)
        throw ConfigError("split: fractions must be nonnegative and sum to <= 1");

    const auto size_of = [n](double frac) {
        return static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
    };
    const std::size_t n_train = size_of(f.train);
    const std::size_t n_calib = size_of(f.calib);
    const std::size_t n_phi = size_of(f.phi);
    if (f.train > 0 && n_train == 0) throw ConfigError("split: train subset is empty");
    if (f.calib > 0 && n_calib == 0) throw ConfigError("split: calibration subset is empty");
    if (f.phi > 0 && n_phi == 0) throw ConfigError("split: phi subset is empty");

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    shuffle(idx, rng);

    SplitIndices out;
    out.train_set.assign(idx.begin(), idx.begin() + n_train);
    out.calib_set.assign(idx.begin() + n_train, idx.begin() + n_train + n_calib);
    out.phi_set.assign(idx.begin() + n_train + n_calib,
                       idx.begin() + n_train + n_calib + n_phi);
    std::sort(out.train_set.begin(), out.train_set.end());
    std::sort(out.calib_set.begin(), out.calib_set.end());
    std::sort(out.phi_set.begin(), out.phi_set.end());
    return out;
}

}  // namespace itecp

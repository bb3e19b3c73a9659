#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "itecp/matrix.hpp"

namespace itecp {

// Guard on known propensities: pi must lie in (kPositivityEps, 1 - kPositivityEps).
inline constexpr double kPositivityEps = 1e-6;

// Observational causal dataset. Potential outcomes and the true conditional
// effect are populated by the synthetic generator only; the propensity is
// known by assumption and carried per row.
struct CausalDataset {
    Matrix x;                  // n x d covariates
    std::vector<std::uint8_t> w;  // treatment indicator, 0/1
    std::vector<double> y;     // factual outcome
    std::vector<double> pi;    // known propensity evaluated at each row
    std::optional<std::vector<double>> y0;
    std::optional<std::vector<double>> y1;
    std::optional<std::vector<double>> tau_true;

    std::size_t n() const { return x.rows(); }
    std::size_t d() const { return x.cols(); }
    bool has_potential_outcomes() const { return y0.has_value() && y1.has_value(); }

    // Enforces shape agreement, w in {0,1}, positivity, and exact factual
    // consistency y = w*y1 + (1-w)*y0 wherever potential outcomes exist.
    // Throws DataError naming the first offending row.
    void validate() const;
};

// Disjoint row-index partition: nuisance-fitting, training, calibration.
struct SplitIndices {
    std::vector<std::size_t> phi_set;
    std::vector<std::size_t> train_set;
    std::vector<std::size_t> calib_set;
};

enum class Setup { A, B, CustomGamma };

struct SynthConfig {
    std::size_t n = 2000;
    std::size_t d = 10;
    double gamma = 1.0;  // effect parameter; used directly only for CustomGamma
    std::uint64_t seed = 0;
    Setup setup = Setup::A;
};

// Logistic bump 1 / (1 + exp(-12 (t - 1/2))).
double zeta(double t);

// pi(x) = (1 + I_{x1}(2, 4)) / 4, a function of the first covariate only.
double propensity_fn(std::span<const double> x_row);

// Synthetic benchmark generator: x ~ U([0,1]^d), w | x ~ Bern(pi(x)),
// mu1 = zeta(x1) zeta(x2), mu0 = gamma * mu1, y(w) ~ N(mu_w, -log x1).
// Setup A fixes gamma = 1 (no effect), Setup B gamma = 0 (heterogeneous).
// Deterministic given the seed; x1 is clamped to [1e-12, 1-1e-12].
CausalDataset generate_synthetic(const SynthConfig& cfg);

struct SplitFractions {
    double train = 0.5;
    double calib = 0.25;
    double phi = 0.25;
};

// Random disjoint partition with floor(n * fraction) rows per subset,
// reproducible given the seed. Index lists come back sorted ascending.
// A positive fraction that floors to an empty subset is an error; a zero
// fraction yields an empty list.
SplitIndices split(const CausalDataset& dataset, const SplitFractions& fractions,
                   std::uint64_t seed);

}  // namespace itecp

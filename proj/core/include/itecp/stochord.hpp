#pragma once

#include <optional>
#include <span>
#include <vector>

namespace itecp {

// Empirical CDF: right-continuous step function F(t) = #(samples <= t) / n.
class Ecdf {
  public:
    double operator()(double t) const;
    std::size_t n() const { return sorted_values.size(); }

    std::vector<double> sorted_values;
};

Ecdf make_ecdf(std::span<const double> samples);

// Sorted union of both samples' values; empirical CDFs are steps, so these
// are the only points that matter.
std::vector<double> merged_grid(const Ecdf& f, const Ecdf& g);

struct CheckResult {
    bool holds = false;
    double margin = 0.0;
};

// First-order dominance F over G: F <= G on the whole grid, strictly below
// somewhere. margin reports max(F - G).
CheckResult check_fosd(const Ecdf& f, const Ecdf& g, std::span<const double> grid);

// Second-order dominance: exact step integration of (G - F) over (-inf, x]
// must stay >= -1e-12 at every grid x and exceed 1e-12 somewhere. margin
// reports the minimum integrated gap.
CheckResult check_sosd(const Ecdf& f, const Ecdf& g, std::span<const double> grid);

// Monotone convex dominance via stop-loss transforms: E_F[(X-t)+] >=
// E_G[(X-t)+] at every grid t, strictly somewhere; piecewise-linear exact
// evaluation on the empirical measures. margin reports the minimum gap.
CheckResult check_mcx(const Ecdf& f, const Ecdf& g, std::span<const double> grid);

struct AlphaStar {
    std::optional<double> alpha_star;
    std::optional<double> v_star;
};

// Last sign change of F_pseudo - F_oracle over the merged grid; alpha* is
// F_pseudo at that point. F_pseudo <= F_oracle everywhere gives alpha* = 1;
// everywhere-inverted dominance gives none.
AlphaStar estimate_alpha_star(const Ecdf& f_pseudo, const Ecdf& f_oracle);

struct OrderReport {
    bool fosd_fg = false;  // pseudo dominates oracle
    bool fosd_gf = false;  // oracle dominates pseudo
    double fosd_margin = 0.0;
    bool sosd_fg = false;
    double sosd_min_gap = 0.0;
    bool mcx_fg = false;
    double mcx_min_gap = 0.0;
    std::optional<double> alpha_star;
    std::optional<double> v_star;
};

OrderReport order_report(std::span<const double> pseudo_scores,
                         std::span<const double> oracle_scores);

// Pointwise mean of per-replication ECDFs on a fixed quantile grid of the
// pooled sample.
struct AveragedEcdfPair {
    std::vector<double> grid;
    std::vector<double> f_pseudo;
    std::vector<double> f_oracle;
};

AveragedEcdfPair averaged_ecdf(const std::vector<std::vector<double>>& pseudo_reps,
                               const std::vector<std::vector<double>>& oracle_reps,
                               std::size_t grid_points = 512);

}  // namespace itecp

#include "itecp/stochord.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "itecp/errors.hpp"

namespace itecp {

namespace {
constexpr double kStrictTol = 1e-12;

// Suffix sums over the sorted sample make E[(X-t)+] an O(log n) lookup:
// with i = first index of a value > t, E[(X-t)+] = (suffix[i] - t*(n-i)) / n.
struct StopLoss {
    explicit StopLoss(const Ecdf& e) : values(&e.sorted_values) {
        suffix.assign(values->size() + 1, 0.0);
        for (std::size_t i = values->size(); i-- > 0;)
            suffix[i] = suffix[i + 1] + (*values)[i];
    }
    double operator()(double t) const {
        const auto it = std::upper_bound(values->begin(), values->end(), t);
        const std::size_t i = static_cast<std::size_t>(it - values->begin());
        const std::size_t n = values->size();
        if (i == n) return 0.0;
        return (suffix[i] - t * static_cast<double>(n - i)) / static_cast<double>(n);
    }
    const std::vector<double>* values;
    std::vector<double> suffix;
};
}  // namespace

double Ecdf::operator()(double t) const {
    const auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), t);
    return static_cast<double>(it - sorted_values.begin()) /
           static_cast<double>(sorted_values.size());
}

Ecdf make_ecdf(std::span<const double> samples) {
    if (samples.empty()) throw DataError("ecdf: empty sample");
    for (double v : samples)
        if (!std::isfinite(v)) throw DataError("ecdf: non-finite sample value");
    Ecdf e;
    e.sorted_values.assign(samples.begin(), samples.end());
    std::sort(e.sorted_values.begin(), e.sorted_values.end());
    return e;
}

std::vector<double> merged_grid(const Ecdf& f, const Ecdf& g) {
    std::vector<double> grid;
    grid.reserve(f.n() + g.n());
    std::merge(f.sorted_values.begin(), f.sorted_values.end(), g.sorted_values.begin(),
               g.sorted_values.end(), std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

CheckResult check_fosd(const Ecdf& f, const Ecdf& g, std::span<const double> grid) {
    double max_gap = -std::numeric_limits<double>::infinity();
    bool strict = false;
    for (double t : grid) {
        const double gap = f(t) - g(t);
        max_gap = std::max(max_gap, gap);
        if (gap < 0.0) strict = true;
    }
    return {max_gap <= 0.0 && strict, max_gap};
}

CheckResult check_sosd(const Ecdf& f, const Ecdf& g, std::span<const double> grid) {
    // Integral of (G - F) over (-inf, x]; zero below the first grid point,
    // piecewise linear in between, so grid endpoints carry the extremes.
    double integral = 0.0;
    double min_gap = 0.0;
    bool strict = false;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        integral += (g(grid[i - 1]) - f(grid[i - 1])) * (grid[i] - grid[i - 1]);
        min_gap = std::min(min_gap, integral);
        if (integral > kStrictTol) strict = true;
    }
    return {min_gap >= -kStrictTol && strict, min_gap};
}

CheckResult check_mcx(const Ecdf& f, const Ecdf& g, std::span<const double> grid) {
    const StopLoss sf(f), sg(g);
    double min_gap = std::numeric_limits<double>::infinity();
    bool strict = false;
    for (double t : grid) {
        const double gap = sf(t) - sg(t);
        min_gap = std::min(min_gap, gap);
        if (gap > kStrictTol) strict = true;
    }
    return {min_gap >= -kStrictTol && strict, min_gap};
}

AlphaStar estimate_alpha_star(const Ecdf& f_pseudo, const Ecdf& f_oracle) {
    const auto grid = merged_grid(f_pseudo, f_oracle);
    bool any_above = false, any_below = false;
    for (double t : grid) {
        const double d = f_pseudo(t) - f_oracle(t);
        if (d > 0.0) any_above = true;
        if (d < 0.0) any_below = true;
    }
    AlphaStar out;
    if (!any_above) {
        out.alpha_star = 1.0;  // empirical FOSD of the pseudo scores
        return out;
    }
    if (!any_below) return out;  // inverted dominance everywhere

    int last_sign = 0;
    for (double t : grid) {
        const double d = f_pseudo(t) - f_oracle(t);
        const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
        if (sign == 0) continue;
        if (last_sign != 0 && sign != last_sign) {
            out.v_star = t;
            out.alpha_star = f_pseudo(t);
        }
        last_sign = sign;
    }
    return out;
}

OrderReport order_report(std::span<const double> pseudo_scores,
                         std::span<const double> oracle_scores) {
    const Ecdf f = make_ecdf(pseudo_scores);
    const Ecdf g = make_ecdf(oracle_scores);
    const auto grid = merged_grid(f, g);

    OrderReport rep;
    const auto fosd = check_fosd(f, g, grid);
    rep.fosd_fg = fosd.holds;
    rep.fosd_margin = fosd.margin;
    rep.fosd_gf = check_fosd(g, f, grid).holds;
    const auto sosd = check_sosd(f, g, grid);
    rep.sosd_fg = sosd.holds;
    rep.sosd_min_gap = sosd.margin;
    const auto mcx = check_mcx(f, g, grid);
    rep.mcx_fg = mcx.holds;
    rep.mcx_min_gap = mcx.margin;
    const auto as = estimate_alpha_star(f, g);
    rep.alpha_star = as.alpha_star;
    rep.v_star = as.v_star;
    return rep;
}

AveragedEcdfPair averaged_ecdf(const std::vector<std::vector<double>>& pseudo_reps,
                               const std::vector<std::vector<double>>& oracle_reps,
                               std::size_t grid_points) {
    if (pseudo_reps.empty() || pseudo_reps.size() != oracle_reps.size())
        throw DataError("averaged_ecdf: replication lists empty or mismatched");

    std::vector<double> pooled;
    for (const auto& v : pseudo_reps) pooled.insert(pooled.end(), v.begin(), v.end());
    for (const auto& v : oracle_reps) pooled.insert(pooled.end(), v.begin(), v.end());
    if (pooled.empty()) throw DataError("averaged_ecdf: no scores");
    std::sort(pooled.begin(), pooled.end());

    AveragedEcdfPair out;
    out.grid.resize(grid_points);
    const std::size_t n = pooled.size();
    for (std::size_t j = 0; j < grid_points; ++j) {
        // Type-1 quantile at level (j+1)/grid_points.
        std::size_t k = ((j + 1) * n + grid_points - 1) / grid_points;
        if (k < 1) k = 1;
        if (k > n) k = n;
        out.grid[j] = pooled[k - 1];
    }

    out.f_pseudo.assign(grid_points, 0.0);
    out.f_oracle.assign(grid_points, 0.0);
    const double r = static_cast<double>(pseudo_reps.size());
    for (std::size_t rep = 0; rep < pseudo_reps.size(); ++rep) {
        const Ecdf fp = make_ecdf(pseudo_reps[rep]);
        const Ecdf fo = make_ecdf(oracle_reps[rep]);
        for (std::size_t j = 0; j < grid_points; ++j) {
            out.f_pseudo[j] += fp(out.grid[j]) / r;
            out.f_oracle[j] += fo(out.grid[j]) / r;
        }
    }
    return out;
}

}  // namespace itecp

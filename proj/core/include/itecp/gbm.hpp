#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "itecp/matrix.hpp"

namespace itecp {

enum class Loss { SquaredError, Pinball };

struct GbmConfig {
    int n_trees = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    Loss loss = Loss::SquaredError;
    double pinball_q = 0.5;  // only read for Loss::Pinball; must lie in (0,1)
    std::uint64_t seed = 0;

    void validate() const;
    GbmConfig with_loss(Loss l, double q = 0.5) const {
        GbmConfig c = *this;
        c.loss = l;
        c.pinball_q = q;
        return c;
    }
};

// Binary regression tree stored as a flat node array; nodes[0] is the root.
struct Tree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<Node> nodes;

    double predict_row(std::span<const double> x) const {
        int id = 0;
        while (nodes[id].feature >= 0)
            id = x[static_cast<std::size_t>(nodes[id].feature)] <= nodes[id].threshold
                     ? nodes[id].left
                     : nodes[id].right;
        return nodes[id].value;
    }
};

// Gradient-boosted ensemble: prediction = base + learning_rate * sum of trees.
class GbmModel {
  public:
    double predict_row(std::span<const double> x) const {
        double acc = base_prediction;
        for (const auto& t : trees) acc += learning_rate * t.predict_row(x);
        return acc;
    }
    std::vector<double> predict(const Matrix& x) const;

    std::vector<Tree> trees;
    double base_prediction = 0.0;
    double learning_rate = 0.1;
    Loss loss = Loss::SquaredError;
    double pinball_q = 0.5;
    std::size_t n_features = 0;
    // Training-set loss after the base stage and after each tree.
    std::vector<double> stage_losses;
};

// Stagewise boosting. Squared error fits trees to residuals; pinball fits the
// negative-gradient sign pattern q - 1{target <= pred} and relabels each leaf
// with the leaf-local q-quantile of residuals. Split search is exhaustive over
// midpoints of sorted distinct feature values; gain ties break toward the
// lowest feature index, then the lowest threshold.
GbmModel fit(const Matrix& x, std::span<const double> targets, const GbmConfig& cfg);

// Lower/upper pinball models with crossing repair: whenever lo > hi at an
// evaluation point, both collapse to their midpoint.
struct QuantilePair {
    GbmModel lo;
    GbmModel hi;

    std::pair<double, double> predict_row(std::span<const double> x) const {
        double l = lo.predict_row(x);
        double h = hi.predict_row(x);
        if (l > h) l = h = 0.5 * (l + h);
        return {l, h};
    }
    std::pair<std::vector<double>, std::vector<double>> predict(const Matrix& x) const;
};

QuantilePair fit_quantile_pair(const Matrix& x, std::span<const double> targets,
                               double q_lo, double q_hi, const GbmConfig& cfg);

// Versioned structured-text serialization (see README for the format).
std::string dump_model(const GbmModel& model);
GbmModel parse_model(const std::string& text);
void dump_model_file(const GbmModel& model, const std::string& path);
GbmModel load_model_file(const std::string& path);

// Order statistic used for pinball leaves and base predictions: the
// ceil(q*n)-th smallest element (a minimizer of the empirical pinball loss).
double empirical_quantile(std::vector<double> values, double q);

}  // namespace itecp

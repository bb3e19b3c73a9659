#include "itecp/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "itecp/errors.hpp"

namespace itecp {

void GbmConfig::validate() const {
    if (n_trees < 0) throw ConfigError("gbm: n_trees must be >= 0");
    if (max_depth < 1) throw ConfigError("gbm: max_depth must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw ConfigError("gbm: learning_rate must lie in (0,1]");
    if (min_samples_leaf < 1) throw ConfigError("gbm: min_samples_leaf must be >= 1");
    if (loss == Loss::Pinball && !(pinball_q > 0.0 && pinball_q < 1.0))
        throw ConfigError("gbm: pinball_q must lie strictly inside (0,1)");
}

double empirical_quantile(std::vector<double> values, double q) {
    const std::size_t n = values.size();
    if (n == 0) throw DataError("empirical_quantile: empty sample");
    double pos = std::ceil(q * static_cast<double>(n) - 1e-9);
    std::size_t k = pos <= 1.0 ? 1 : static_cast<std::size_t>(pos);
    if (k > n) k = n;
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[k - 1];
}

namespace {

struct SplitChoice {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

constexpr double kMinGain = 1e-12;

// One boosting tree grown breadth-first on gradient targets g, with leaf
// values supplied afterwards from residuals.
class TreeGrower {
  public:
    TreeGrower(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted_idx,
               const GbmConfig& cfg)
        : x_(x), sorted_idx_(sorted_idx), cfg_(cfg) {}

    Tree grow(std::span<const double> g, std::span<const double> residuals,
              std::vector<int>& node_of) {
        const std::size_t n = x_.rows();
        Tree tree;
        tree.nodes.emplace_back();
        std::fill(node_of.begin(), node_of.end(), 0);

        std::vector<int> level = {0};
        std::vector<double> node_sum;
        std::vector<std::size_t> node_cnt;

        for (int depth = 0; depth < cfg_.max_depth && !level.empty(); ++depth) {
            const int width = static_cast<int>(tree.nodes.size());
            node_sum.assign(width, 0.0);
            node_cnt.assign(width, 0);
            for (std::size_t i = 0; i < n; ++i) {
                node_sum[node_of[i]] += g[i];
                node_cnt[node_of[i]]++;
            }

            std::vector<SplitChoice> best(width);
            scan_splits(g, node_of, level, node_sum, node_cnt, best);

            std::vector<int> next_level;
            for (int id : level) {
                const auto& b = best[id];
                if (b.feature < 0) continue;
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                auto& nd = tree.nodes[id];
                nd.feature = b.feature;
                nd.threshold = b.threshold;
                nd.left = left;
                nd.right = left + 1;
                next_level.push_back(left);
                next_level.push_back(left + 1);
            }
            if (next_level.empty()) break;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& nd = tree.nodes[node_of[i]];
                if (nd.feature >= 0)
                    node_of[i] = x_.at(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
            }
            level = std::move(next_level);
        }

        label_leaves(tree, residuals, node_of);
        return tree;
    }

  private:
    void scan_splits(std::span<const double> g, const std::vector<int>& node_of,
                     const std::vector<int>& level, const std::vector<double>& node_sum,
                     const std::vector<std::size_t>& node_cnt,
                     std::vector<SplitChoice>& best) {
        const std::size_t msl = static_cast<std::size_t>(cfg_.min_samples_leaf);
        const int width = static_cast<int>(best.size());
        std::vector<char> active(width, 0);
        for (int id : level)
            if (node_cnt[id] >= 2 * msl) active[id] = 1;

        // Per-node running prefix state while walking one feature in sorted order.
        std::vector<double> run_sum(width);
        std::vector<std::size_t> run_cnt(width);
        std::vector<double> prev_val(width);

        for (std::size_t f = 0; f < x_.cols(); ++f) {
            std::fill(run_sum.begin(), run_sum.end(), 0.0);
            std::fill(run_cnt.begin(), run_cnt.end(), 0);
            std::fill(prev_val.begin(), prev_val.end(),
                      std::numeric_limits<double>::quiet_NaN());
            for (std::size_t i : sorted_idx_[f]) {
                const int id = node_of[i];
                if (!active[id]) continue;
                const double v = x_.at(i, f);
                if (run_cnt[id] > 0 && v != prev_val[id] && run_cnt[id] >= msl &&
                    node_cnt[id] - run_cnt[id] >= msl) {
                    const double s_l = run_sum[id];
                    const double s = node_sum[id];
                    const double n_l = static_cast<double>(run_cnt[id]);
                    const double n_all = static_cast<double>(node_cnt[id]);
                    const double gain = s_l * s_l / n_l +
                                        (s - s_l) * (s - s_l) / (n_all - n_l) -
                                        s * s / n_all;
                    if (gain > best[id].gain && gain > kMinGain) {
                        best[id].gain = gain;
                        best[id].feature = static_cast<int>(f);
                        best[id].threshold = 0.5 * (prev_val[id] + v);
                    }
                }
                run_sum[id] += g[i];
                run_cnt[id]++;
                prev_val[id] = v;
            }
        }
    }

    void label_leaves(Tree& tree, std::span<const double> residuals,
                      const std::vector<int>& node_of) {
        const int width = static_cast<int>(tree.nodes.size());
        if (cfg_.loss == Loss::SquaredError) {
            std::vector<double> sum(width, 0.0);
            std::vector<std::size_t> cnt(width, 0);
            for (std::size_t i = 0; i < node_of.size(); ++i) {
                sum[node_of[i]] += residuals[i];
                cnt[node_of[i]]++;
            }
            for (int id = 0; id < width; ++id)
                if (tree.nodes[id].feature < 0 && cnt[id] > 0)
                    tree.nodes[id].value = sum[id] / static_cast<double>(cnt[id]);
        } else {
            std::vector<std::vector<double>> bucket(width);
            for (std::size_t i = 0; i < node_of.size(); ++i)
                bucket[node_of[i]].push_back(residuals[i]);
            for (int id = 0; id < width; ++id)
                if (tree.nodes[id].feature < 0 && !bucket[id].empty())
                    tree.nodes[id].value = empirical_quantile(std::move(bucket[id]),
                                                              cfg_.pinball_q);
        }
    }

    const Matrix& x_;
    const std::vector<std::vector<std::size_t>>& sorted_idx_;
    const GbmConfig& cfg_;
};

double training_loss(const GbmConfig& cfg, std::span<const double> y,
                     std::span<const double> pred) {
    double acc = 0.0;
    if (cfg.loss == Loss::SquaredError) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = y[i] - pred[i];
            acc += r * r;
        }
    } else {
        const double q = cfg.pinball_q;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = y[i] - pred[i];
            acc += r >= 0.0 ? q * r : (q - 1.0) * r;
        }
    }
    return acc / static_cast<double>(y.size());
}

}  // namespace

std::vector<double> GbmModel::predict(const Matrix& x) const {
    if (x.cols() != n_features)
        throw DataError("gbm: predict called with " + std::to_string(x.cols()) +
                        " features, model trained on " + std::to_string(n_features));
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_row(x.row(i));
    return out;
}

GbmModel fit(const Matrix& x, std::span<const double> targets, const GbmConfig& cfg) {
    cfg.validate();
    const std::size_t n = x.rows();
    if (n == 0 || targets.empty()) throw DataError("gbm: empty training data");
    if (targets.size() != n) throw DataError("gbm: target length mismatch");
    for (double t : targets)
        if (!std::isfinite(t)) throw DataError("gbm: non-finite target");

    GbmModel model;
    model.learning_rate = cfg.learning_rate;
    model.loss = cfg.loss;
    model.pinball_q = cfg.pinball_q;
    model.n_features = x.cols();

    if (cfg.loss == Loss::SquaredError) {
        double s = 0.0;
        for (double t : targets) s += t;
        model.base_prediction = s / static_cast<double>(n);
    } else {
        model.base_prediction =
            empirical_quantile({targets.begin(), targets.end()}, cfg.pinball_q);
    }

    std::vector<double> pred(n, model.base_prediction);
    model.stage_losses.push_back(training_loss(cfg, targets, pred));
    if (cfg.n_trees == 0) return model;

    // Presort once per fit: row indices ascending by feature value, ties by index.
    std::vector<std::vector<std::size_t>> sorted_idx(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& idx = sorted_idx[f];
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double va = x.at(a, f), vb = x.at(b, f);
            return va < vb || (va == vb && a < b);
        });
    }

    TreeGrower grower(x, sorted_idx, cfg);
    std::vector<double> grad(n), resid(n);
    std::vector<int> node_of(n);
    model.trees.reserve(cfg.n_trees);
    for (int t = 0; t < cfg.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            resid[i] = targets[i] - pred[i];
            grad[i] = cfg.loss == Loss::SquaredError
                          ? resid[i]
                          : (targets[i] <= pred[i] ? cfg.pinball_q - 1.0 : cfg.pinball_q);
        }
        Tree tree = grower.grow(grad, resid, node_of);
        for (std::size_t i = 0; i < n; ++i)
            pred[i] += cfg.learning_rate * tree.nodes[node_of[i]].value;
        model.trees.push_back(std::move(tree));
        model.stage_losses.push_back(training_loss(cfg, targets, pred));
    }
    return model;
}

std::pair<std::vector<double>, std::vector<double>> QuantilePair::predict(
    const Matrix& x) const {
    auto l = lo.predict(x);
    auto h = hi.predict(x);
    for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i] > h[i]) l[i] = h[i] = 0.5 * (l[i] + h[i]);
    return {std::move(l), std::move(h)};
}

QuantilePair fit_quantile_pair(const Matrix& x, std::span<const double> targets,
                               double q_lo, double q_hi, const GbmConfig& cfg) {
    if (!(0.0 < q_lo && q_lo < q_hi && q_hi < 1.0))
        throw ConfigError("fit_quantile_pair: need 0 < q_lo < q_hi < 1");
    QuantilePair pair;
    pair.lo = fit(x, targets, cfg.with_loss(Loss::Pinball, q_lo));
    pair.hi = fit(x, targets, cfg.with_loss(Loss::Pinball, q_hi));
    return pair;
}

namespace {
constexpr const char* kDumpMagic = "itecp-gbm";
constexpr int kDumpVersion = 1;

void format_double(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}
}  // namespace

std::string dump_model(const GbmModel& model) {
    std::ostringstream os;
    os << kDumpMagic << " " << kDumpVersion << "\n";
    os << "loss " << (model.loss == Loss::SquaredError ? "squared" : "pinball");
    if (model.loss == Loss::Pinball) {
        os << " ";
        format_double(os, model.pinball_q);
    }
    os << "\n";
    os << "learning_rate ";
    format_double(os, model.learning_rate);
    os << "\nbase ";
    format_double(os, model.base_prediction);
    os << "\nfeatures " << model.n_features << "\n";
    os << "trees " << model.trees.size() << "\n";
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        os << "tree " << t << " " << tree.nodes.size() << "\n";
        for (const auto& nd : tree.nodes) {
            os << nd.feature << " ";
            format_double(os, nd.threshold);
            os << " " << nd.left << " " << nd.right << " ";
            format_double(os, nd.value);
            os << "\n";
        }
    }
    os << "end\n";
    return os.str();
}

GbmModel parse_model(const std::string& text) {
    std::istringstream is(text);
    std::string word;
    int version = 0;
    is >> word >> version;
    if (word != kDumpMagic || version != kDumpVersion)
        throw DataError("gbm dump: unsupported header '" + word + " " +
                        std::to_string(version) + "'");

    GbmModel model;
    is >> word;
    if (word != "loss") throw DataError("gbm dump: expected 'loss'");
    is >> word;
    if (word == "squared") {
        model.loss = Loss::SquaredError;
    } else if (word == "pinball") {
        model.loss = Loss::Pinball;
        is >> model.pinball_q;
    } else {
        throw DataError("gbm dump: unknown loss '" + word + "'");
    }
    is >> word >> model.learning_rate;
    if (word != "learning_rate") throw DataError("gbm dump: expected 'learning_rate'");
    is >> word >> model.base_prediction;
    if (word != "base") throw DataError("gbm dump: expected 'base'");
    is >> word >> model.n_features;
    if (word != "features") throw DataError("gbm dump: expected 'features'");
    std::size_t n_trees = 0;
    is >> word >> n_trees;
    if (word != "trees") throw DataError("gbm dump: expected 'trees'");
    model.trees.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::size_t tid = 0, n_nodes = 0;
        is >> word >> tid >> n_nodes;
        if (word != "tree" || tid != t) throw DataError("gbm dump: malformed tree header");
        auto& tree = model.trees[t];
        tree.nodes.resize(n_nodes);
        for (auto& nd : tree.nodes)
            is >> nd.feature >> nd.threshold >> nd.left >> nd.right >> nd.value;
    }
    is >> word;
    if (!is || word != "end") throw DataError("gbm dump: truncated file");
    return model;
}

void dump_model_file(const GbmModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("gbm dump: cannot write '" + path + "'");
    out << dump_model(model);
}

GbmModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("gbm dump: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

}  // namespace itecp

#include "edgebench/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "edgebench/common.hpp"
#include "edgebench/parallel.hpp"

namespace edgebench {

int ForestParams::resolved_max_features(std::size_t n_features) const {
    if (max_features > 0) {
        return max_features;
    }
    return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features)))));
}

void ForestParams::validate(std::size_t n_features) const {
    if (n_trees < 1) {
        throw ConfigError("ForestParams.n_trees must be >= 1");
    }
    const int k = resolved_max_features(n_features);
    if (k < 1 || static_cast<std::size_t>(k) > n_features) {
        throw ConfigError("ForestParams.max_features must be in [1, " + std::to_string(n_features) + "]");
    }
    if (max_depth == 0) {
        throw ConfigError("ForestParams.max_depth must be positive (or negative for unlimited)");
    }
    if (min_samples_leaf < 1) {
        throw ConfigError("ForestParams.min_samples_leaf must be >= 1");
    }
    if (min_samples_split < 2) {
        throw ConfigError("ForestParams.min_samples_split must be >= 2");
    }
}

double RegressionTree::predict(std::span<const double> x) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(idx)].value;
}

std::size_t RegressionTree::split_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature >= 0; }));
}

namespace {

/// Mean computed incrementally so a constant input reproduces itself exactly, clamped to the input range.
double bounded_mean(std::span<const std::size_t> idx, const Vector& y) {
    double m = 0.0;
    double lo = y(static_cast<Eigen::Index>(idx[0]));
    double hi = lo;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double v = y(static_cast<Eigen::Index>(idx[k]));
        m += (v - m) / static_cast<double>(k + 1);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::clamp(m, lo, hi);
}

double sum_squared_deviation(std::span<const std::size_t> idx, const Vector& y, double mean) {
    double s = 0.0;
    for (const std::size_t i : idx) {
        const double d = y(static_cast<Eigen::Index>(i)) - mean;
        s += d * d;
    }
    return s;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
    double child_sse = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const Vector& y, const ForestParams& params, int max_features, std::mt19937_64& rng)
        : x_(x), y_(y), params_(params), max_features_(max_features), rng_(rng),
          features_(static_cast<std::size_t>(x.cols())) {
        std::iota(features_.begin(), features_.end(), 0);
    }

    RegressionTree build(std::vector<std::size_t> samples, std::vector<double>& importance) {
        RegressionTree tree;
        struct Pending {
            int node;
            std::vector<std::size_t> samples;
            int depth;
        };
        std::vector<Pending> stack;
        tree.nodes.push_back(make_node(samples));
        stack.push_back({0, std::move(samples), 0});
        const double root_n = static_cast<double>(tree.nodes[0].n_samples);

        while (!stack.empty()) {
            Pending cur = std::move(stack.back());
            stack.pop_back();
            const TreeNode node = tree.nodes[static_cast<std::size_t>(cur.node)];
            const bool depth_ok = params_.max_depth < 0 || cur.depth < params_.max_depth;
            if (!depth_ok || node.n_samples < static_cast<std::size_t>(params_.min_samples_split) || node.sse <= 0.0) {
                continue;
            }
            const SplitChoice split = best_split(cur.samples);
            if (split.feature < 0) {
                continue;
            }
            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (const std::size_t i : cur.samples) {
                (x_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left : right).push_back(i);
            }
            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(make_node(left));
            const int ri = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(make_node(right));
            TreeNode& parent = tree.nodes[static_cast<std::size_t>(cur.node)];
            parent.feature = split.feature;
            parent.threshold = split.threshold;
            parent.left = li;
            parent.right = ri;
            const double decrease =
                parent.sse - tree.nodes[static_cast<std::size_t>(li)].sse - tree.nodes[static_cast<std::size_t>(ri)].sse;
            importance[static_cast<std::size_t>(split.feature)] += std::max(decrease, 0.0) / root_n;
            stack.push_back({ri, std::move(right), cur.depth + 1});
            stack.push_back({li, std::move(left), cur.depth + 1});
        }
        return tree;
    }

private:
    TreeNode make_node(std::span<const std::size_t> samples) const {
        TreeNode n;
        n.n_samples = samples.size();
        n.value = bounded_mean(samples, y_);
        n.sse = sum_squared_deviation(samples, y_, n.value);
        return n;
    }

    SplitChoice best_split(const std::vector<std::size_t>& samples) {
        SplitChoice best;
        double best_sse = std::numeric_limits<double>::infinity();
        const std::size_t n = samples.size();
        const auto leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        std::vector<std::pair<double, std::size_t>> order(n);

        int visited = 0;
        for (std::size_t k = 0; k < features_.size() && visited < max_features_; ++k) {
            // Incremental Fisher-Yates: features_[k] is a uniform draw from those not yet visited.
            std::uniform_int_distribution<std::size_t> pick(k, features_.size() - 1);
            std::swap(features_[k], features_[pick(rng_)]);
            const int f = features_[k];

            for (std::size_t t = 0; t < n; ++t) {
                order[t] = {x_(static_cast<Eigen::Index>(samples[t]), f), samples[t]};
            }
            std::sort(order.begin(), order.end());
            if (order.front().first == order.back().first) {
                continue;  // constant here; does not count towards max_features
            }
            ++visited;

            double total = 0.0;
            double total_sq = 0.0;
            for (const auto& [v, i] : order) {
                const double t = y_(static_cast<Eigen::Index>(i));
                total += t;
                total_sq += t * t;
            }
            double left_sum = 0.0;
            double left_sq = 0.0;
            for (std::size_t cut = 1; cut < n; ++cut) {
                const double t = y_(static_cast<Eigen::Index>(order[cut - 1].second));
                left_sum += t;
                left_sq += t * t;
                if (order[cut - 1].first == order[cut].first || cut < leaf || n - cut < leaf) {
                    continue;
                }
                const double nl = static_cast<double>(cut);
                const double nr = static_cast<double>(n - cut);
                const double right_sum = total - left_sum;
                const double sse = (left_sq - left_sum * left_sum / nl) + ((total_sq - left_sq) - right_sum * right_sum / nr);
                if (sse < best_sse) {
                    best_sse = sse;
                    best.feature = f;
                    best.threshold = 0.5 * (order[cut - 1].first + order[cut].first);
                    best.left_count = cut;
                    best.child_sse = sse;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const Vector& y_;
    const ForestParams& params_;
    int max_features_;
    std::mt19937_64& rng_;
    std::vector<int> features_;
};

}  // namespace

Forest rf_fit(const Matrix& x_in, const Vector& y_in, const ForestParams& params, int workers) {
    const auto n = x_in.rows();
    if (n == 0 || y_in.size() != n) {
        throw ConfigError("rf_fit: X and y must be nonempty with matching rows");
    }
    if (!x_in.allFinite() || !y_in.allFinite()) {
        throw ConfigError("rf_fit: non-finite input");
    }
    const auto d = static_cast<std::size_t>(x_in.cols());
    params.validate(d);
    if (n < params.min_samples_split) {
        warn("rf_fit: fewer rows than min_samples_split; every tree is a single leaf");
    }

    // Canonical row order: lexicographic on (features, target).
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index c = 0; c < x_in.cols(); ++c) {
            if (x_in(a, c) != x_in(b, c)) {
                return x_in(a, c) < x_in(b, c);
            }
        }
        return y_in(a) < y_in(b);
    });
    Matrix x(n, x_in.cols());
    Vector y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        x.row(r) = x_in.row(perm[static_cast<std::size_t>(r)]);
        y(r) = y_in(perm[static_cast<std::size_t>(r)]);
    }

    Forest forest;
    forest.n_features = d;
    forest.params = params;
    forest.params.max_features = params.resolved_max_features(d);
    forest.trees.resize(static_cast<std::size_t>(params.n_trees));
    forest.impurity_decrease.assign(static_cast<std::size_t>(params.n_trees), std::vector<double>(d, 0.0));

    parallel_for(forest.trees.size(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            std::mt19937_64 rng(mix_seed(params.seed, t));
            std::vector<std::size_t> samples(static_cast<std::size_t>(n));
            if (params.bootstrap) {
                std::uniform_int_distribution<std::size_t> draw(0, static_cast<std::size_t>(n) - 1);
                for (auto& s : samples) {
                    s = draw(rng);
                }
                std::sort(samples.begin(), samples.end());
            } else {
                std::iota(samples.begin(), samples.end(), std::size_t{0});
            }
            TreeBuilder builder(x, y, forest.params, forest.params.max_features, rng);
            forest.trees[t] = builder.build(std::move(samples), forest.impurity_decrease[t]);
        }
    });
    return forest;
}

double rf_predict(const Forest& forest, std::span<const double> x) {
    if (x.size() != forest.n_features) {
        throw ConfigError("rf_predict: expected " + std::to_string(forest.n_features) + " features, got " +
                          std::to_string(x.size()));
    }
    if (forest.trees.empty()) {
        throw ConfigError("rf_predict: empty forest");
    }
    double m = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const double v = forest.trees[t].predict(x);
        m += (v - m) / static_cast<double>(t + 1);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::clamp(m, lo, hi);
}

Vector rf_predict(const Forest& forest, const Matrix& x) {
    Vector out(x.rows());
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            row[static_cast<std::size_t>(c)] = x(r, c);
        }
        out(r) = rf_predict(forest, row);
    }
    return out;
}

FeatureImportance feature_importance(const Forest& forest) {
    FeatureImportance out;
    out.weights.assign(forest.n_features, 0.0);
    for (const auto& per_tree : forest.impurity_decrease) {
        for (std::size_t f = 0; f < forest.n_features; ++f) {
            out.weights[f] += per_tree[f];
        }
    }
    const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    if (!(total > 0.0)) {
        out.weights.assign(forest.n_features, 0.0);
        out.no_splits = true;
        warn("feature_importance: forest has no impurity-reducing splits");
        return out;
    }
    // Averaging over trees cancels in the normalization.
    for (double& w : out.weights) {
        w /= total;
    }
    return out;
}

}  // namespace edgebench

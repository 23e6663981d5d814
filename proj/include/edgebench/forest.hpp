#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgebench/regression.hpp"

namespace edgebench {

/// Defaults are the tuned values for the 14-column energy table.
struct ForestParams {
    int n_trees = 800;
    int max_features = 0;  ///< features drawn per split; 0 means floor(sqrt(n_features))
    int max_depth = 90;    ///< < 0 means unlimited
    bool bootstrap = true;
    int min_samples_leaf = 4;
    int min_samples_split = 10;
    std::uint64_t seed = 0;

    int resolved_max_features(std::size_t n_features) const;
    void validate(std::size_t n_features) const;
    bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
    int feature = -1;  ///< -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  ///< mean target of the node's samples
    std::size_t n_samples = 0;
    double sse = 0.0;  ///< sum of squared deviations from `value`
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    double predict(std::span<const double> x) const;
    std::size_t split_count() const;
};

struct Forest {
    std::size_t n_features = 0;
    ForestParams params;
    std::vector<RegressionTree> trees;
    /// Per tree, per feature: sum over its splits of the weighted MSE decrease.
    std::vector<std::vector<double>> impurity_decrease;
};

/**
 * Bagged CART regression trees. Rows are first sorted into a canonical order,
 * so the fitted forest does not depend on the input row order. Tree t draws
 * its bootstrap sample and feature subsets from a stream seeded by
 * (params.seed, t); trees may be grown on `workers` threads with identical
 * results.
 *
 * At each node, features are visited in a random order until max_features
 * non-constant ones have been evaluated; the split minimizing the summed
 * child squared error wins. Nodes stop at max_depth, below
 * min_samples_split, when pure, or when no split leaves min_samples_leaf on
 * both sides.
 */
Forest rf_fit(const Matrix& x, const Vector& y, const ForestParams& params = {}, int workers = 1);

/// Mean of the per-tree leaf values. Throws ConfigError on width mismatch.
double rf_predict(const Forest& forest, std::span<const double> x);
Vector rf_predict(const Forest& forest, const Matrix& x);

struct FeatureImportance {
    std::vector<double> weights;  ///< nonnegative, sums to 1 unless no_splits
    bool no_splits = false;
};

/// Mean decrease in impurity, averaged over trees and normalized to sum to 1.
FeatureImportance feature_importance(const Forest& forest);

}  // namespace edgebench

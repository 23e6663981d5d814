#pragma once

#include <cstdint>
#include <vector>

#include "edgebench/predictor.hpp"

namespace edgebench {

/// Shuffled contiguous folds; sizes differ by at most one. Throws ConfigError unless 2 <= k <= n.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed);

struct CvResult {
    std::vector<double> fold_r_squared;  ///< NaN for folds with constant truth or a single row
    std::vector<double> fold_rmse;
    double mean_r_squared = 0.0;  ///< over defined folds; NaN if none
    double std_r_squared = 0.0;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
    /// R^2 of all out-of-fold predictions against y; defined even for leave-one-out.
    double pooled_r_squared = 0.0;
    Vector out_of_fold;
};

CvResult kfold_cv(const Matrix& x, const Vector& y, int k, const ModelSpec& spec, std::uint64_t seed);

/// Candidate values per forest hyper-parameter; every list must be nonempty.
struct ForestGrid {
    std::vector<int> n_trees{800};
    std::vector<int> max_features{0};
    std::vector<int> max_depth{90};
    std::vector<bool> bootstrap{true};
    std::vector<int> min_samples_leaf{4};
    std::vector<int> min_samples_split{10};

    std::size_t size() const;
    /// Mixed-radix decode; the last field varies fastest.
    ForestParams at(std::size_t index, std::uint64_t seed) const;
};

/// Wider grid for re-tuning on a new measurement table; includes the defaults.
ForestGrid tuning_grid();

struct SearchResult {
    ForestParams best;
    double best_score = 0.0;
    std::vector<ForestParams> tried;  ///< in sampling order
    std::vector<double> scores;
};

/**
 * Sample min(n_iter, grid size) distinct grid points uniformly, score each by
 * kfold_cv mean R^2 and return the first best. Scoring folds share `seed`,
 * so candidates see the same splits.
 */
SearchResult random_search(const Matrix& x, const Vector& y, const ForestGrid& grid, int n_iter, int cv_k,
                           std::uint64_t seed, int workers = 1);

}  // namespace edgebench

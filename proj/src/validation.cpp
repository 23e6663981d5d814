#include "edgebench/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "edgebench/common.hpp"
#include "edgebench/metrics.hpp"

namespace edgebench {

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) {
        throw ConfigError("kfold: k must be >= 2");
    }
    if (static_cast<std::size_t>(k) > n) {
        throw ConfigError("kfold: k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " rows");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0x6b666f6c64ULL));
    std::shuffle(order.begin(), order.end(), rng);

    const auto kk = static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> folds(kk);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < kk; ++f) {
        const std::size_t len = n / kk + (f < n % kk ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return folds;
}

namespace {

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

Vector take(const Vector& y, const std::vector<std::size_t>& rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    std::vector<double> defined;
    for (const double x : v) {
        if (std::isfinite(x)) {
            defined.push_back(x);
        }
    }
    if (defined.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan};
    }
    const double mean = std::accumulate(defined.begin(), defined.end(), 0.0) / static_cast<double>(defined.size());
    double ss = 0.0;
    for (const double x : defined) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(defined.size()))};
}

std::span<const double> as_span(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

CvResult kfold_cv(const Matrix& x, const Vector& y, int k, const ModelSpec& spec, std::uint64_t seed) {
    if (x.rows() != y.size()) {
        throw ConfigError("kfold_cv: X and y row counts differ");
    }
    const auto n = static_cast<std::size_t>(x.rows());
    const auto folds = kfold_indices(n, k, seed);

    CvResult res;
    res.out_of_fold = Vector::Zero(x.rows());
    for (const auto& test : folds) {
        std::vector<char> held(n, 0);
        for (const std::size_t i : test) {
            held[i] = 1;
        }
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < n; ++i) {
            if (!held[i]) {
                train.push_back(i);
            }
        }
        const Regressor model = fit_regressor(take_rows(x, train), take(y, train), spec);
        const Vector pred = predict_all(model, take_rows(x, test));
        const Vector truth = take(y, test);
        for (std::size_t i = 0; i < test.size(); ++i) {
            res.out_of_fold(static_cast<Eigen::Index>(test[i])) = pred(static_cast<Eigen::Index>(i));
        }
        const Metrics m = compute_metrics(as_span(pred), as_span(truth));
        res.fold_r_squared.push_back(m.r_squared);
        res.fold_rmse.push_back(m.rmse);
    }
    std::tie(res.mean_r_squared, res.std_r_squared) = mean_std(res.fold_r_squared);
    std::tie(res.mean_rmse, res.std_rmse) = mean_std(res.fold_rmse);
    res.pooled_r_squared = compute_metrics(as_span(res.out_of_fold), as_span(y)).r_squared;
    return res;
}

ForestGrid tuning_grid() {
    ForestGrid g;
    g.n_trees = {100, 400, 800};
    g.max_features = {0, 7, 14};
    g.max_depth = {10, 90, -1};
    g.bootstrap = {true, false};
    g.min_samples_leaf = {1, 2, 4};
    g.min_samples_split = {2, 5, 10};
    return g;
}

std::size_t ForestGrid::size() const {
    return n_trees.size() * max_features.size() * max_depth.size() * bootstrap.size() * min_samples_leaf.size() *
           min_samples_split.size();
}

ForestParams ForestGrid::at(std::size_t index, std::uint64_t seed) const {
    ForestParams p;
    p.seed = seed;
    auto pick = [&index](const auto& values) {
        const auto v = values[index % values.size()];
        index /= values.size();
        return v;
    };
    p.min_samples_split = pick(min_samples_split);
    p.min_samples_leaf = pick(min_samples_leaf);
    p.bootstrap = pick(bootstrap);
    p.max_depth = pick(max_depth);
    p.max_features = pick(max_features);
    p.n_trees = pick(n_trees);
    return p;
}

SearchResult random_search(const Matrix& x, const Vector& y, const ForestGrid& grid, int n_iter, int cv_k,
                           std::uint64_t seed, int workers) {
    if (n_iter <= 0) {
        throw ConfigError("random_search: n_iter must be positive");
    }
    const std::size_t total = grid.size();
    if (total == 0) {
        throw ConfigError("random_search: every grid list must be nonempty");
    }
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0x736561726368ULL));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(std::min(total, static_cast<std::size_t>(n_iter)));

    SearchResult res;
    res.best_score = -std::numeric_limits<double>::infinity();
    for (const std::size_t idx : order) {
        ModelSpec spec;
        spec.kind = RegressorKind::rf;
        spec.forest = grid.at(idx, seed);
        spec.workers = workers;
        const double score = kfold_cv(x, y, cv_k, spec, seed).mean_r_squared;
        res.tried.push_back(spec.forest);
        res.scores.push_back(score);
        const bool better = std::isfinite(score) && (!std::isfinite(res.best_score) || score > res.best_score);
        if (res.tried.size() == 1 || better) {
            res.best = spec.forest;
            res.best_score = score;
        }
    }
    return res;
}

}  // namespace edgebench

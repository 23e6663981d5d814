#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "edgebench/datasets.hpp"
#include "edgebench/sparse.hpp"

namespace edgebench {

/// Feature rows plus integer class labels in [0, n_classes).
struct LabeledSamples {
    FeatureMatrix features;
    std::vector<int> labels;
    int n_classes = 0;

    std::size_t size() const { return labels.size(); }
    void validate() const;
};

/// Uses compressed storage when the dataset is mostly zeros.
LabeledSamples make_samples(const Dataset& dataset);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

// ---------------------------------------------------------------------------
// k-nearest neighbours

inline constexpr int kDefaultNeighbors = 5;

struct KnnModel {
    FeatureMatrix train;
    std::vector<int> labels;
    int n_classes = 0;
    int k = kDefaultNeighbors;
};

/// Stores a copy of the training data. Throws ConfigError unless 1 <= k <= n_train.
KnnModel knn_fit(const LabeledSamples& train, int k = kDefaultNeighbors);

/**
 * Majority vote over the k nearest training rows by Euclidean distance.
 * Distance ties go to the lower training index and vote ties to the lower
 * class. Queries are split into contiguous chunks over `workers` threads;
 * the output does not depend on the worker count.
 */
std::vector<int> knn_predict(const KnnModel& model, const FeatureMatrix& queries, int workers = 1);

// ---------------------------------------------------------------------------
// One-vs-all logistic regression

struct LogRegParams {
    double learning_rate = 0.1;
    int iterations = 500;
    double l2 = 1e-4;
};

struct LogRegModel {
    int n_classes = 0;
    std::size_t n_features = 0;
    /// One row per binary classifier: 1 for two classes (positive = class 1), else n_classes.
    std::vector<std::vector<double>> weights;
    std::vector<double> bias;
    LogRegParams params;

    std::size_t classifier_count() const { return weights.size(); }
};

double sigmoid(double z);

/**
 * Full-batch gradient descent on the L2-regularized logistic loss, one binary
 * problem per class. Classes are distributed over `workers` threads; each
 * class's weights depend only on its own data, so results are identical for
 * any worker count. Throws NumericError naming the class when the loss
 * becomes non-finite.
 */
LogRegModel logreg_fit(const LabeledSamples& train, const LogRegParams& params = {}, int workers = 1);

/// Raw linear scores w.x + b per classifier for query row i.
std::vector<double> logreg_scores(const LogRegModel& model, const FeatureMatrix& queries, std::size_t i);
std::vector<int> logreg_predict(const LogRegModel& model, const FeatureMatrix& queries);

// ---------------------------------------------------------------------------
// One-vs-one RBF support vector machine

struct SvmParams {
    double c = 1.0;
    double gamma = 0.0;  ///< <= 0 selects 1 / (d * variance of training values)
    double tolerance = 1e-3;
    long max_iterations = 10'000;
};

/// Binary classifier for classes (positive, negative); positive is the lower class index.
struct PairwiseSvm {
    int positive = 0;
    int negative = 1;
    FeatureMatrix support_vectors;
    std::vector<std::size_t> support_indices;  ///< rows of the training set
    std::vector<double> alpha;                 ///< dual coefficients, each in [0, C]
    std::vector<double> label_sign;            ///< +1 for positive, -1 for negative
    double rho = 0.0;                          ///< decision = sum alpha*y*K - rho
    long iterations = 0;
    bool reached_iteration_cap = false;

    double decision(const FeatureMatrix& queries, std::size_t i, double gamma) const;
};

struct SvmModel {
    int n_classes = 0;
    double gamma = 0.0;
    double c = 1.0;
    std::vector<PairwiseSvm> pairs;

    std::size_t classifier_count() const { return pairs.size(); }
    /// Training rows that are a support vector of at least one pairwise classifier.
    std::size_t support_vector_count() const;
    bool reached_iteration_cap() const;
};

double default_gamma(const FeatureMatrix& features);

/**
 * One SMO solve per class pair (second-order working set selection) on the
 * full pairwise kernel matrix. Stops at the KKT tolerance or the iteration
 * cap; hitting the cap sets a warning flag instead of failing.
 */
SvmModel svm_fit(const LabeledSamples& train, const SvmParams& params = {});
std::vector<int> svm_predict(const SvmModel& model, const FeatureMatrix& queries);

}  // namespace edgebench

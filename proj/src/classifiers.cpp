#include "edgebench/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edgebench/common.hpp"
#include "edgebench/parallel.hpp"

namespace edgebench {

void LabeledSamples::validate() const {
    if (features.rows() != labels.size()) {
        throw DataError("samples: " + std::to_string(features.rows()) + " rows but " + std::to_string(labels.size()) +
                        " labels");
    }
    for (const int l : labels) {
        if (l < 0 || l >= n_classes) {
            throw DataError("samples: label " + std::to_string(l) + " outside [0, " + std::to_string(n_classes) + ")");
        }
    }
}

LabeledSamples make_samples(const Dataset& dataset) {
    dataset.validate();
    return LabeledSamples{to_feature_matrix(dataset), dataset.labels, dataset.n_classes};
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw ConfigError("accuracy: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                          std::to_string(truth.size()) + ")");
    }
    if (truth.empty()) {
        throw ConfigError("accuracy: empty input");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        hits += predicted[i] == truth[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

namespace {

int vote(std::span<const int> counts) {
    // max_element returns the first maximum: ties resolve to the lowest class.
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

KnnModel knn_fit(const LabeledSamples& train, int k) {
    train.validate();
    if (train.size() == 0) {
        throw ConfigError("knn_fit: empty training set");
    }
    if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
        throw ConfigError("knn_fit: k=" + std::to_string(k) + " outside [1, " + std::to_string(train.size()) + "]");
    }
    return KnnModel{train.features, train.labels, train.n_classes, k};
}

std::vector<int> knn_predict(const KnnModel& model, const FeatureMatrix& queries, int workers) {
    if (workers < 1) {
        throw ConfigError("knn_predict: workers must be >= 1");
    }
    if (queries.cols() != model.train.cols()) {
        throw ConfigError("knn_predict: query width " + std::to_string(queries.cols()) + " != training width " +
                          std::to_string(model.train.cols()));
    }
    const std::size_t n_train = model.train.rows();
    const auto k = static_cast<std::size_t>(model.k);
    std::vector<int> out(queries.rows());
    parallel_for(queries.rows(), workers, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> dist(n_train);
        std::vector<int> counts(static_cast<std::size_t>(model.n_classes));
        for (std::size_t q = begin; q < end; ++q) {
            for (std::size_t t = 0; t < n_train; ++t) {
                dist[t] = {queries.squared_distance(q, model.train, t), t};
            }
            std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t m = 0; m < k; ++m) {
                ++counts[static_cast<std::size_t>(model.labels[dist[m].second])];
            }
            out[q] = vote(counts);
        }
    });
    return out;
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

/// log(1 + exp(z)) without overflow.
double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void train_binary(const LabeledSamples& train, int positive, const LogRegParams& params, std::vector<double>& w,
                  double& b) {
    const std::size_t n = train.size();
    const std::size_t d = train.features.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    w.assign(d, 0.0);
    b = 0.0;
    std::vector<double> grad(d);
    for (int it = 0; it < params.iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = train.features.dot(i, w) + b;
            const bool y = train.labels[i] == positive;
            const double residual = sigmoid(z) - (y ? 1.0 : 0.0);
            train.features.add_scaled_row(i, residual, grad);
            grad_b += residual;
            loss += y ? softplus(-z) : softplus(z);
        }
        double norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            w[j] -= params.learning_rate * (grad[j] * inv_n + params.l2 * w[j]);
            norm2 += w[j] * w[j];
        }
        b -= params.learning_rate * grad_b * inv_n;
        loss = loss * inv_n + 0.5 * params.l2 * norm2;
        if (!std::isfinite(loss) || !std::isfinite(b)) {
            throw NumericError("logreg_fit: loss became non-finite for class " + std::to_string(positive) +
                               " at iteration " + std::to_string(it) + " (learning rate too large?)");
        }
    }
}

}  // namespace

LogRegModel logreg_fit(const LabeledSamples& train, const LogRegParams& params, int workers) {
    train.validate();
    if (train.n_classes < 2) {
        throw ConfigError("logreg_fit: need at least 2 classes");
    }
    if (train.size() == 0) {
        throw ConfigError("logreg_fit: empty training set");
    }
    if (params.iterations < 0 || !(params.learning_rate > 0.0) || params.l2 < 0.0) {
        throw ConfigError("logreg_fit: invalid hyper-parameters");
    }
    if (workers < 1) {
        throw ConfigError("logreg_fit: workers must be >= 1");
    }
    LogRegModel model;
    model.n_classes = train.n_classes;
    model.n_features = train.features.cols();
    model.params = params;
    const std::size_t count = train.n_classes == 2 ? 1 : static_cast<std::size_t>(train.n_classes);
    model.weights.resize(count);
    model.bias.resize(count);
    parallel_for(count, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            const int positive = count == 1 ? 1 : static_cast<int>(c);
            train_binary(train, positive, params, model.weights[c], model.bias[c]);
        }
    });
    return model;
}

std::vector<double> logreg_scores(const LogRegModel& model, const FeatureMatrix& queries, std::size_t i) {
    std::vector<double> s(model.classifier_count());
    for (std::size_t c = 0; c < s.size(); ++c) {
        s[c] = queries.dot(i, model.weights[c]) + model.bias[c];
    }
    return s;
}

std::vector<int> logreg_predict(const LogRegModel& model, const FeatureMatrix& queries) {
    if (queries.cols() != model.n_features) {
        throw ConfigError("logreg_predict: query width " + std::to_string(queries.cols()) + " != model width " +
                          std::to_string(model.n_features));
    }
    std::vector<int> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        const auto s = logreg_scores(model, queries, i);
        if (model.classifier_count() == 1) {
            out[i] = sigmoid(s[0]) > 0.5 ? 1 : 0;
        } else {
            out[i] = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
        }
    }
    return out;
}

}  // namespace edgebench

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "edgebench/classifiers.hpp"
#include "edgebench/common.hpp"

namespace edgebench {

namespace {

constexpr double kTau = 1e-12;

struct SmoResult {
    std::vector<double> alpha;
    double rho = 0.0;
    long iterations = 0;
    bool reached_cap = false;
};

/// Dual C-SVC: min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0, with Q_ij = y_i y_j K_ij.
SmoResult solve_smo(const std::vector<double>& kernel, const std::vector<double>& y, double c, double tol,
                    long max_iterations) {
    const std::size_t n = y.size();
    auto K = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    SmoResult res;
    long it = 0;
    for (;; ++it) {
        // Working set: maximal violator i, then j by second-order gain.
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0 ? !at_upper(t) : !at_lower(t)) {
                const double v = -y[t] * grad[t];
                if (v >= gmax) {
                    gmax = v;
                    i = t;
                }
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        if (i < n) {
            for (std::size_t t = 0; t < n; ++t) {
                if (y[t] > 0 ? !at_lower(t) : !at_upper(t)) {
                    const double v = y[t] * grad[t];
                    gmax2 = std::max(gmax2, v);
                    const double grad_diff = gmax + v;
                    if (grad_diff > 0.0) {
                        double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
                        if (quad <= 0.0) {
                            quad = kTau;
                        }
                        const double obj = -(grad_diff * grad_diff) / quad;
                        if (obj <= best_obj) {
                            best_obj = obj;
                            j = t;
                        }
                    }
                }
            }
        }
        if (i == n || j == n || gmax + gmax2 < tol) {
            break;
        }
        if (it >= max_iterations) {
            res.reached_cap = true;
            break;
        }

        const double qij = y[i] * y[j] * K(i, j);
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = K(i, i) + K(j, j) + 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = K(i, i) + K(j, j) - 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * (y[i] * K(t, i) * dai + y[j] * K(t, j) * daj);
        }
    }

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (at_upper(t)) {
            if (y[t] < 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (at_lower(t)) {
            if (y[t] > 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    res.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    res.alpha = std::move(alpha);
    res.iterations = it;
    return res;
}

}  // namespace

double PairwiseSvm::decision(const FeatureMatrix& queries, std::size_t i, double gamma) const {
    double f = -rho;
    for (std::size_t s = 0; s < alpha.size(); ++s) {
        f += alpha[s] * label_sign[s] * std::exp(-gamma * queries.squared_distance(i, support_vectors, s));
    }
    return f;
}

std::size_t SvmModel::support_vector_count() const {
    std::set<std::size_t> unique;
    for (const auto& p : pairs) {
        unique.insert(p.support_indices.begin(), p.support_indices.end());
    }
    return unique.size();
}

bool SvmModel::reached_iteration_cap() const {
    return std::any_of(pairs.begin(), pairs.end(), [](const PairwiseSvm& p) { return p.reached_iteration_cap; });
}

double default_gamma(const FeatureMatrix& features) {
    const std::size_t d = features.cols();
    const double total = static_cast<double>(features.rows() * d);
    if (total == 0.0) {
        return 1.0;
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<double> row(d);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        features.copy_row(i, row);
        for (const double v : row) {
            sum += v;
            sum_sq += v * v;
        }
    }
    const double mean = sum / total;
    const double var = std::max(sum_sq / total - mean * mean, 0.0);
    return var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0 / static_cast<double>(d);
}

SvmModel svm_fit(const LabeledSamples& train, const SvmParams& params) {
    train.validate();
    if (train.n_classes < 2) {
        throw ConfigError("svm_fit: need at least 2 classes");
    }
    if (!(params.c > 0.0)) {
        throw ConfigError("svm_fit: C must be > 0");
    }
    if (!(params.tolerance > 0.0) || params.max_iterations < 1) {
        throw ConfigError("svm_fit: tolerance and iteration cap must be positive");
    }
    SvmModel model;
    model.n_classes = train.n_classes;
    model.c = params.c;
    model.gamma = params.gamma > 0.0 ? params.gamma : default_gamma(train.features);

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(train.n_classes));
    for (std::size_t i = 0; i < train.size(); ++i) {
        members[static_cast<std::size_t>(train.labels[i])].push_back(i);
    }

    for (int a = 0; a < train.n_classes; ++a) {
        for (int b = a + 1; b < train.n_classes; ++b) {
            PairwiseSvm pair;
            pair.positive = a;
            pair.negative = b;
            std::vector<std::size_t> rows = members[static_cast<std::size_t>(a)];
            rows.insert(rows.end(), members[static_cast<std::size_t>(b)].begin(),
                        members[static_cast<std::size_t>(b)].end());
            std::sort(rows.begin(), rows.end());
            const std::size_t n = rows.size();
            std::vector<double> y(n);
            for (std::size_t t = 0; t < n; ++t) {
                y[t] = train.labels[rows[t]] == a ? 1.0 : -1.0;
            }
            std::vector<double> kernel(n * n);
            for (std::size_t p = 0; p < n; ++p) {
                kernel[p * n + p] = 1.0;
                for (std::size_t q = p + 1; q < n; ++q) {
                    const double k = std::exp(-model.gamma * train.features.squared_distance(rows[p], train.features, rows[q]));
                    kernel[p * n + q] = k;
                    kernel[q * n + p] = k;
                }
            }
            SmoResult sol = solve_smo(kernel, y, params.c, params.tolerance, params.max_iterations);
            pair.rho = sol.rho;
            pair.iterations = sol.iterations;
            pair.reached_iteration_cap = sol.reached_cap;
            for (std::size_t t = 0; t < n; ++t) {
                if (sol.alpha[t] > 0.0) {
                    pair.support_indices.push_back(rows[t]);
                    pair.alpha.push_back(sol.alpha[t]);
                    pair.label_sign.push_back(y[t]);
                }
            }
            pair.support_vectors = train.features.select_rows(pair.support_indices);
            if (pair.reached_iteration_cap) {
                warn("svm_fit: classes " + std::to_string(a) + "/" + std::to_string(b) +
                     " stopped at the iteration cap before reaching tolerance");
            }
            model.pairs.push_back(std::move(pair));
        }
    }
    return model;
}

std::vector<int> svm_predict(const SvmModel& model, const FeatureMatrix& queries) {
    if (!model.pairs.empty() && queries.cols() != model.pairs.front().support_vectors.cols()) {
        throw ConfigError("svm_predict: query width mismatch");
    }
    std::vector<int> out(queries.rows());
    std::vector<int> votes(static_cast<std::size_t>(model.n_classes));
    for (std::size_t i = 0; i < queries.rows(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const auto& pair : model.pairs) {
            const int winner = pair.decision(queries, i, model.gamma) > 0.0 ? pair.positive : pair.negative;
            ++votes[static_cast<std::size_t>(winner)];
        }
        out[i] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
}

}  // namespace edgebench

#include "edgebench/regression.hpp"

#include <cmath>
#include <string>

#include "edgebench/common.hpp"

namespace edgebench {

LinearModel ols_fit(const Matrix& x, const Vector& y, bool strict) {
    const auto n = x.rows();
    const auto d = x.cols();
    if (y.size() != n) {
        throw ConfigError("ols_fit: X has " + std::to_string(n) + " rows but y has " + std::to_string(y.size()));
    }
    if (n == 0) {
        throw ConfigError("ols_fit: empty input");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw ConfigError("ols_fit: non-finite input");
    }

    LinearModel model;
    model.coefficients = Vector::Zero(d);
    std::vector<Eigen::Index> kept;
    Matrix design(n, 1);
    design.col(0).setOnes();
    Eigen::Index rank = 1;
    for (Eigen::Index c = 0; c < d; ++c) {
        if (x.col(c).maxCoeff() == x.col(c).minCoeff()) {
            model.dropped_columns.push_back(static_cast<std::size_t>(c));
            continue;
        }
        Matrix candidate(n, design.cols() + 1);
        candidate << design, x.col(c);
        const Eigen::Index r = Eigen::ColPivHouseholderQR<Matrix>(candidate).rank();
        if (r == rank) {
            if (strict) {
                throw NumericError("ols_fit: column " + std::to_string(c) + " is linearly dependent (strict mode)");
            }
            warn("ols_fit: dropping linearly dependent column " + std::to_string(c));
            model.dropped_columns.push_back(static_cast<std::size_t>(c));
            continue;
        }
        design = std::move(candidate);
        rank = r;
        kept.push_back(c);
    }
    if (n < design.cols()) {
        throw ConfigError("ols_fit: need at least " + std::to_string(design.cols()) + " rows for " +
                          std::to_string(design.cols() - 1) + " columns plus intercept");
    }
    const Vector beta = design.colPivHouseholderQr().solve(y);
    model.intercept = beta(0);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        model.coefficients(kept[k]) = beta(static_cast<Eigen::Index>(k) + 1);
    }
    if (!model.coefficients.allFinite() || !std::isfinite(model.intercept)) {
        throw NumericError("ols_fit: non-finite coefficients");
    }
    return model;
}

double ols_predict(const LinearModel& model, const Eigen::Ref<const Vector>& x) {
    if (x.size() != model.coefficients.size()) {
        throw ConfigError("ols_predict: expected " + std::to_string(model.coefficients.size()) + " features, got " +
                          std::to_string(x.size()));
    }
    return model.intercept + model.coefficients.dot(x);
}

GpParams GpParams::defaults_for(const Vector& y) {
    double var = 0.0;
    if (y.size() > 0) {
        const double mean = y.mean();
        var = (y.array() - mean).square().mean();
    }
    if (!(var > 0.0) || !std::isfinite(var)) {
        var = 1.0;
    }
    return GpParams{2.0, var, 0.01 * var};
}

void GpParams::validate() const {
    if (!(lengthscale > 0.0) || !(signal_variance > 0.0) || !(noise_variance > 0.0)) {
        throw ConfigError("GpParams: lengthscale, signal and noise variance must be > 0");
    }
}

double se_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, const GpParams& params) {
    return params.signal_variance * std::exp(-(a - b).squaredNorm() / (2.0 * params.lengthscale * params.lengthscale));
}

GpModel gp_fit(const Matrix& x, const Vector& y, const GpParams& params) {
    params.validate();
    const auto n = x.rows();
    if (y.size() != n || n == 0) {
        throw ConfigError("gp_fit: X and y must be nonempty with matching rows");
    }
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = se_kernel(x.row(i).transpose(), x.row(j).transpose(), params);
            k(i, j) = v;
            k(j, i) = v;
        }
        k(i, i) += params.noise_variance;
    }
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success) {
        throw NumericError("gp_fit: kernel system is not positive definite; increase noise_variance");
    }
    GpModel model;
    model.params = params;
    model.train_x = x;
    model.alpha = llt.solve(y);
    model.chol_l = llt.matrixL();
    return model;
}

GpPrediction gp_predict(const GpModel& model, const Eigen::Ref<const Vector>& x) {
    if (x.size() != model.train_x.cols()) {
        throw ConfigError("gp_predict: expected " + std::to_string(model.train_x.cols()) + " features, got " +
                          std::to_string(x.size()));
    }
    const auto n = model.train_x.rows();
    Vector ks(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ks(i) = se_kernel(model.train_x.row(i).transpose(), x, model.params);
    }
    const Vector v = model.chol_l.triangularView<Eigen::Lower>().solve(ks);
    const double var = model.params.signal_variance - v.squaredNorm();
    return {ks.dot(model.alpha), std::max(var, 0.0)};
}

}  // namespace edgebench

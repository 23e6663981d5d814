#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace edgebench {

/// Rows are observations, columns are features.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Multiple linear regression

struct LinearModel {
    double intercept = 0.0;
    Vector coefficients;                      ///< one per input column; dropped columns are 0
    std::vector<std::size_t> dropped_columns;  ///< constant or linearly dependent inputs
};

/**
 * Least squares through a column-pivoting Householder QR of [1 | X].
 * Constant columns are always dropped. Columns that add no rank to the
 * columns before them are dropped with a warning, or rejected with
 * NumericError when `strict` is set.
 */
LinearModel ols_fit(const Matrix& x, const Vector& y, bool strict = false);
double ols_predict(const LinearModel& model, const Eigen::Ref<const Vector>& x);

// ---------------------------------------------------------------------------
// Gaussian process regression

/// Squared-exponential kernel sf2 * exp(-|a-b|^2 / (2 l^2)) plus observation noise sn2.
struct GpParams {
    double lengthscale = 2.0;
    double signal_variance = 1.0;
    double noise_variance = 0.01;

    /// lengthscale 2, signal variance var(y), noise 1% of var(y). Falls back to 1 for constant y.
    static GpParams defaults_for(const Vector& y);
    void validate() const;
};

double se_kernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, const GpParams& params);

struct GpModel {
    GpParams params;
    Matrix train_x;
    Vector alpha;   ///< (K + sn2 I)^-1 y
    Matrix chol_l;  ///< lower Cholesky factor of K + sn2 I
};

struct GpPrediction {
    double mean = 0.0;
    double variance = 0.0;  ///< latent-function variance, clamped at 0
};

/// Zero prior mean. Throws NumericError when K + sn2 I is not positive definite.
GpModel gp_fit(const Matrix& x, const Vector& y, const GpParams& params);
GpPrediction gp_predict(const GpModel& model, const Eigen::Ref<const Vector>& x);

}  // namespace edgebench

#include "edgebench/predictor.hpp"

#include "edgebench/common.hpp"

namespace edgebench {

std::string to_string(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::ols: return "ols";
        case RegressorKind::gp: return "gp";
        case RegressorKind::rf: return "rf";
    }
    return "?";
}

RegressorKind parse_regressor_kind(const std::string& s) {
    if (s == "ols") return RegressorKind::ols;
    if (s == "gp") return RegressorKind::gp;
    if (s == "rf") return RegressorKind::rf;
    throw ConfigError("unknown model kind '" + s + "' (expected rf, gp or ols)");
}

Regressor fit_regressor(const Matrix& x, const Vector& y, const ModelSpec& spec) {
    switch (spec.kind) {
        case RegressorKind::ols:
            return ols_fit(x, y, spec.ols_strict);
        case RegressorKind::gp:
            return gp_fit(x, y, spec.gp ? *spec.gp : GpParams::defaults_for(y));
        case RegressorKind::rf:
            return rf_fit(x, y, spec.forest, spec.workers);
    }
    throw ConfigError("fit_regressor: bad model kind");
}

std::size_t input_width(const Regressor& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return static_cast<std::size_t>(m.coefficients.size());
            } else if constexpr (std::is_same_v<T, GpModel>) {
                return static_cast<std::size_t>(m.train_x.cols());
            } else {
                return m.n_features;
            }
        },
        model);
}

double predict_one(const Regressor& model, const Eigen::Ref<const Vector>& x) {
    if (static_cast<std::size_t>(x.size()) != input_width(model)) {
        throw ConfigError("predict: expected " + std::to_string(input_width(model)) + " features, got " +
                          std::to_string(x.size()));
    }
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return ols_predict(m, x);
            } else if constexpr (std::is_same_v<T, GpModel>) {
                return gp_predict(m, x).mean;
            } else {
                return rf_predict(m, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
            }
        },
        model);
}

Vector predict_all(const Regressor& model, const Matrix& x) {
    Vector out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Vector row = x.row(r).transpose();
        out(r) = predict_one(model, row);
    }
    return out;
}

RegressorKind kind_of(const Regressor& model) {
    return static_cast<RegressorKind>(model.index());
}

}  // namespace edgebench

#pragma once

#include <optional>
#include <string>
#include <variant>

#include "edgebench/forest.hpp"
#include "edgebench/regression.hpp"

namespace edgebench {

enum class RegressorKind { ols, gp, rf };

std::string to_string(RegressorKind kind);
RegressorKind parse_regressor_kind(const std::string& s);

/// How to fit a regressor. An unset `gp` means GpParams::defaults_for(y).
struct ModelSpec {
    RegressorKind kind = RegressorKind::rf;
    bool ols_strict = false;
    std::optional<GpParams> gp;
    ForestParams forest;
    int workers = 1;
};

using Regressor = std::variant<LinearModel, GpModel, Forest>;

Regressor fit_regressor(const Matrix& x, const Vector& y, const ModelSpec& spec);
double predict_one(const Regressor& model, const Eigen::Ref<const Vector>& x);
Vector predict_all(const Regressor& model, const Matrix& x);
RegressorKind kind_of(const Regressor& model);
std::size_t input_width(const Regressor& model);

}  // namespace edgebench

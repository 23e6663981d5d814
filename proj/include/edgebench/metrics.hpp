#pragma once

#include <span>

namespace edgebench {

/// 1 - SS_res / SS_tot. Negative for fits worse than the mean. Throws ConfigError when
/// fewer than 2 values, lengths differ, or the truth is constant.
double r_squared(std::span<const double> predicted, std::span<const double> truth);

/// sqrt(mean squared error). Throws ConfigError on empty or mismatched inputs.
double rmse(std::span<const double> predicted, std::span<const double> truth);

/// rmse / range. Throws ConfigError unless range > 0.
double nrmse(double rmse_value, double range);

/// max - min of the values; 0 for an empty span.
double value_range(std::span<const double> values);

struct Metrics {
    double r_squared = 0.0;  ///< NaN when undefined (n < 2 or constant truth)
    double rmse = 0.0;
    double range = 0.0;
    double nrmse = 0.0;  ///< NaN when range == 0
};

Metrics compute_metrics(std::span<const double> predicted, std::span<const double> truth);

}  // namespace edgebench

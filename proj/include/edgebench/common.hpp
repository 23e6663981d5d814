#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace edgebench {

/// Invalid parameters, configuration files, or call preconditions.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (files, datasets, records).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: divergence, non-positive-definite systems, rank loss in strict mode.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using WarningSink = std::function<void(const std::string&)>;

/**
 * Route non-fatal diagnostics. The default sink writes to stderr.
 * Returns the previously installed sink so tests can restore it.
 */
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace edgebench

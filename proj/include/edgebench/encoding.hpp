#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "edgebench/harness.hpp"

namespace edgebench {

inline constexpr std::size_t kFeatureCount = 14;
using FeatureVector = std::array<double, kFeatureCount>;

/**
 * Levels of each categorical factor. The first level of every factor is its
 * reference and encodes as all zeros; level k >= 1 sets column k-1 of the
 * factor. Numeric levels must be strictly ascending so the reference is the
 * smallest value.
 *
 * Column layout: r1 r2 | s1..s4 | nc1 nc2 | phase | color | dimension | alg1 alg2 | device
 */
struct EncodingSchema {
    std::array<int, 3> resolutions{17, 22, 28};
    std::array<int, 5> sizes{300, 600, 900, 1200, 1500};
    std::array<int, 3> class_counts{2, 7, 10};
    std::array<std::string, 2> devices{"rpi3", "bbb"};
    // phase: train (ref), test; color: no (ref), yes; dimension: 2-D (ref), 3-D;
    // algorithm: knn (ref), svm, logreg

    void validate() const;
    bool operator==(const EncodingSchema&) const = default;
};

const std::array<std::string, kFeatureCount>& feature_names();

struct EncodedRow {
    FeatureVector features{};
    /// Factors whose value is not a known level; they were encoded as the reference.
    std::vector<std::string> unseen_factors;

    bool has_unseen() const { return !unseen_factors.empty(); }
};

/// Dummy coding of a configuration. Never throws on unseen levels; see EncodedRow.
EncodedRow encode(const ExperimentConfig& config, const EncodingSchema& schema = {});

}  // namespace edgebench

#include "edgebench/encoding.hpp"

#include <algorithm>

#include "edgebench/common.hpp"

namespace edgebench {

void EncodingSchema::validate() const {
    auto ascending = [](const auto& levels) { return std::adjacent_find(levels.begin(), levels.end(), std::greater_equal<>()) == levels.end(); };
    if (!ascending(resolutions) || !ascending(sizes) || !ascending(class_counts)) {
        throw ConfigError("encoding schema: numeric levels must be strictly ascending");
    }
    if (devices[0] == devices[1] || devices[0].empty() || devices[1].empty()) {
        throw ConfigError("encoding schema: device levels must be distinct and nonempty");
    }
}

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names{
        "r1", "r2", "s1", "s2", "s3", "s4", "nc1", "nc2", "phase", "color", "dimension", "alg1", "alg2", "device"};
    return names;
}

namespace {

/// Writes the dummy columns of one factor starting at `offset`. Returns false for unseen levels.
template <typename Levels, typename Value>
bool put_factor(FeatureVector& out, std::size_t offset, const Levels& levels, const Value& value) {
    const auto it = std::find(levels.begin(), levels.end(), value);
    if (it == levels.end()) {
        return false;
    }
    const auto level = static_cast<std::size_t>(it - levels.begin());
    if (level > 0) {
        out[offset + level - 1] = 1.0;
    }
    return true;
}

}  // namespace

EncodedRow encode(const ExperimentConfig& config, const EncodingSchema& schema) {
    EncodedRow row;
    auto& f = row.features;
    if (!put_factor(f, 0, schema.resolutions, config.resolution)) {
        row.unseen_factors.push_back("resolution=" + std::to_string(config.resolution));
    }
    if (!put_factor(f, 2, schema.sizes, config.n_images)) {
        row.unseen_factors.push_back("n_images=" + std::to_string(config.n_images));
    }
    if (!put_factor(f, 6, schema.class_counts, config.n_classes)) {
        row.unseen_factors.push_back("n_classes=" + std::to_string(config.n_classes));
    }
    f[8] = config.phase == Phase::test ? 1.0 : 0.0;
    f[9] = config.color ? 1.0 : 0.0;
    f[10] = config.channels == 3 ? 1.0 : 0.0;
    f[11] = config.algorithm == Algorithm::svm ? 1.0 : 0.0;
    f[12] = config.algorithm == Algorithm::logreg ? 1.0 : 0.0;
    if (!put_factor(f, 13, schema.devices, config.device)) {
        row.unseen_factors.push_back("device=" + config.device);
    }
    return row;
}

}  // namespace edgebench

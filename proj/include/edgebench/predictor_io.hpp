#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "edgebench/encoding.hpp"
#include "edgebench/predictor.hpp"

namespace edgebench {

/// Encoded measurement rows ready for regression. Failed records are skipped.
struct EnergyTable {
    Matrix x;
    Vector y;
    std::vector<std::string> keys;  ///< MeasurementRecord::key() per row
    std::vector<MeasurementRecord> records;
    std::size_t unseen_rows = 0;  ///< rows with at least one unseen level
};

EnergyTable build_energy_table(const RecordSet& records, const EncodingSchema& schema = {});

/// A regressor together with the encoding it was trained on.
struct EnergyPredictor {
    Regressor model;
    EncodingSchema schema;

    /// Predicted energy in J for one configuration. Warns when a level is unseen.
    double predict(const ExperimentConfig& config) const;
};

inline constexpr int kRegressorFormatVersion = 1;

std::string serialize_predictor(const EnergyPredictor& predictor);
/// Throws DataError on malformed text or a feature-name list that differs from this build's.
EnergyPredictor deserialize_predictor(const std::string& text);

void save_predictor(const EnergyPredictor& predictor, const std::filesystem::path& path);
EnergyPredictor load_predictor(const std::filesystem::path& path);

}  // namespace edgebench

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/classifiers.hpp"
#include "edgebench/datasets.hpp"
#include "edgebench/metering.hpp"

namespace edgebench {

enum class Algorithm { knn, svm, logreg };
enum class Phase { train, test };

std::string to_string(Algorithm a);
std::string to_string(Phase p);
Algorithm parse_algorithm(const std::string& s);
Phase parse_phase(const std::string& s);

/// One cell of the experiment matrix.
struct ExperimentConfig {
    Algorithm algorithm = Algorithm::knn;
    Phase phase = Phase::train;
    std::string dataset;
    int n_images = 300;
    int resolution = 28;
    int channels = 1;
    int n_classes = 10;
    bool color = false;
    std::string device = "rpi3";
    int workers = 1;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Where a dataset comes from: a synthetic stand-in, or an image directory when `directory` is set.
struct DatasetSource {
    std::string name;
    int channels = 1;
    int n_classes = 10;
    bool color = false;
    double sparsity = 0.0;
    double class_separation = 1.0;
    int base_resolution = 28;
    std::uint64_t seed = 1;
    std::filesystem::path directory;
};

/// The five synthetic stand-ins used by the default matrix.
std::vector<DatasetSource> default_dataset_sources();

struct ClassifierSettings {
    int knn_k = kDefaultNeighbors;
    LogRegParams logreg;
    SvmParams svm;
    double train_fraction = 0.8;
};

struct MeterSpec {
    enum class Kind { model, trace } kind = Kind::model;
    std::filesystem::path trace_path;
};

struct MatrixSpec {
    std::vector<Algorithm> algorithms{Algorithm::knn, Algorithm::svm, Algorithm::logreg};
    std::vector<DatasetSource> datasets = default_dataset_sources();
    std::vector<Phase> phases{Phase::train, Phase::test};
    std::vector<int> sizes{300, 600, 900, 1200, 1500};
    std::vector<int> resolutions{17, 22, 28};
    std::vector<std::string> devices{"rpi3"};
    std::vector<int> workers{1};
    int repetitions = 5;
    std::uint64_t seed = 42;
    ClassifierSettings classifier;
    MeterSpec meter;
    std::vector<DeviceProfile> profiles = default_profiles();
    std::filesystem::path output_path = "records.csv";
};

/// JSON matrix file; relative paths resolve against the file's directory.
MatrixSpec load_matrix_spec(const std::filesystem::path& path);

/**
 * Cartesian product in algorithm-major lexicographic order:
 * algorithm, dataset, size, resolution, device, workers, phase.
 * Phase varies fastest so both phases of a cell are adjacent.
 */
std::vector<ExperimentConfig> enumerate_matrix(const MatrixSpec& spec);

struct MeasurementRecord {
    ExperimentConfig config;
    int repetition = 0;
    double duration_s = 0.0;
    double energy_j = 0.0;
    std::optional<double> accuracy;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
    /// Identity used for resume: every config field plus the repetition.
    std::string key() const;
    bool operator==(const MeasurementRecord&) const = default;
};

using RecordSet = std::vector<MeasurementRecord>;

/// Train/test features for one dataset variant and split seed.
struct PreparedSplit {
    LabeledSamples train;
    LabeledSamples test;
};

/**
 * Produces standardized dataset variants on demand. Base sets are built once
 * per source; variants and splits are cached in small LRU pools.
 */
class DatasetProvider {
public:
    DatasetProvider(std::vector<DatasetSource> sources, std::uint64_t standardize_seed, double train_fraction);

    const DatasetSource& source(const std::string& name) const;
    /// Throws DataError when the name is unknown or the base set is too small.
    std::shared_ptr<const Dataset> variant(const std::string& name, int n_images, int resolution);
    std::shared_ptr<const PreparedSplit> prepared(const std::string& name, int n_images, int resolution,
                                                  std::uint64_t split_seed);

private:
    const Dataset& base(const std::string& name, int n_images);

    std::vector<DatasetSource> sources_;
    std::uint64_t seed_;
    double train_fraction_;
    std::map<std::string, Dataset> bases_;
    std::list<std::pair<std::string, std::shared_ptr<const Dataset>>> variants_;
    std::list<std::pair<std::string, std::shared_ptr<const PreparedSplit>>> splits_;
};

/// State shared by the runs of one matrix: dataset provider and the most recently trained models.
class RunContext {
public:
    RunContext(DatasetProvider& provider, ClassifierSettings settings);

    DatasetProvider& provider() { return provider_; }
    const ClassifierSettings& settings() const { return settings_; }

    struct TrainedModel;
    std::shared_ptr<const TrainedModel> find_model(const std::string& key) const;
    void store_model(const std::string& key, std::shared_ptr<const TrainedModel> model);

private:
    DatasetProvider& provider_;
    ClassifierSettings settings_;
    std::list<std::pair<std::string, std::shared_ptr<const TrainedModel>>> models_;
};

/**
 * Run exactly one phase inside a meter session. A test phase reuses the model
 * trained for the same cell and seed, training it unmetered when absent.
 * Throws ConfigError for svm with workers > 1 or workers beyond the device's cores.
 */
MeasurementRecord run_experiment(const ExperimentConfig& config, int repetition, Meter& meter, RunContext& context);

struct RunOptions {
    bool resume = false;
    /// Builds the meter for a device; defaults to the matrix's meter settings.
    std::function<Meter(const DeviceProfile&)> meter_factory;
    std::function<void(const MeasurementRecord&)> on_record;
};

struct RunSummary {
    std::size_t executed = 0;
    std::size_t skipped = 0;
    std::vector<std::string> failures;
    RecordSet records;  ///< everything in the output file after the run
};

/**
 * Execute every (config, repetition) sequentially, appending each record to
 * spec.output_path as soon as it completes. Repetition r uses seed
 * spec.seed + r. With resume, keys already present in the file are skipped;
 * otherwise the file is truncated first. A failing run is recorded with
 * status "failed" and the sweep continues.
 */
RunSummary run_matrix(const MatrixSpec& spec, const RunOptions& options = {});

}  // namespace edgebench

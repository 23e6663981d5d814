#include "edgebench/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <variant>

#include "edgebench/common.hpp"
#include "edgebench/model_io.hpp"
#include "edgebench/records.hpp"
#include "json.hpp"

namespace edgebench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::knn: return "knn";
        case Algorithm::svm: return "svm";
        case Algorithm::logreg: return "logreg";
    }
    return "?";
}

std::string to_string(Phase p) {
    return p == Phase::train ? "train" : "test";
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "knn") return Algorithm::knn;
    if (s == "svm") return Algorithm::svm;
    if (s == "logreg") return Algorithm::logreg;
    throw ConfigError("unknown algorithm '" + s + "' (expected knn, svm, logreg)");
}

Phase parse_phase(const std::string& s) {
    if (s == "train") return Phase::train;
    if (s == "test") return Phase::test;
    throw ConfigError("unknown phase '" + s + "' (expected train, test)");
}

void ExperimentConfig::validate() const {
    if (dataset.empty()) {
        throw ConfigError("config: dataset name is required");
    }
    if (n_images < 1) {
        throw ConfigError("config: n_images must be >= 1");
    }
    if (resolution < 1) {
        throw ConfigError("config: resolution must be >= 1");
    }
    if (channels != 1 && channels != 3) {
        throw ConfigError("config: channels must be 1 or 3");
    }
    if (n_classes < 2) {
        throw ConfigError("config: n_classes must be >= 2");
    }
    if (workers < 1) {
        throw ConfigError("config: workers must be >= 1");
    }
}

std::vector<DatasetSource> default_dataset_sources() {
    return {
        {"digits", 1, 10, false, 0.8, 0.30, 28, 11, {}},
        {"fashion", 1, 10, false, 0.5, 0.20, 28, 12, {}},
        {"cifar", 3, 10, true, 0.0, 0.08, 28, 13, {}},
        {"chest", 1, 2, false, 0.1, 0.10, 28, 14, {}},
        {"faces", 1, 7, true, 0.2, 0.10, 28, 15, {}},
    };
}

// ---------------------------------------------------------------------------
// Matrix files

namespace {

template <typename T>
void read_list(const json& j, const char* key, std::vector<T>& out) {
    if (j.contains(key)) {
        out = j.at(key).get<std::vector<T>>();
    }
}

}  // namespace

MatrixSpec load_matrix_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open matrix config " + path.string());
    }
    const fs::path base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };

    MatrixSpec spec;
    try {
        const json j = json::parse(in);
        if (j.contains("algorithms")) {
            spec.algorithms.clear();
            for (const auto& a : j.at("algorithms")) {
                spec.algorithms.push_back(parse_algorithm(a.get<std::string>()));
            }
        }
        if (j.contains("phases")) {
            spec.phases.clear();
            for (const auto& p : j.at("phases")) {
                spec.phases.push_back(parse_phase(p.get<std::string>()));
            }
        }
        if (j.contains("datasets")) {
            spec.datasets.clear();
            const auto builtin = default_dataset_sources();
            for (const auto& d : j.at("datasets")) {
                const std::string name = d.is_string() ? d.get<std::string>() : d.at("name").get<std::string>();
                const auto known = std::find_if(builtin.begin(), builtin.end(),
                                                [&name](const DatasetSource& b) { return b.name == name; });
                if (d.is_string()) {
                    if (known == builtin.end()) {
                        throw ConfigError("unknown built-in dataset '" + name + "'");
                    }
                    spec.datasets.push_back(*known);
                    continue;
                }
                DatasetSource s = known != builtin.end() ? *known : DatasetSource{};
                s.name = name;
                s.channels = d.value("channels", s.channels);
                s.n_classes = d.value("n_classes", s.n_classes);
                s.color = d.value("color", known != builtin.end() ? s.color : s.channels == 3);
                s.sparsity = d.value("sparsity", s.sparsity);
                s.class_separation = d.value("class_separation", s.class_separation);
                s.base_resolution = d.value("base_resolution", s.base_resolution);
                s.seed = d.value("seed", s.seed);
                if (d.contains("directory")) {
                    s.directory = resolve(d.at("directory").get<std::string>());
                }
                spec.datasets.push_back(std::move(s));
            }
        }
        read_list(j, "sizes", spec.sizes);
        read_list(j, "resolutions", spec.resolutions);
        read_list(j, "devices", spec.devices);
        read_list(j, "workers", spec.workers);
        spec.repetitions = j.value("repetitions", spec.repetitions);
        spec.seed = j.value("seed", spec.seed);
        spec.classifier.train_fraction = j.value("train_fraction", spec.classifier.train_fraction);
        if (j.contains("knn")) {
            spec.classifier.knn_k = j.at("knn").value("k", spec.classifier.knn_k);
        }
        if (j.contains("logreg")) {
            const auto& l = j.at("logreg");
            auto& p = spec.classifier.logreg;
            p.learning_rate = l.value("learning_rate", p.learning_rate);
            p.iterations = l.value("iterations", p.iterations);
            p.l2 = l.value("l2", p.l2);
        }
        if (j.contains("svm")) {
            const auto& s = j.at("svm");
            auto& p = spec.classifier.svm;
            p.c = s.value("c", p.c);
            p.gamma = s.value("gamma", p.gamma);
            p.tolerance = s.value("tolerance", p.tolerance);
            p.max_iterations = s.value("max_iterations", p.max_iterations);
        }
        if (j.contains("meter")) {
            const auto& m = j.at("meter");
            const std::string kind = m.value("kind", std::string("model"));
            if (kind == "model") {
                spec.meter.kind = MeterSpec::Kind::model;
            } else if (kind == "trace") {
                spec.meter.kind = MeterSpec::Kind::trace;
                spec.meter.trace_path = resolve(m.at("trace").get<std::string>());
            } else {
                throw ConfigError("meter.kind must be 'model' or 'trace'");
            }
            if (m.contains("profiles")) {
                spec.profiles = load_profiles(resolve(m.at("profiles").get<std::string>()));
            }
        }
        if (j.contains("output")) {
            spec.output_path = resolve(j.at("output").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ConfigError("matrix config " + path.string() + ": " + e.what());
    }
    return spec;
}

std::vector<ExperimentConfig> enumerate_matrix(const MatrixSpec& spec) {
    auto require = [](bool nonempty, const char* axis) {
        if (!nonempty) {
            throw ConfigError(std::string("matrix axis '") + axis + "' is empty");
        }
    };
    require(!spec.algorithms.empty(), "algorithms");
    require(!spec.datasets.empty(), "datasets");
    require(!spec.phases.empty(), "phases");
    require(!spec.sizes.empty(), "sizes");
    require(!spec.resolutions.empty(), "resolutions");
    require(!spec.devices.empty(), "devices");
    require(!spec.workers.empty(), "workers");

    std::vector<ExperimentConfig> out;
    out.reserve(spec.algorithms.size() * spec.datasets.size() * spec.phases.size() * spec.sizes.size() *
                spec.resolutions.size() * spec.devices.size() * spec.workers.size());
    for (const auto algorithm : spec.algorithms) {
        for (const auto& ds : spec.datasets) {
            for (const int size : spec.sizes) {
                for (const int res : spec.resolutions) {
                    for (const auto& device : spec.devices) {
                        for (const int workers : spec.workers) {
                            for (const auto phase : spec.phases) {
                                ExperimentConfig c;
                                c.algorithm = algorithm;
                                c.phase = phase;
                                c.dataset = ds.name;
                                c.n_images = size;
                                c.resolution = res;
                                c.channels = ds.channels;
                                c.n_classes = ds.n_classes;
                                c.color = ds.color;
                                c.device = device;
                                c.workers = workers;
                                c.seed = spec.seed;
                                c.validate();
                                out.push_back(std::move(c));
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::string MeasurementRecord::key() const {
    const auto& c = config;
    return to_string(c.algorithm) + '|' + to_string(c.phase) + '|' + c.dataset + '|' + std::to_string(c.n_images) +
           '|' + std::to_string(c.resolution) + '|' + std::to_string(c.channels) + '|' + std::to_string(c.n_classes) +
           '|' + (c.color ? "1" : "0") + '|' + c.device + '|' + std::to_string(c.workers) + '|' +
           std::to_string(c.seed) + '|' + std::to_string(repetition);
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

constexpr std::size_t kVariantCache = 4;

template <typename T>
std::shared_ptr<const T> lru_find(std::list<std::pair<std::string, std::shared_ptr<const T>>>& cache,
                                  const std::string& key) {
    for (auto it = cache.begin(); it != cache.end(); ++it) {
        if (it->first == key) {
            cache.splice(cache.begin(), cache, it);
            return cache.front().second;
        }
    }
    return nullptr;
}

template <typename T>
void lru_put(std::list<std::pair<std::string, std::shared_ptr<const T>>>& cache, const std::string& key,
             std::shared_ptr<const T> value) {
    cache.emplace_front(key, std::move(value));
    while (cache.size() > kVariantCache) {
        cache.pop_back();
    }
}

}  // namespace

DatasetProvider::DatasetProvider(std::vector<DatasetSource> sources, std::uint64_t standardize_seed,
                                 double train_fraction)
    : sources_(std::move(sources)), seed_(standardize_seed), train_fraction_(train_fraction) {}

const DatasetSource& DatasetProvider::source(const std::string& name) const {
    for (const auto& s : sources_) {
        if (s.name == name) {
            return s;
        }
    }
    throw DataError("no dataset source named '" + name + "'");
}

const Dataset& DatasetProvider::base(const std::string& name, int n_images) {
    auto it = bases_.find(name);
    if (it == bases_.end()) {
        const DatasetSource& src = source(name);
        Dataset ds;
        if (!src.directory.empty()) {
            ds = ingest_images(src.directory, src.base_resolution, src.channels == 1);
        } else {
            // Synthetic bases hold the largest standard size so every subset nests inside it.
            constexpr int kLargestStandardSize = 1500;
            const int want = std::max(n_images, kLargestStandardSize);
            SyntheticSpec spec;
            spec.n_images = (want + src.n_classes - 1) / src.n_classes * src.n_classes;
            spec.resolution = src.base_resolution;
            spec.channels = src.channels;
            spec.n_classes = src.n_classes;
            spec.sparsity = src.sparsity;
            spec.class_separation = src.class_separation;
            spec.seed = src.seed;
            spec.name = src.name;
            ds = generate_synthetic(spec);
        }
        ds.name = name;
        it = bases_.emplace(name, std::move(ds)).first;
    }
    if (static_cast<std::size_t>(n_images) > it->second.size()) {
        throw DataError("dataset '" + name + "' has " + std::to_string(it->second.size()) + " images; " +
                        std::to_string(n_images) + " requested");
    }
    return it->second;
}

std::shared_ptr<const Dataset> DatasetProvider::variant(const std::string& name, int n_images, int resolution) {
    const std::string key = name + "|" + std::to_string(n_images) + "|" + std::to_string(resolution);
    if (auto hit = lru_find(variants_, key)) {
        return hit;
    }
    auto variants = standardize(base(name, n_images), {n_images}, {resolution}, seed_);
    variants.front().name = name;
    auto ptr = std::make_shared<const Dataset>(std::move(variants.front()));
    lru_put(variants_, key, ptr);
    return ptr;
}

std::shared_ptr<const PreparedSplit> DatasetProvider::prepared(const std::string& name, int n_images, int resolution,
                                                               std::uint64_t split_seed) {
    const std::string key =
        name + "|" + std::to_string(n_images) + "|" + std::to_string(resolution) + "|" + std::to_string(split_seed);
    if (auto hit = lru_find(splits_, key)) {
        return hit;
    }
    const auto ds = variant(name, n_images, resolution);
    auto [train, test] = split(*ds, train_fraction_, split_seed);
    auto ptr = std::make_shared<const PreparedSplit>(PreparedSplit{make_samples(train), make_samples(test)});
    lru_put(splits_, key, ptr);
    return ptr;
}

// ---------------------------------------------------------------------------
// Running

struct RunContext::TrainedModel {
    ClassifierModel model;
};

RunContext::RunContext(DatasetProvider& provider, ClassifierSettings settings)
    : provider_(provider), settings_(std::move(settings)) {}

std::shared_ptr<const RunContext::TrainedModel> RunContext::find_model(const std::string& key) const {
    for (const auto& [k, m] : models_) {
        if (k == key) {
            return m;
        }
    }
    return nullptr;
}

void RunContext::store_model(const std::string& key, std::shared_ptr<const TrainedModel> model) {
    lru_put(models_, key, std::move(model));
}

namespace {

std::string cell_key(const ExperimentConfig& c) {
    return to_string(c.algorithm) + '|' + c.dataset + '|' + std::to_string(c.n_images) + '|' +
           std::to_string(c.resolution) + '|' + std::to_string(c.workers) + '|' + std::to_string(c.seed);
}

ClassifierModel train_model(const ExperimentConfig& c, const PreparedSplit& data, const ClassifierSettings& s) {
    switch (c.algorithm) {
        case Algorithm::knn: return knn_fit(data.train, s.knn_k);
        case Algorithm::logreg: return logreg_fit(data.train, s.logreg, c.workers);
        case Algorithm::svm: return svm_fit(data.train, s.svm);
    }
    throw ConfigError("unknown algorithm");
}

std::vector<int> predict_model(const ClassifierModel& model, const FeatureMatrix& queries, int workers) {
    struct Visitor {
        const FeatureMatrix& q;
        int workers;
        std::vector<int> operator()(const KnnModel& m) const { return knn_predict(m, q, workers); }
        std::vector<int> operator()(const LogRegModel& m) const { return logreg_predict(m, q); }
        std::vector<int> operator()(const SvmModel& m) const { return svm_predict(m, q); }
    };
    return std::visit(Visitor{queries, workers}, model);
}

}  // namespace

MeasurementRecord run_experiment(const ExperimentConfig& config, int repetition, Meter& meter, RunContext& context) {
    config.validate();
    if (config.algorithm == Algorithm::svm && config.workers > 1) {
        throw ConfigError("svm cannot use multiple workers (workers=" + std::to_string(config.workers) + ")");
    }
    if (const DeviceProfile* p = meter.profile()) {
        if (p->name != config.device) {
            throw ConfigError("meter profile '" + p->name + "' does not match device '" + config.device + "'");
        }
        if (config.workers > p->cores) {
            throw ConfigError("workers=" + std::to_string(config.workers) + " exceeds the " + std::to_string(p->cores) +
                              " cores of '" + p->name + "'");
        }
    }
    const auto data = context.provider().prepared(config.dataset, config.n_images, config.resolution, config.seed);
    meter.set_active_cores(config.workers);

    MeasurementRecord record;
    record.config = config;
    record.repetition = repetition;
    const std::string key = cell_key(config);
    SessionResult metered;
    if (config.phase == Phase::train) {
        ClassifierModel model;
        metered = meter.session([&] { model = train_model(config, *data, context.settings()); });
        context.store_model(key, std::make_shared<const RunContext::TrainedModel>(RunContext::TrainedModel{std::move(model)}));
    } else {
        auto trained = context.find_model(key);
        if (!trained) {
            trained = std::make_shared<const RunContext::TrainedModel>(
                RunContext::TrainedModel{train_model(config, *data, context.settings())});
            context.store_model(key, trained);
        }
        std::vector<int> predicted;
        metered = meter.session([&] { predicted = predict_model(trained->model, data->test.features, config.workers); });
        record.accuracy = accuracy(predicted, data->test.labels);
    }
    record.duration_s = std::max(metered.duration_s, 1e-9);
    record.energy_j = metered.energy_j;
    return record;
}

RunSummary run_matrix(const MatrixSpec& spec, const RunOptions& options) {
    if (spec.repetitions < 1) {
        throw ConfigError("repetitions must be >= 1");
    }
    const auto configs = enumerate_matrix(spec);
    for (const auto& device : spec.devices) {
        find_profile(spec.profiles, device);
    }

    std::function<Meter(const DeviceProfile&)> factory = options.meter_factory;
    if (!factory) {
        if (spec.meter.kind == MeterSpec::Kind::trace) {
            auto trace = std::make_shared<const PowerTrace>(load_trace_csv(spec.meter.trace_path));
            const double origin = steady_seconds()();
            factory = [trace, origin](const DeviceProfile&) {
                return Meter::from_trace(*trace, [origin] { return steady_seconds()() - origin; });
            };
        } else {
            factory = [](const DeviceProfile& p) { return Meter::analytical(p); };
        }
    }

    RunSummary summary;
    std::set<std::string> done;
    const bool exists = fs::exists(spec.output_path);
    if (options.resume && exists) {
        summary.records = load_records(spec.output_path);
        for (const auto& r : summary.records) {
            done.insert(r.key());
        }
    }
    if (spec.output_path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(spec.output_path.parent_path(), ec);
    }
    std::ofstream out;
    if (options.resume && exists) {
        out.open(spec.output_path, std::ios::app);
    } else {
        out.open(spec.output_path, std::ios::trunc);
        out << kRecordsHeader << '\n';
    }
    if (!out) {
        throw DataError("cannot write " + spec.output_path.string());
    }

    DatasetProvider provider(spec.datasets, spec.seed, spec.classifier.train_fraction);
    RunContext context(provider, spec.classifier);
    std::map<std::string, Meter> meters;

    // Configs differing only in phase are adjacent; run each repetition's phases back to back.
    std::size_t begin = 0;
    while (begin < configs.size()) {
        std::size_t end = begin + 1;
        auto same_cell = [](const ExperimentConfig& a, const ExperimentConfig& b) {
            ExperimentConfig x = a;
            x.phase = b.phase;
            return x == b;
        };
        while (end < configs.size() && same_cell(configs[begin], configs[end])) {
            ++end;
        }
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            for (std::size_t i = begin; i < end; ++i) {
                ExperimentConfig config = configs[i];
                config.seed = spec.seed + static_cast<std::uint64_t>(rep);
                MeasurementRecord probe;
                probe.config = config;
                probe.repetition = rep;
                if (done.count(probe.key()) != 0) {
                    ++summary.skipped;
                    continue;
                }
                MeasurementRecord record;
                try {
                    auto it = meters.find(config.device);
                    if (it == meters.end()) {
                        it = meters.emplace(config.device, factory(find_profile(spec.profiles, config.device))).first;
                    }
                    record = run_experiment(config, rep, it->second, context);
                } catch (const std::exception& e) {
                    record = probe;
                    record.status = "failed";
                    summary.failures.push_back(probe.key() + ": " + e.what());
                    warn("run failed: " + summary.failures.back());
                }
                out << format_record(record) << '\n';
                out.flush();
                ++summary.executed;
                if (options.on_record) {
                    options.on_record(record);
                }
                done.insert(record.key());
                summary.records.push_back(std::move(record));
            }
        }
        begin = end;
    }
    return summary;
}

}  // namespace edgebench

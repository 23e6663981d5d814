#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "edgebench/common.hpp"
#include "edgebench/datasets.hpp"
#include "edgebench/encoding.hpp"
#include "edgebench/harness.hpp"
#include "edgebench/metering.hpp"
#include "edgebench/metrics.hpp"
#include "edgebench/predictor_io.hpp"
#include "edgebench/records.hpp"

namespace py = pybind11;
using namespace edgebench;

namespace {

ExperimentConfig config_from_dict(const py::dict& d) {
    ExperimentConfig c;
    for (const auto& [k, v] : d) {
        const auto key = py::cast<std::string>(k);
        if (key == "algorithm") c.algorithm = parse_algorithm(py::cast<std::string>(v));
        else if (key == "phase") c.phase = parse_phase(py::cast<std::string>(v));
        else if (key == "dataset") c.dataset = py::cast<std::string>(v);
        else if (key == "n_images") c.n_images = py::cast<int>(v);
        else if (key == "resolution") c.resolution = py::cast<int>(v);
        else if (key == "channels") c.channels = py::cast<int>(v);
        else if (key == "n_classes") c.n_classes = py::cast<int>(v);
        else if (key == "color") c.color = py::cast<bool>(v);
        else if (key == "device") c.device = py::cast<std::string>(v);
        else if (key == "workers") c.workers = py::cast<int>(v);
        else if (key == "seed") c.seed = py::cast<std::uint64_t>(v);
        else throw ConfigError("unknown configuration field '" + key + "'");
    }
    return c;
}

py::dict config_to_dict(const ExperimentConfig& c) {
    py::dict d;
    d["algorithm"] = to_string(c.algorithm);
    d["phase"] = to_string(c.phase);
    d["dataset"] = c.dataset;
    d["n_images"] = c.n_images;
    d["resolution"] = c.resolution;
    d["channels"] = c.channels;
    d["n_classes"] = c.n_classes;
    d["color"] = c.color;
    d["device"] = c.device;
    d["workers"] = c.workers;
    d["seed"] = c.seed;
    return d;
}

py::dict record_to_dict(const MeasurementRecord& r) {
    py::dict d = config_to_dict(r.config);
    d["repetition"] = r.repetition;
    d["duration_s"] = r.duration_s;
    d["energy_j"] = r.energy_j;
    d["accuracy"] = r.accuracy ? py::cast(*r.accuracy) : py::none();
    d["status"] = r.status;
    d["key"] = r.key();
    return d;
}

py::list records_to_list(const RecordSet& rs) {
    py::list out;
    for (const auto& r : rs) out.append(record_to_dict(r));
    return out;
}

}  // namespace

PYBIND11_MODULE(_edgebench, m) {
    m.doc() = "Energy benchmarking of image classifiers and energy regression";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("name", &Dataset::name)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("n_classes", &Dataset::n_classes)
        .def("__len__", &Dataset::size)
        .def_property_readonly("feature_count", &Dataset::feature_count)
        .def_property_readonly("zero_fraction", &Dataset::zero_fraction)
        .def("pixels", [](const Dataset& d, std::size_t i) {
            if (i >= d.size()) throw py::index_error("image index out of range");
            return d.images[i].pixels;
        });

    m.def(
        "generate_synthetic",
        [](int n_images, int resolution, int channels, int n_classes, double sparsity, double separation,
           std::uint64_t seed, const std::string& name) {
            SyntheticSpec s;
            s.n_images = n_images;
            s.resolution = resolution;
            s.channels = channels;
            s.n_classes = n_classes;
            s.sparsity = sparsity;
            s.class_separation = separation;
            s.seed = seed;
            s.name = name;
            return generate_synthetic(s);
        },
        py::arg("n_images") = 300, py::arg("resolution") = 28, py::arg("channels") = 1, py::arg("n_classes") = 10,
        py::arg("sparsity") = 0.0, py::arg("separation") = 1.0, py::arg("seed") = 1,
        py::arg("name") = "synthetic");
    m.def("save_dataset", &save_dataset_csv, py::arg("dataset"), py::arg("path"));
    m.def("load_dataset", &load_dataset_csv, py::arg("path"));

    m.def(
        "enumerate_matrix",
        [](const std::optional<std::filesystem::path>& path) {
            const MatrixSpec spec = path ? load_matrix_spec(*path) : MatrixSpec{};
            py::list out;
            for (const auto& c : enumerate_matrix(spec)) out.append(config_to_dict(c));
            return out;
        },
        py::arg("config") = py::none(), "Configurations of a matrix file, or of the default matrix.");
    m.def(
        "run_matrix",
        [](const std::filesystem::path& path, bool resume) {
            const MatrixSpec spec = load_matrix_spec(path);
            RunOptions opts;
            opts.resume = resume;
            RunSummary s;
            {
                py::gil_scoped_release release;
                s = run_matrix(spec, opts);
            }
            py::dict d;
            d["executed"] = s.executed;
            d["skipped"] = s.skipped;
            d["failures"] = s.failures;
            d["records"] = records_to_list(s.records);
            return d;
        },
        py::arg("config"), py::arg("resume") = false);
    m.def(
        "load_records", [](const std::filesystem::path& p) { return records_to_list(load_records(p)); },
        py::arg("path"));

    m.def("feature_names", [] {
        const auto& n = feature_names();
        return std::vector<std::string>(n.begin(), n.end());
    });
    m.def(
        "encode",
        [](const py::dict& config) {
            const auto e = encode(config_from_dict(config));
            return py::make_tuple(std::vector<double>(e.features.begin(), e.features.end()), e.unseen_factors);
        },
        py::arg("config"), "Returns (14 features, unseen factor names).");

    py::class_<EnergyPredictor>(m, "Predictor")
        .def_property_readonly("kind", [](const EnergyPredictor& p) { return to_string(kind_of(p.model)); })
        .def("predict", [](const EnergyPredictor& p, const py::dict& c) { return p.predict(config_from_dict(c)); },
             py::arg("config"))
        .def("save", [](const EnergyPredictor& p, const std::filesystem::path& path) { save_predictor(p, path); },
             py::arg("path"))
        .def("importance", [](const EnergyPredictor& p) {
            const auto* forest = std::get_if<Forest>(&p.model);
            if (!forest) throw ConfigError("importance needs a random forest model");
            return feature_importance(*forest).weights;
        });

    m.def(
        "fit_predictor",
        [](const std::filesystem::path& records, const std::string& model, int trees, std::uint64_t seed,
           int workers) {
            const EnergyTable t = build_energy_table(load_records(records));
            if (t.records.empty()) throw DataError(records.string() + " has no successful records");
            ModelSpec spec;
            spec.kind = parse_regressor_kind(model);
            spec.forest.n_trees = trees;
            spec.forest.seed = seed;
            spec.workers = workers;
            py::gil_scoped_release release;
            return EnergyPredictor{fit_regressor(t.x, t.y, spec), EncodingSchema{}};
        },
        py::arg("records"), py::arg("model") = "rf", py::arg("trees") = 800, py::arg("seed") = 0,
        py::arg("workers") = 1);
    m.def("load_predictor", &load_predictor, py::arg("path"));

    m.def(
        "r_squared",
        [](const std::vector<double>& p, const std::vector<double>& t) { return r_squared(p, t); },
        py::arg("predicted"), py::arg("truth"));
    m.def(
        "rmse", [](const std::vector<double>& p, const std::vector<double>& t) { return rmse(p, t); },
        py::arg("predicted"), py::arg("truth"));
    m.def("nrmse", &nrmse, py::arg("rmse"), py::arg("range"));

    m.def(
        "integrate_trace",
        [](const std::vector<double>& t, const std::vector<double>& volts, const std::vector<double>& amps,
           double start, double stop) {
            if (t.size() != volts.size() || t.size() != amps.size()) {
                throw ConfigError("integrate_trace: t, volts and amps must have equal length");
            }
            PowerTrace trace;
            for (std::size_t i = 0; i < t.size(); ++i) trace.samples.push_back({t[i], volts[i], amps[i]});
            return integrate_trace(trace, start, stop);
        },
        py::arg("t"), py::arg("volts"), py::arg("amps"), py::arg("start"), py::arg("stop"));
    m.def(
        "model_energy",
        [](const std::string& device, double duration_s, int cores) {
            return model_energy(find_profile(default_profiles(), device), duration_s, cores);
        },
        py::arg("device"), py::arg("duration_s"), py::arg("active_cores") = 1);
}

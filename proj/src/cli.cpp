#include "edgebench/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "edgebench/common.hpp"
#include "edgebench/datasets.hpp"
#include "edgebench/evaluation.hpp"
#include "edgebench/predictor_io.hpp"
#include "edgebench/records.hpp"
#include "edgebench/validation.hpp"
#include "json.hpp"

namespace edgebench {

namespace {

std::string num(double v) {
    if (!std::isfinite(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

nlohmann::json json_num(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

struct Options {
    // dataset gen
    SyntheticSpec gen;
    std::string out_path;
    // dataset ingest
    std::string image_dir;
    int resolution = 28;
    bool grayscale = false;
    // dataset standardize
    std::string in_path;
    std::vector<int> sizes{300, 600, 900, 1200, 1500};
    std::vector<int> resolutions{17, 22, 28};
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    // bench run
    std::string config_path;
    bool resume = false;
    // fit / predict / evaluate
    std::string model_kind = "rf";
    std::string model_path;
    int trees = ForestParams{}.n_trees;
    int workers = 1;
    bool strict = false;
    int cv_folds = 0;
    int search_iter = 0;
    std::string report_path;
    bool plot_data = false;
};

ModelSpec model_spec(const Options& o) {
    ModelSpec spec;
    spec.kind = parse_regressor_kind(o.model_kind);
    spec.ols_strict = o.strict;
    spec.forest.n_trees = o.trees;
    spec.forest.seed = o.seed;
    spec.workers = o.workers;
    return spec;
}

std::map<std::string, double> predict_table(const EnergyPredictor& p, const EnergyTable& t) {
    std::map<std::string, double> out;
    const Vector pred = predict_all(p.model, t.x);
    for (std::size_t i = 0; i < t.keys.size(); ++i) {
        out[t.keys[i]] = pred(static_cast<Eigen::Index>(i));
    }
    return out;
}

void warn_unseen(const EnergyTable& t) {
    if (t.unseen_rows > 0) {
        warn(std::to_string(t.unseen_rows) + " row(s) contain levels outside the encoding; they use the reference coding");
    }
}

int cmd_dataset_gen(const Options& o, std::ostream& out) {
    const Dataset d = generate_synthetic(o.gen);
    save_dataset_csv(d, o.out_path);
    out << "wrote " << d.images.size() << " images to " << o.out_path << '\n';
    return kExitOk;
}

int cmd_dataset_ingest(const Options& o, std::ostream& out) {
    const Dataset d = ingest_images(o.image_dir, o.resolution, o.grayscale);
    save_dataset_csv(d, o.out_path);
    out << "wrote " << d.images.size() << " images in " << d.n_classes << " classes to " << o.out_path << '\n';
    return kExitOk;
}

int cmd_dataset_standardize(const Options& o, std::ostream& out) {
    const Dataset base = load_dataset_csv(o.in_path);
    const auto variants = standardize(base, o.sizes, o.resolutions, o.seed);
    std::filesystem::create_directories(o.out_dir);
    for (const auto& v : variants) {
        const auto path = std::filesystem::path(o.out_dir) /
                          (base.name + "_" + std::to_string(v.images.size()) + "_" +
                           std::to_string(v.images.front().height) + ".csv");
        save_dataset_csv(v, path);
        out << path.string() << '\n';
    }
    return kExitOk;
}

int cmd_bench_run(const Options& o, std::ostream& out) {
    MatrixSpec spec = load_matrix_spec(o.config_path);
    if (!o.out_path.empty()) {
        spec.output_path = o.out_path;
    }
    RunOptions ro;
    ro.resume = o.resume;
    const RunSummary s = run_matrix(spec, ro);
    out << "executed " << s.executed << ", skipped " << s.skipped << ", failed " << s.failures.size() << "; "
        << s.records.size() << " records in " << spec.output_path.string() << '\n';
    return kExitOk;
}

int cmd_fit(const Options& o, std::ostream& out) {
    const EnergyTable t = build_energy_table(load_records(o.in_path));
    if (t.records.empty()) {
        throw DataError(o.in_path + " has no successful records");
    }
    warn_unseen(t);
    ModelSpec spec = model_spec(o);
    if (o.search_iter > 0) {
        if (spec.kind != RegressorKind::rf) {
            throw ConfigError("--search only applies to --model rf");
        }
        const int k = o.cv_folds > 0 ? o.cv_folds : 10;
        const SearchResult s = random_search(t.x, t.y, tuning_grid(), o.search_iter, k, o.seed, o.workers);
        spec.forest = s.best;
        out << "search tried=" << s.tried.size() << " best_cv_r_squared=" << num(s.best_score)
            << " n_trees=" << s.best.n_trees << " max_features=" << s.best.max_features
            << " max_depth=" << s.best.max_depth << " bootstrap=" << (s.best.bootstrap ? 1 : 0)
            << " min_samples_leaf=" << s.best.min_samples_leaf << " min_samples_split=" << s.best.min_samples_split
            << '\n';
    }
    if (o.cv_folds > 0) {
        const CvResult cv = kfold_cv(t.x, t.y, o.cv_folds, spec, o.seed);
        out << "cv k=" << o.cv_folds << " mean_r_squared=" << num(cv.mean_r_squared)
            << " std_r_squared=" << num(cv.std_r_squared) << " mean_rmse=" << num(cv.mean_rmse)
            << " pooled_r_squared=" << num(cv.pooled_r_squared) << '\n';
    }
    const EnergyPredictor p{fit_regressor(t.x, t.y, spec), EncodingSchema{}};
    save_predictor(p, o.model_path);
    out << "fitted " << o.model_kind << " on " << t.records.size() << " rows -> " << o.model_path << '\n';
    return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
    const EnergyPredictor p = load_predictor(o.model_path);
    RecordSet records = load_records(o.in_path);
    for (auto& r : records) {
        r.status = "ok";  // prediction needs only the configuration
    }
    const EnergyTable t = build_energy_table(records, p.schema);
    warn_unseen(t);
    const Vector pred = predict_all(p.model, t.x);
    out << "key,energy_j,predicted_energy_j\n";
    for (std::size_t i = 0; i < t.keys.size(); ++i) {
        out << t.keys[i] << ',' << num(t.records[i].energy_j) << ',' << num(pred(static_cast<Eigen::Index>(i))) << '\n';
    }
    return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
    const EnergyPredictor p = load_predictor(o.model_path);
    const EnergyTable t = build_energy_table(load_records(o.in_path), p.schema);
    if (t.records.empty()) {
        throw DataError(o.in_path + " has no successful records");
    }
    warn_unseen(t);
    const GroupedReport report = grouped_report(t.records, predict_table(p, t));
    if (!o.report_path.empty()) {
        write_report_csv(report, o.report_path);
    }
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& r : report.rows) {
        groups.push_back({{"algorithm", r.algorithm},
                          {"phase", r.phase},
                          {"dataset", r.dataset},
                          {"n", r.n},
                          {"rmse", json_num(r.metrics.rmse)},
                          {"range", json_num(r.metrics.range)},
                          {"nrmse", json_num(r.metrics.nrmse)},
                          {"r_squared", json_num(r.metrics.r_squared)}});
    }
    const Metrics& m = report.total.metrics;
    const nlohmann::json j{{"model", to_string(kind_of(p.model))},
                           {"n", report.total.n},
                           {"r_squared", json_num(m.r_squared)},
                           {"rmse", json_num(m.rmse)},
                           {"range", json_num(m.range)},
                           {"nrmse", json_num(m.nrmse)},
                           {"groups", groups}};
    out << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_importance(const Options& o, std::ostream& out) {
    const EnergyPredictor p = load_predictor(o.model_path);
    const auto* forest = std::get_if<Forest>(&p.model);
    if (forest == nullptr) {
        throw ConfigError("importance needs a random forest model, got " + to_string(kind_of(p.model)));
    }
    const FeatureImportance imp = feature_importance(*forest);
    out << "feature,importance\n";
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        out << feature_names()[i] << ',' << num(imp.weights[i]) << '\n';
    }
    return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
    const RecordSet records = load_records(o.in_path);
    std::filesystem::create_directories(o.out_dir);
    if (o.plot_data) {
        for (const auto& path : write_plot_data(records, o.out_dir)) {
            out << path.string() << '\n';
        }
    }
    if (!o.model_path.empty()) {
        const EnergyPredictor p = load_predictor(o.model_path);
        const EnergyTable t = build_energy_table(records, p.schema);
        const auto path = std::filesystem::path(o.out_dir) / "grouped_report.csv";
        write_report_csv(grouped_report(t.records, predict_table(p, t)), path);
        out << path.string() << '\n';
    }
    if (!o.plot_data && o.model_path.empty()) {
        throw ConfigError("report: nothing to do; pass --plot-data and/or --model");
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Edge classifier energy benchmark and energy predictor", "edgebench"};
    app.require_subcommand(1);
    std::function<int(const Options&, std::ostream&)> action;
    auto on = [&action](auto fn) { return [&action, fn]() { action = fn; }; };

    auto* dataset = app.add_subcommand("dataset", "Generate, ingest or standardize image datasets");
    dataset->require_subcommand(1);
    auto* gen = dataset->add_subcommand("gen", "Write a synthetic dataset as CSV");
    gen->add_option("--out", o.out_path, "Output CSV")->required();
    gen->add_option("--images", o.gen.n_images, "Number of images")->capture_default_str();
    gen->add_option("--resolution", o.gen.resolution, "Square side in pixels")->capture_default_str();
    gen->add_option("--channels", o.gen.channels, "1 or 3")->capture_default_str();
    gen->add_option("--classes", o.gen.n_classes, "Number of classes")->capture_default_str();
    gen->add_option("--sparsity", o.gen.sparsity, "Fraction of zero pixels in [0,1)")->capture_default_str();
    gen->add_option("--separation", o.gen.class_separation, "Class signal strength")->capture_default_str();
    gen->add_option("--seed", o.gen.seed, "Random seed")->capture_default_str();
    gen->add_option("--name", o.gen.name, "Dataset name")->capture_default_str();
    gen->callback(on(cmd_dataset_gen));

    auto* ingest = dataset->add_subcommand("ingest", "Load a class-per-subdirectory image tree");
    ingest->add_option("--dir", o.image_dir, "Image root")->required()->check(CLI::ExistingDirectory);
    ingest->add_option("--resolution", o.resolution, "Output side in pixels")->capture_default_str();
    ingest->add_flag("--grayscale", o.grayscale, "Convert to one channel");
    ingest->add_option("--out", o.out_path, "Output CSV")->required();
    ingest->callback(on(cmd_dataset_ingest));

    auto* stdz = dataset->add_subcommand("standardize", "Write size x resolution variants of a dataset");
    stdz->add_option("--in", o.in_path, "Dataset CSV")->required()->check(CLI::ExistingFile);
    stdz->add_option("--sizes", o.sizes, "Image counts")->delimiter(',')->capture_default_str();
    stdz->add_option("--resolutions", o.resolutions, "Square sides")->delimiter(',')->capture_default_str();
    stdz->add_option("--seed", o.seed, "Subset seed")->capture_default_str();
    stdz->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
    stdz->callback(on(cmd_dataset_standardize));

    auto* bench = app.add_subcommand("bench", "Run the experiment matrix");
    bench->require_subcommand(1);
    auto* run = bench->add_subcommand("run", "Execute every configuration and repetition of a matrix file");
    run->add_option("--config", o.config_path, "Matrix JSON file")->required()->check(CLI::ExistingFile);
    run->add_flag("--resume", o.resume, "Skip runs already present in the output file");
    run->add_option("--out", o.out_path, "Override the records CSV path");
    run->callback(on(cmd_bench_run));

    auto* fit = app.add_subcommand("fit", "Fit an energy regressor on a records CSV");
    fit->add_option("--model", o.model_kind, "rf, gp or ols")
        ->check(CLI::IsMember({"rf", "gp", "ols"}))
        ->capture_default_str();
    fit->add_option("--in", o.in_path, "Records CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", o.model_path, "Model file to write")->required();
    fit->add_option("--trees", o.trees, "Forest size")->capture_default_str();
    fit->add_option("--seed", o.seed, "Forest and fold seed")->capture_default_str();
    fit->add_option("--workers", o.workers, "Threads for forest fitting")->capture_default_str();
    fit->add_flag("--strict", o.strict, "OLS: reject rank-deficient inputs");
    fit->add_option("--cv", o.cv_folds, "Also report k-fold cross-validation");
    fit->add_option("--search", o.search_iter, "rf: random search over this many grid points (10-fold CV unless --cv)");
    fit->callback(on(cmd_fit));

    auto* predict = app.add_subcommand("predict", "Predict energy for each row of a records CSV");
    predict->add_option("--model", o.model_path, "Model file")->required()->check(CLI::ExistingFile);
    predict->add_option("--in", o.in_path, "Records CSV")->required()->check(CLI::ExistingFile);
    predict->callback(on(cmd_predict));

    auto* evaluate = app.add_subcommand("evaluate", "Score a model on held-out records (JSON report)");
    evaluate->add_option("--model", o.model_path, "Model file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--in", o.in_path, "Records CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--report", o.report_path, "Also write the grouped report as CSV");
    evaluate->callback(on(cmd_evaluate));

    auto* importance = app.add_subcommand("importance", "Print random forest feature importances");
    importance->add_option("--model", o.model_path, "Forest model file")->required()->check(CLI::ExistingFile);
    importance->callback(on(cmd_importance));

    auto* report = app.add_subcommand("report", "Export plot series and grouped metrics");
    report->add_option("--in", o.in_path, "Records CSV")->required()->check(CLI::ExistingFile);
    report->add_flag("--plot-data", o.plot_data, "Write energy_vs_size.csv and energy_vs_resolution.csv");
    report->add_option("--model", o.model_path, "Also write grouped_report.csv for this model")
        ->check(CLI::ExistingFile);
    report->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
    report->callback(on(cmd_report));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code != 0) {
            return kExitUsage;
        }
        return kExitOk;
    }

    WarningSink previous = set_warning_sink([&err](const std::string& msg) { err << "warning: " << msg << '\n'; });
    int code = kExitRuntime;
    try {
        code = action(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    set_warning_sink(previous);
    return code;
}

}  // namespace edgebench

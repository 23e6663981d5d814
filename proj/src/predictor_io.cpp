#include "edgebench/predictor_io.hpp"

#include <fstream>
#include <sstream>

#include "edgebench/common.hpp"
#include "json.hpp"

namespace edgebench {

using nlohmann::json;

EnergyTable build_energy_table(const RecordSet& records, const EncodingSchema& schema) {
    schema.validate();
    EnergyTable t;
    for (const auto& r : records) {
        if (r.ok()) {
            t.records.push_back(r);
        }
    }
    const auto n = static_cast<Eigen::Index>(t.records.size());
    t.x.resize(n, static_cast<Eigen::Index>(kFeatureCount));
    t.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = t.records[static_cast<std::size_t>(i)];
        const EncodedRow e = encode(r.config, schema);
        for (std::size_t c = 0; c < kFeatureCount; ++c) {
            t.x(i, static_cast<Eigen::Index>(c)) = e.features[c];
        }
        t.y(i) = r.energy_j;
        t.keys.push_back(r.key());
        if (e.has_unseen()) {
            ++t.unseen_rows;
        }
    }
    return t;
}

double EnergyPredictor::predict(const ExperimentConfig& config) const {
    const EncodedRow e = encode(config, schema);
    if (e.has_unseen()) {
        std::string list;
        for (const auto& f : e.unseen_factors) {
            list += (list.empty() ? "" : ", ") + f;
        }
        warn("unseen level for " + list + "; encoded as the reference level");
    }
    const Vector x = Eigen::Map<const Vector>(e.features.data(), static_cast<Eigen::Index>(kFeatureCount));
    return predict_one(model, x);
}

namespace {

json matrix_json(const Matrix& m) {
    std::vector<double> values(static_cast<std::size_t>(m.size()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), m.rows(),
                                                                                        m.cols()) = m;
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", values}};
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto values = j.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw DataError("matrix payload has " + std::to_string(values.size()) + " values, expected rows*cols");
    }
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), rows,
                                                                                                   cols);
}

std::vector<double> to_std(const Vector& v) {
    return {v.data(), v.data() + v.size()};
}

Vector from_std(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json forest_params_json(const ForestParams& p) {
    return {{"n_trees", p.n_trees},
            {"max_features", p.max_features},
            {"max_depth", p.max_depth},
            {"bootstrap", p.bootstrap},
            {"min_samples_leaf", p.min_samples_leaf},
            {"min_samples_split", p.min_samples_split},
            {"seed", p.seed}};
}

ForestParams forest_params_from(const json& j) {
    ForestParams p;
    p.n_trees = j.at("n_trees");
    p.max_features = j.at("max_features");
    p.max_depth = j.at("max_depth");
    p.bootstrap = j.at("bootstrap");
    p.min_samples_leaf = j.at("min_samples_leaf");
    p.min_samples_split = j.at("min_samples_split");
    p.seed = j.at("seed");
    return p;
}

struct ToJson {
    json operator()(const LinearModel& m) const {
        return {{"kind", "ols"},
                {"intercept", m.intercept},
                {"coefficients", to_std(m.coefficients)},
                {"dropped_columns", m.dropped_columns}};
    }
    json operator()(const GpModel& m) const {
        return {{"kind", "gp"},
                {"lengthscale", m.params.lengthscale},
                {"signal_variance", m.params.signal_variance},
                {"noise_variance", m.params.noise_variance},
                {"train_x", matrix_json(m.train_x)},
                {"alpha", to_std(m.alpha)},
                {"chol_l", matrix_json(m.chol_l)}};
    }
    json operator()(const Forest& f) const {
        json trees = json::array();
        for (const auto& t : f.trees) {
            std::vector<int> feature, left, right;
            std::vector<double> threshold, value, sse;
            std::vector<std::size_t> count;
            for (const auto& n : t.nodes) {
                feature.push_back(n.feature);
                left.push_back(n.left);
                right.push_back(n.right);
                threshold.push_back(n.threshold);
                value.push_back(n.value);
                sse.push_back(n.sse);
                count.push_back(n.n_samples);
            }
            trees.push_back({{"feature", feature},
                             {"threshold", threshold},
                             {"left", left},
                             {"right", right},
                             {"value", value},
                             {"n_samples", count},
                             {"sse", sse}});
        }
        return {{"kind", "rf"},
                {"n_features", f.n_features},
                {"params", forest_params_json(f.params)},
                {"trees", trees},
                {"impurity_decrease", f.impurity_decrease}};
    }
};

Regressor regressor_from(const json& j) {
    const auto kind = parse_regressor_kind(j.at("kind").get<std::string>());
    switch (kind) {
        case RegressorKind::ols: {
            LinearModel m;
            m.intercept = j.at("intercept");
            m.coefficients = from_std(j.at("coefficients").get<std::vector<double>>());
            m.dropped_columns = j.at("dropped_columns").get<std::vector<std::size_t>>();
            return m;
        }
        case RegressorKind::gp: {
            GpModel m;
            m.params.lengthscale = j.at("lengthscale");
            m.params.signal_variance = j.at("signal_variance");
            m.params.noise_variance = j.at("noise_variance");
            m.params.validate();
            m.train_x = matrix_from(j.at("train_x"));
            m.alpha = from_std(j.at("alpha").get<std::vector<double>>());
            m.chol_l = matrix_from(j.at("chol_l"));
            if (m.alpha.size() != m.train_x.rows() || m.chol_l.rows() != m.train_x.rows() ||
                m.chol_l.cols() != m.train_x.rows()) {
                throw DataError("gp payload dimensions disagree");
            }
            return m;
        }
        case RegressorKind::rf: {
            Forest f;
            f.n_features = j.at("n_features");
            f.params = forest_params_from(j.at("params"));
            f.impurity_decrease = j.at("impurity_decrease").get<std::vector<std::vector<double>>>();
            for (const auto& tj : j.at("trees")) {
                const auto feature = tj.at("feature").get<std::vector<int>>();
                const auto left = tj.at("left").get<std::vector<int>>();
                const auto right = tj.at("right").get<std::vector<int>>();
                const auto threshold = tj.at("threshold").get<std::vector<double>>();
                const auto value = tj.at("value").get<std::vector<double>>();
                const auto count = tj.at("n_samples").get<std::vector<std::size_t>>();
                const auto sse = tj.at("sse").get<std::vector<double>>();
                const std::size_t n = feature.size();
                if (n == 0 || left.size() != n || right.size() != n || threshold.size() != n || value.size() != n ||
                    count.size() != n || sse.size() != n) {
                    throw DataError("tree arrays have inconsistent lengths");
                }
                RegressionTree t;
                for (std::size_t i = 0; i < n; ++i) {
                    const bool split = feature[i] >= 0;
                    if (split && (static_cast<std::size_t>(feature[i]) >= f.n_features || left[i] <= static_cast<int>(i) ||
                                  right[i] <= static_cast<int>(i) || static_cast<std::size_t>(left[i]) >= n ||
                                  static_cast<std::size_t>(right[i]) >= n)) {
                        throw DataError("tree node " + std::to_string(i) + " has invalid links");
                    }
                    t.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i], count[i], sse[i]});
                }
                f.trees.push_back(std::move(t));
            }
            if (f.trees.empty() || f.impurity_decrease.size() != f.trees.size()) {
                throw DataError("forest payload has no trees or mismatched importance table");
            }
            return f;
        }
    }
    throw DataError("unreachable");
}

json schema_json(const EncodingSchema& s) {
    return {{"feature_names", feature_names()},
            {"resolutions", s.resolutions},
            {"sizes", s.sizes},
            {"class_counts", s.class_counts},
            {"devices", s.devices}};
}

EncodingSchema schema_from(const json& j) {
    const auto names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& expected = feature_names();
    if (!std::equal(names.begin(), names.end(), expected.begin(), expected.end())) {
        throw DataError("model feature schema does not match this build's 14-column encoding");
    }
    EncodingSchema s;
    s.resolutions = j.at("resolutions");
    s.sizes = j.at("sizes");
    s.class_counts = j.at("class_counts");
    s.devices = j.at("devices");
    s.validate();
    return s;
}

}  // namespace

std::string serialize_predictor(const EnergyPredictor& predictor) {
    json j{{"format", "edgebench-regressor"},
           {"version", kRegressorFormatVersion},
           {"schema", schema_json(predictor.schema)},
           {"model", std::visit(ToJson{}, predictor.model)}};
    return j.dump();
}

EnergyPredictor deserialize_predictor(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "edgebench-regressor") {
            throw DataError("not an edgebench regressor file");
        }
        if (j.at("version").get<int>() != kRegressorFormatVersion) {
            throw DataError("unsupported regressor version " + j.at("version").dump());
        }
        EnergyPredictor p{regressor_from(j.at("model")), schema_from(j.at("schema"))};
        if (input_width(p.model) != kFeatureCount) {
            throw DataError("model expects " + std::to_string(input_width(p.model)) + " inputs, encoding has " +
                            std::to_string(kFeatureCount));
        }
        return p;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed regressor file: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("malformed regressor file: ") + e.what());
    }
}

void save_predictor(const EnergyPredictor& predictor, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << serialize_predictor(predictor);
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

EnergyPredictor load_predictor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_predictor(ss.str());
}

}  // namespace edgebench

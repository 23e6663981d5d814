#include "edgebench/model_io.hpp"

#include <fstream>
#include <sstream>

#include "edgebench/common.hpp"
#include "json.hpp"

namespace edgebench {

using nlohmann::json;

namespace {

json matrix_to_json(const FeatureMatrix& m) {
    json j{{"rows", m.rows()}, {"cols", m.cols()}};
    if (m.is_sparse()) {
        const auto& s = m.sparse_data();
        j["storage"] = "csr";
        j["offsets"] = s.row_offsets();
        j["indices"] = s.column_indices();
        j["values"] = s.values();
    } else {
        j["storage"] = "dense";
        j["values"] = m.dense_data();
    }
    return j;
}

FeatureMatrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    if (j.at("storage") == "csr") {
        return FeatureMatrix::sparse(SparseMatrix(rows, cols, j.at("offsets").get<std::vector<std::size_t>>(),
                                                  j.at("indices").get<std::vector<std::uint32_t>>(),
                                                  j.at("values").get<std::vector<double>>()));
    }
    return FeatureMatrix::dense(j.at("values").get<std::vector<double>>(), rows, cols);
}

struct ToJson {
    json operator()(const KnnModel& m) const {
        return {{"kind", "knn"}, {"k", m.k}, {"n_classes", m.n_classes}, {"labels", m.labels},
                {"train", matrix_to_json(m.train)}};
    }
    json operator()(const LogRegModel& m) const {
        return {{"kind", "logreg"},
                {"n_classes", m.n_classes},
                {"n_features", m.n_features},
                {"weights", m.weights},
                {"bias", m.bias},
                {"learning_rate", m.params.learning_rate},
                {"iterations", m.params.iterations},
                {"l2", m.params.l2}};
    }
    json operator()(const SvmModel& m) const {
        json pairs = json::array();
        for (const auto& p : m.pairs) {
            pairs.push_back({{"positive", p.positive},
                             {"negative", p.negative},
                             {"support_indices", p.support_indices},
                             {"alpha", p.alpha},
                             {"label_sign", p.label_sign},
                             {"rho", p.rho},
                             {"iterations", p.iterations},
                             {"reached_iteration_cap", p.reached_iteration_cap},
                             {"support_vectors", matrix_to_json(p.support_vectors)}});
        }
        return {{"kind", "svm"}, {"n_classes", m.n_classes}, {"gamma", m.gamma}, {"c", m.c}, {"pairs", pairs}};
    }
};

}  // namespace

std::string serialize_classifier(const ClassifierModel& model) {
    json j = std::visit(ToJson{}, model);
    j["format"] = "edgebench-classifier";
    j["version"] = kClassifierFormatVersion;
    return j.dump();
}

ClassifierModel deserialize_classifier(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != "edgebench-classifier") {
            throw DataError("not a classifier model file");
        }
        if (j.at("version").get<int>() != kClassifierFormatVersion) {
            throw DataError("unsupported classifier model version " + j.at("version").dump());
        }
        const std::string kind = j.at("kind");
        if (kind == "knn") {
            return KnnModel{matrix_from_json(j.at("train")), j.at("labels").get<std::vector<int>>(),
                            j.at("n_classes").get<int>(), j.at("k").get<int>()};
        }
        if (kind == "logreg") {
            LogRegModel m;
            m.n_classes = j.at("n_classes");
            m.n_features = j.at("n_features");
            m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
            m.bias = j.at("bias").get<std::vector<double>>();
            m.params = {j.at("learning_rate"), j.at("iterations"), j.at("l2")};
            return m;
        }
        if (kind == "svm") {
            SvmModel m;
            m.n_classes = j.at("n_classes");
            m.gamma = j.at("gamma");
            m.c = j.at("c");
            for (const auto& pj : j.at("pairs")) {
                PairwiseSvm p;
                p.positive = pj.at("positive");
                p.negative = pj.at("negative");
                p.support_indices = pj.at("support_indices").get<std::vector<std::size_t>>();
                p.alpha = pj.at("alpha").get<std::vector<double>>();
                p.label_sign = pj.at("label_sign").get<std::vector<double>>();
                p.rho = pj.at("rho");
                p.iterations = pj.at("iterations");
                p.reached_iteration_cap = pj.at("reached_iteration_cap");
                p.support_vectors = matrix_from_json(pj.at("support_vectors"));
                m.pairs.push_back(std::move(p));
            }
            return m;
        }
        throw DataError("unknown classifier kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed classifier model: ") + e.what());
    }
}

void save_classifier(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << serialize_classifier(model) << '\n';
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_classifier(ss.str());
}

}  // namespace edgebench

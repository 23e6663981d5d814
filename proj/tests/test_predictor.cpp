#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "edgebench/encoding.hpp"
#include "edgebench/forest.hpp"
#include "edgebench/predictor_io.hpp"
#include "edgebench/regression.hpp"
#include "edgebench/validation.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace edgebench;

namespace {

oracle::Mat to_rows(const Matrix& m) {
    oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = m(r, c);
        }
    }
    return out;
}

oracle::Vec to_vec(const Vector& v) {
    return {v.data(), v.data() + v.size()};
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = n(rng);
        }
    }
    return m;
}

Matrix random_binary(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::bernoulli_distribution b(0.5);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = b(rng) ? 1.0 : 0.0;
        }
    }
    return m;
}

double predict_row(const Forest& f, const Vector& row) {
    return rf_predict(f, std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
}

double mse(const Vector& a, const Vector& b) {
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

ForestParams memorizing_tree() {
    ForestParams p;
    p.n_trees = 1;
    p.bootstrap = false;
    p.max_depth = -1;
    p.min_samples_leaf = 1;
    p.min_samples_split = 2;
    p.max_features = 0;
    return p;
}

ExperimentConfig config_of(int res, int size, int classes, Phase phase, bool color, int channels, Algorithm alg,
                           const std::string& device) {
    ExperimentConfig c;
    c.resolution = res;
    c.n_images = size;
    c.n_classes = classes;
    c.phase = phase;
    c.color = color;
    c.channels = channels;
    c.algorithm = alg;
    c.device = device;
    c.dataset = "d";
    return c;
}

}  // namespace

TEST_SUITE("encoding") {
    TEST_CASE("resolution levels") {
        ExperimentConfig c;
        c.resolution = 17;
        CHECK(encode(c).features[0] == 0.0);
        CHECK(encode(c).features[1] == 0.0);
        c.resolution = 22;
        CHECK(encode(c).features[0] == 1.0);
        CHECK(encode(c).features[1] == 0.0);
        c.resolution = 28;
        CHECK(encode(c).features[0] == 0.0);
        CHECK(encode(c).features[1] == 1.0);
    }

    TEST_CASE("unseen class count falls back to the reference and is flagged") {
        ExperimentConfig c;
        c.n_classes = 5;
        const auto e = encode(c);
        CHECK(e.features[6] == 0.0);
        CHECK(e.features[7] == 0.0);
        REQUIRE(e.has_unseen());
        CHECK(e.unseen_factors[0].find("n_classes") != std::string::npos);
        c.n_classes = 10;
        CHECK_FALSE(encode(c).has_unseen());
    }

    TEST_CASE("names and width") {
        CHECK(feature_names().size() == 14);
        CHECK(feature_names()[0] == "r1");
        CHECK(feature_names()[10] == "dimension");
        CHECK(feature_names()[13] == "device");
        CHECK(std::tuple_size_v<FeatureVector> == 14);
    }

    TEST_CASE("injective with exact dummy coding over the full domain") {
        const EncodingSchema schema;
        std::set<FeatureVector> seen;
        std::size_t count = 0;
        for (const int res : schema.resolutions)
            for (const int size : schema.sizes)
                for (const int nc : schema.class_counts)
                    for (const Phase ph : {Phase::train, Phase::test})
                        for (const bool color : {false, true})
                            for (const int ch : {1, 3})
                                for (const Algorithm a : {Algorithm::knn, Algorithm::svm, Algorithm::logreg})
                                    for (const auto& dev : schema.devices) {
                                        const auto e = encode(config_of(res, size, nc, ph, color, ch, a, dev), schema);
                                        REQUIRE_FALSE(e.has_unseen());
                                        const auto& f = e.features;
                                        for (const double v : f) {
                                            REQUIRE((v == 0.0 || v == 1.0));
                                        }
                                        REQUIRE(f[0] + f[1] <= 1.0);
                                        REQUIRE(f[2] + f[3] + f[4] + f[5] <= 1.0);
                                        REQUIRE(f[6] + f[7] <= 1.0);
                                        REQUIRE(f[11] + f[12] <= 1.0);
                                        seen.insert(f);
                                        ++count;
                                    }
        CHECK(count == 3 * 5 * 3 * 2 * 2 * 2 * 3 * 2);
        CHECK(seen.size() == count);
    }

    TEST_CASE("schema validation") {
        EncodingSchema s;
        s.resolutions = {28, 22, 17};
        CHECK_THROWS_AS(s.validate(), ConfigError);
        s = {};
        s.devices = {"a", "a"};
        CHECK_THROWS_AS(s.validate(), ConfigError);
    }
}

TEST_SUITE("ols") {
    TEST_CASE("exact line through (0,1), (1,3)") {
        Matrix x(2, 1);
        x << 0, 1;
        Vector y(2);
        y << 1, 3;
        const auto m = ols_fit(x, y);
        CHECK(m.intercept == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.coefficients(0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(ols_predict(m, Vector::Constant(1, 0.5)) == doctest::Approx(2.0));
    }

    TEST_CASE("constant target -> zero slopes, intercept = constant") {
        std::mt19937_64 rng(1);
        const Matrix x = random_matrix(30, 4, rng);
        const Vector y = Vector::Constant(30, 2.5);
        const auto m = ols_fit(x, y);
        CHECK(m.intercept == doctest::Approx(2.5).epsilon(1e-12));
        for (Eigen::Index c = 0; c < 4; ++c) {
            CHECK(std::abs(m.coefficients(c)) < 1e-12);
        }
    }

    TEST_CASE("random 50x5 systems match the normal-equation oracle") {
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 20; ++trial) {
            const Matrix x = random_matrix(50, 5, rng);
            const Vector y = random_matrix(50, 1, rng).col(0);
            const auto m = ols_fit(x, y);
            const auto beta = oracle::normal_equations(to_rows(x), to_vec(y));
            CHECK(std::abs(m.intercept - beta[0]) <= 1e-8);
            for (std::size_t j = 0; j < 5; ++j) {
                CHECK(std::abs(m.coefficients(static_cast<Eigen::Index>(j)) - beta[j + 1]) <= 1e-8);
            }
        }
    }

    TEST_CASE("rank deficiency: warn and drop, or refuse in strict mode") {
        std::mt19937_64 rng(3);
        Matrix x = random_matrix(20, 3, rng);
        x.col(2) = 2.0 * x.col(0) - x.col(1);
        Matrix with_const(20, 4);
        with_const << x, Vector::Constant(20, 7.0);
        const Vector y = x.col(0) * 3.0 + Vector::Constant(20, 1.0);
        testing::WarningCapture warnings;
        const auto m = ols_fit(with_const, y);
        CHECK(m.dropped_columns == std::vector<std::size_t>{2, 3});
        CHECK(m.coefficients(2) == 0.0);
        CHECK(m.coefficients(3) == 0.0);
        CHECK(warnings.contains("column 2"));
        CHECK(m.intercept == doctest::Approx(1.0));
        CHECK(m.coefficients(0) == doctest::Approx(3.0));
        CHECK_THROWS_AS(ols_fit(with_const, y, true), NumericError);
    }

    TEST_CASE("more columns than rows: extra columns are dropped") {
        Matrix x(2, 2);
        x << 1, 2, 3, 5;
        Vector y(2);
        y << 1, 2;
        testing::WarningCapture warnings;
        const auto m = ols_fit(x, y);
        CHECK(m.dropped_columns == std::vector<std::size_t>{1});
        CHECK(ols_predict(m, x.row(1).transpose()) == doctest::Approx(2.0));
        CHECK_THROWS_AS(ols_fit(x, Vector::Zero(3)), ConfigError);
        CHECK_THROWS_AS(ols_fit(Matrix(0, 2), Vector(0)), ConfigError);
    }
}

TEST_SUITE("gp") {
    GpParams params(double l, double sf2, double sn2) {
        GpParams p;
        p.lengthscale = l;
        p.signal_variance = sf2;
        p.noise_variance = sn2;
        return p;
    }

    TEST_CASE("near-noise-free posterior interpolates the training targets") {
        Matrix x(6, 1);
        x << 0, 1.3, 2.1, 3.7, 5, 6.2;
        Vector y(6);
        y << 0.5, -1.0, 2.0, 0.3, 1.1, -0.4;
        const auto m = gp_fit(x, y, params(1.0, 1.0, 1e-10));
        for (Eigen::Index i = 0; i < 6; ++i) {
            const auto p = gp_predict(m, x.row(i).transpose());
            CHECK(std::abs(p.mean - y(i)) <= 1e-6);
            CHECK(p.variance >= 0.0);
            CHECK(p.variance <= 1e-8);
        }
    }

    TEST_CASE("far from data: prior mean and variance") {
        Matrix x(3, 1);
        x << 0, 1, 2;
        Vector y(3);
        y << 4, 5, 6;
        const auto m = gp_fit(x, y, params(0.5, 2.5, 0.01));
        const auto p = gp_predict(m, Vector::Constant(1, 1000.0));
        CHECK(std::abs(p.mean) < 1e-12);
        CHECK(p.variance == doctest::Approx(2.5));
    }

    TEST_CASE("5-point 1-D set matches the matrix-inversion oracle") {
        Matrix x(5, 1);
        x << -2, -0.5, 0.3, 1.1, 2.4;
        Vector y(5);
        y << 1.0, 0.2, -0.7, 0.4, 2.2;
        const auto gp = params(0.9, 1.7, 0.05);
        const auto m = gp_fit(x, y, gp);
        for (const double q : {-3.0, -1.0, 0.0, 0.3, 0.8, 2.0, 5.0}) {
            const auto want = oracle::gp_posterior(to_rows(x), to_vec(y), {q}, 0.9, 1.7, 0.05);
            const auto got = gp_predict(m, Vector::Constant(1, q));
            CHECK(std::abs(got.mean - want.mean) <= 1e-8);
            CHECK(std::abs(got.variance - want.variance) <= 1e-8);
        }
    }

    TEST_CASE("variance is nonnegative everywhere") {
        std::mt19937_64 rng(6);
        const Matrix x = random_binary(40, 14, rng);
        const Vector y = random_matrix(40, 1, rng).col(0);
        const auto m = gp_fit(x, y, GpParams::defaults_for(y) );
        const Matrix q = random_binary(200, 14, rng);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            CHECK(gp_predict(m, q.row(i).transpose()).variance >= 0.0);
        }
    }

    TEST_CASE("defaults follow the target variance") {
        Vector y(4);
        y << 1, 2, 3, 4;
        const auto p = GpParams::defaults_for(y);
        CHECK(p.lengthscale == 2.0);
        CHECK(p.signal_variance == doctest::Approx(1.25));
        CHECK(p.noise_variance == doctest::Approx(0.0125));
    }

    TEST_CASE("singular system suggests more noise") {
        Matrix x(2, 1);
        x << 1, 1;
        Vector y(2);
        y << 0, 1;
        try {
            gp_fit(x, y, params(1.0, 1.0, 1e-20));
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("noise") != std::string::npos);
        }
        CHECK_THROWS_AS(gp_fit(x, y, params(0.0, 1.0, 1.0)), ConfigError);
    }
}

TEST_SUITE("forest") {
    TEST_CASE("constant target is reproduced exactly") {
        std::mt19937_64 rng(1);
        const Matrix x = random_binary(60, 14, rng);
        const Vector y = Vector::Constant(60, 0.1 + 0.2);
        ForestParams p;
        p.n_trees = 30;
        const auto f = rf_fit(x, y, p);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            CHECK(predict_row(f, x.row(i).transpose()) == y(0));
        }
        const Matrix q = random_binary(20, 14, rng);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            CHECK(predict_row(f, q.row(i).transpose()) == y(0));
        }
    }

    TEST_CASE("a fully grown single tree memorizes") {
        std::mt19937_64 rng(2);
        const Matrix x = random_matrix(80, 5, rng);
        const Vector y = random_matrix(80, 1, rng).col(0);
        const auto f = rf_fit(x, y, memorizing_tree());
        CHECK(mse(rf_predict(f, x), y) == 0.0);
    }

    TEST_CASE("beats OLS in-sample on a nonlinear binary table") {
        std::mt19937_64 rng(3);
        const Matrix x = random_binary(200, 14, rng);
        std::normal_distribution<double> noise(0.0, 0.05);
        Vector y(200);
        for (Eigen::Index i = 0; i < 200; ++i) {
            y(i) = 3.0 * x(i, 0) * x(i, 3) + 2.0 * (x(i, 5) != x(i, 0)) + noise(rng);
        }
        ForestParams p;
        p.n_trees = 100;
        p.seed = 5;
        const auto f = rf_fit(x, y, p);
        const auto ols = ols_fit(x, y);
        Vector ols_pred(200);
        for (Eigen::Index i = 0; i < 200; ++i) {
            ols_pred(i) = ols_predict(ols, x.row(i).transpose());
        }
        CHECK(mse(rf_predict(f, x), y) < mse(ols_pred, y));
    }

    TEST_CASE("forest output is the mean of its trees") {
        Forest f;
        f.n_features = 1;
        f.trees.resize(2);
        f.trees[0].nodes = {TreeNode{-1, 0.0, -1, -1, 1.0, 1, 0.0}};
        f.trees[1].nodes = {TreeNode{-1, 0.0, -1, -1, 3.0, 1, 0.0}};
        f.impurity_decrease.assign(2, std::vector<double>(1, 0.0));
        const std::vector<double> x{0.0};
        CHECK(rf_predict(f, x) == 2.0);
    }

    TEST_CASE("single-tree forest equals its tree") {
        std::mt19937_64 rng(4);
        const Matrix x = random_matrix(50, 3, rng);
        const Vector y = random_matrix(50, 1, rng).col(0);
        ForestParams p;
        p.n_trees = 1;
        p.max_features = 3;
        const auto f = rf_fit(x, y, p);
        const Matrix q = random_matrix(30, 3, rng);
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const Vector row = q.row(i).transpose();
            CHECK(predict_row(f, row) == f.trees[0].predict(std::span<const double>(row.data(), 3)));
        }
    }

    TEST_CASE("predictions stay inside the training-target range") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 5; ++trial) {
            const Matrix x = random_binary(120, 14, rng);
            const Vector y = random_matrix(120, 1, rng).col(0).array().exp();
            ForestParams p;
            p.n_trees = 50;
            p.seed = static_cast<std::uint64_t>(trial);
            const auto f = rf_fit(x, y, p);
            const Matrix q = random_binary(100, 14, rng);
            const Vector pred = rf_predict(f, q);
            CHECK(pred.minCoeff() >= y.minCoeff());
            CHECK(pred.maxCoeff() <= y.maxCoeff());
        }
    }

    TEST_CASE("row order and worker count do not matter") {
        std::mt19937_64 rng(6);
        const Matrix x = random_binary(90, 14, rng);
        const Vector y = random_matrix(90, 1, rng).col(0);
        ForestParams p;
        p.n_trees = 40;
        p.seed = 11;
        const auto ref = rf_fit(x, y, p, 1);

        std::vector<Eigen::Index> perm(90);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix xp(90, 14);
        Vector yp(90);
        for (Eigen::Index i = 0; i < 90; ++i) {
            xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
            yp(i) = y(perm[static_cast<std::size_t>(i)]);
        }
        const Matrix q = random_binary(60, 14, rng);
        const Vector want = rf_predict(ref, q);
        CHECK((rf_predict(rf_fit(xp, yp, p, 1), q).array() == want.array()).all());
        CHECK((rf_predict(rf_fit(x, y, p, 3), q).array() == want.array()).all());
        p.seed = 12;
        CHECK_FALSE((rf_predict(rf_fit(x, y, p, 1), q).array() == want.array()).all());
    }

    TEST_CASE("errors") {
        std::mt19937_64 rng(7);
        const Matrix x = random_binary(30, 14, rng);
        const Vector y = random_matrix(30, 1, rng).col(0);
        CHECK_THROWS_AS(rf_fit(Matrix(0, 14), Vector(0)), ConfigError);
        ForestParams p;
        p.n_trees = 0;
        CHECK_THROWS_AS(rf_fit(x, y, p), ConfigError);
        p = {};
        p.max_features = 15;
        CHECK_THROWS_AS(rf_fit(x, y, p), ConfigError);
        p = {};
        p.n_trees = 2;
        const auto f = rf_fit(x, y, p);
        CHECK_THROWS_AS(rf_predict(f, std::vector<double>(13, 0.0)), ConfigError);
        CHECK(f.params.max_features == 3);  // floor(sqrt(14))
    }
}

TEST_SUITE("importance") {
    TEST_CASE("single informative feature dominates") {
        std::mt19937_64 rng(8);
        const Matrix x = random_binary(2000, 14, rng);
        std::normal_distribution<double> noise(0.0, 0.01);
        for (const int j : {0, 6, 13}) {
            Vector y(2000);
            for (Eigen::Index i = 0; i < 2000; ++i) {
                y(i) = 5.0 * x(i, j) + noise(rng);
            }
            ForestParams p;
            p.n_trees = 200;
            const auto imp = feature_importance(rf_fit(x, y, p));
            CAPTURE(j);
            CHECK(imp.weights[static_cast<std::size_t>(j)] > 0.9);
            CHECK(std::abs(std::accumulate(imp.weights.begin(), imp.weights.end(), 0.0) - 1.0) <= 1e-9);
            CHECK(std::all_of(imp.weights.begin(), imp.weights.end(), [](double w) { return w >= 0.0; }));
        }
    }

    TEST_CASE("a duplicated column shares the original's importance") {
        std::mt19937_64 rng(9);
        const Matrix base = random_binary(300, 4, rng);
        Vector y(300);
        for (Eigen::Index i = 0; i < 300; ++i) {
            y(i) = 4.0 * base(i, 0) + 1.0 * base(i, 1) + 0.5 * base(i, 2) * base(i, 3);
        }
        Matrix dup(300, 5);
        dup << base, base.col(0);
        ForestParams p;
        p.n_trees = 400;
        p.max_features = 2;
        const auto single = feature_importance(rf_fit(base, y, p)).weights;
        p.max_features = 2;
        const auto shared = feature_importance(rf_fit(dup, y, p)).weights;
        CHECK(shared[0] + shared[4] == doctest::Approx(single[0]).epsilon(0.1));
        CHECK(shared[0] > 0.2 * single[0]);
        CHECK(shared[4] > 0.2 * single[0]);
    }

    TEST_CASE("no splits -> zeros and a warning") {
        std::mt19937_64 rng(10);
        const Matrix x = random_binary(40, 14, rng);
        ForestParams p;
        p.n_trees = 5;
        const auto f = rf_fit(x, Vector::Constant(40, 3.0), p);
        testing::WarningCapture warnings;
        const auto imp = feature_importance(f);
        CHECK(imp.no_splits);
        CHECK(std::all_of(imp.weights.begin(), imp.weights.end(), [](double w) { return w == 0.0; }));
        CHECK_FALSE(warnings.messages.empty());
    }
}

TEST_SUITE("cross-validation") {
    TEST_CASE("fold partition contract") {
        for (const std::size_t n : {10, 11, 37, 100}) {
            for (const int k : {2, 3, 10}) {
                const auto folds = kfold_indices(n, k, 4);
                REQUIRE(folds.size() == static_cast<std::size_t>(k));
                std::vector<int> seen(n, 0);
                std::size_t lo = n;
                std::size_t hi = 0;
                for (const auto& f : folds) {
                    lo = std::min(lo, f.size());
                    hi = std::max(hi, f.size());
                    for (const std::size_t i : f) {
                        ++seen[i];
                    }
                }
                CHECK(hi - lo <= 1);
                CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
                CHECK(kfold_indices(n, k, 4) == folds);
            }
        }
    }

    TEST_CASE("k = n is leave-one-out") {
        const auto folds = kfold_indices(12, 12, 1);
        for (const auto& f : folds) {
            CHECK(f.size() == 1);
        }
        std::mt19937_64 rng(1);
        const Matrix x = random_matrix(12, 2, rng);
        const Vector y = random_matrix(12, 1, rng).col(0);
        ModelSpec spec;
        spec.kind = RegressorKind::ols;
        const auto cv = kfold_cv(x, y, 12, spec, 1);
        CHECK(cv.fold_rmse.size() == 12);
        CHECK(std::isnan(cv.mean_r_squared));  // single-row folds have no R^2
        CHECK(std::isfinite(cv.pooled_r_squared));
    }

    TEST_CASE("memorizing tree on a duplicated dataset scores R^2 = 1") {
        std::mt19937_64 rng(2);
        const Matrix distinct = random_matrix(10, 3, rng);
        const Vector targets = random_matrix(10, 1, rng).col(0);
        Matrix x(200, 3);
        Vector y(200);
        for (Eigen::Index i = 0; i < 200; ++i) {
            x.row(i) = distinct.row(i % 10);
            y(i) = targets(i % 10);
        }
        ModelSpec spec;
        spec.kind = RegressorKind::rf;
        spec.forest = memorizing_tree();
        const auto cv = kfold_cv(x, y, 5, spec, 3);
        CHECK(cv.mean_r_squared == 1.0);
        CHECK(cv.std_r_squared == 0.0);
        CHECK(cv.mean_rmse == 0.0);
    }

    TEST_CASE("ols cv matches a hand-rolled loop") {
        std::mt19937_64 rng(3);
        const Matrix x = random_matrix(40, 2, rng);
        const Vector y = x.col(0) * 2.0 + random_matrix(40, 1, rng).col(0) * 0.3;
        ModelSpec spec;
        spec.kind = RegressorKind::ols;
        const auto cv = kfold_cv(x, y, 4, spec, 9);
        const auto folds = kfold_indices(40, 4, 9);
        for (std::size_t f = 0; f < 4; ++f) {
            oracle::Mat xtr;
            oracle::Vec ytr;
            for (std::size_t g = 0; g < 4; ++g) {
                if (g == f) continue;
                for (const std::size_t i : folds[g]) {
                    xtr.push_back({x(static_cast<Eigen::Index>(i), 0), x(static_cast<Eigen::Index>(i), 1)});
                    ytr.push_back(y(static_cast<Eigen::Index>(i)));
                }
            }
            const auto beta = oracle::normal_equations(xtr, ytr);
            oracle::Vec pred;
            oracle::Vec truth;
            for (const std::size_t i : folds[f]) {
                const auto r = static_cast<Eigen::Index>(i);
                pred.push_back(beta[0] + beta[1] * x(r, 0) + beta[2] * x(r, 1));
                truth.push_back(y(r));
            }
            CHECK(cv.fold_r_squared[f] == doctest::Approx(oracle::r_squared(pred, truth)).epsilon(1e-9));
        }
    }

    TEST_CASE("k outside [2, n] is rejected") {
        CHECK_THROWS_AS(kfold_indices(5, 6, 1), ConfigError);
        CHECK_THROWS_AS(kfold_indices(5, 1, 1), ConfigError);
    }
}

TEST_SUITE("random search") {
    TEST_CASE("grid of one returns it") {
        std::mt19937_64 rng(1);
        const Matrix x = random_binary(40, 14, rng);
        const Vector y = random_matrix(40, 1, rng).col(0);
        ForestGrid grid;
        grid.n_trees = {7};
        grid.min_samples_leaf = {2};
        const auto r = random_search(x, y, grid, 5, 3, 1);
        REQUIRE(r.tried.size() == 1);
        CHECK(r.best.n_trees == 7);
        CHECK(r.best.min_samples_leaf == 2);
    }

    TEST_CASE("n_iter >= grid size is exhaustive") {
        std::mt19937_64 rng(2);
        const Matrix x = random_binary(40, 14, rng);
        const Vector y = random_matrix(40, 1, rng).col(0);
        ForestGrid grid;
        grid.n_trees = {3, 5};
        grid.max_depth = {2, 4, -1};
        grid.bootstrap = {true, false};
        const auto r = random_search(x, y, grid, 100, 3, 2);
        CHECK(r.tried.size() == 12);
        std::set<std::tuple<int, int, bool>> combos;
        for (const auto& p : r.tried) {
            combos.insert({p.n_trees, p.max_depth, p.bootstrap});
        }
        CHECK(combos.size() == 12);
        const auto best = std::max_element(r.scores.begin(), r.scores.end());
        CHECK(r.best_score == *best);
        CHECK(r.best == r.tried[static_cast<std::size_t>(best - r.scores.begin())]);
    }

    TEST_CASE("more trees win on noisy data") {
        int picked_800 = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            std::mt19937_64 rng(seed);
            const Matrix x = random_binary(80, 14, rng);
            std::normal_distribution<double> noise(0.0, 1.0);
            Vector y(80);
            for (Eigen::Index i = 0; i < 80; ++i) {
                y(i) = 2.0 * x(i, 0) + x(i, 1) - x(i, 2) + noise(rng);
            }
            ForestGrid grid;
            grid.n_trees = {1, 800};
            const auto r = random_search(x, y, grid, 2, 5, seed);
            picked_800 += r.best.n_trees == 800 ? 1 : 0;
        }
        CHECK(picked_800 >= 4);
    }

    TEST_CASE("the tuning grid contains the default parameters") {
        const ForestGrid g = tuning_grid();
        bool found = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            found = found || g.at(i, 0) == ForestParams{};
        }
        CHECK(found);
        CHECK(g.size() == 486);
    }

    TEST_CASE("n_iter <= 0 is rejected") {
        Matrix x = Matrix::Zero(10, 14);
        CHECK_THROWS_AS(random_search(x, Vector::Zero(10), ForestGrid{}, 0, 2, 1), ConfigError);
        ForestGrid empty;
        empty.n_trees.clear();
        CHECK_THROWS_AS(random_search(x, Vector::Zero(10), empty, 1, 2, 1), ConfigError);
    }
}

TEST_SUITE("predictor files") {
    RecordSet synthetic_records(std::size_t n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        const EncodingSchema s;
        std::uniform_int_distribution<int> pick(0, 100);
        RecordSet rs;
        for (std::size_t i = 0; i < n; ++i) {
            MeasurementRecord r;
            r.config = config_of(s.resolutions[static_cast<std::size_t>(pick(rng) % 3)],
                                 s.sizes[static_cast<std::size_t>(pick(rng) % 5)],
                                 s.class_counts[static_cast<std::size_t>(pick(rng) % 3)],
                                 pick(rng) % 2 ? Phase::test : Phase::train, pick(rng) % 2 == 0, pick(rng) % 2 ? 3 : 1,
                                 static_cast<Algorithm>(pick(rng) % 3), s.devices[static_cast<std::size_t>(pick(rng) % 2)]);
            r.repetition = static_cast<int>(i);
            r.duration_s = 1.0;
            r.energy_j = 1.0 + r.config.n_images / 300.0 * (r.config.phase == Phase::test ? 2.0 : 1.0);
            rs.push_back(r);
        }
        return rs;
    }

    TEST_CASE("energy table skips failed rows and encodes the rest") {
        auto rs = synthetic_records(10, 1);
        rs[3].status = "failed";
        const auto t = build_energy_table(rs);
        CHECK(t.x.rows() == 9);
        CHECK(t.x.cols() == 14);
        CHECK(t.keys.size() == 9);
        CHECK(t.y(3) == rs[4].energy_j);
    }

    TEST_CASE("each model kind round-trips with identical predictions") {
        testing::TempDir dir;
        const auto t = build_energy_table(synthetic_records(120, 2));
        for (const auto kind : {RegressorKind::ols, RegressorKind::gp, RegressorKind::rf}) {
            ModelSpec spec;
            spec.kind = kind;
            spec.forest.n_trees = 20;
            testing::WarningCapture quiet;
            const EnergyPredictor p{fit_regressor(t.x, t.y, spec), EncodingSchema{}};
            const auto path = dir / (to_string(kind) + ".json");
            save_predictor(p, path);
            const EnergyPredictor back = load_predictor(path);
            CHECK(kind_of(back.model) == kind);
            CHECK((predict_all(back.model, t.x).array() == predict_all(p.model, t.x).array()).all());
            CHECK(back.schema == p.schema);
        }
    }

    TEST_CASE("schema mismatch is refused") {
        const auto t = build_energy_table(synthetic_records(60, 3));
        ModelSpec spec;
        spec.kind = RegressorKind::ols;
        testing::WarningCapture quiet;
        const EnergyPredictor p{fit_regressor(t.x, t.y, spec), EncodingSchema{}};
        auto j = nlohmann::json::parse(serialize_predictor(p));
        j["schema"]["feature_names"][3] = "pixels";
        CHECK_THROWS_AS(deserialize_predictor(j.dump()), DataError);
        j = nlohmann::json::parse(serialize_predictor(p));
        j["model"]["coefficients"].erase(0);
        CHECK_THROWS_AS(deserialize_predictor(j.dump()), DataError);
        CHECK_THROWS_AS(deserialize_predictor("{}"), DataError);
    }

    TEST_CASE("predicting an unseen level warns") {
        const auto t = build_energy_table(synthetic_records(60, 4));
        ModelSpec spec;
        spec.kind = RegressorKind::rf;
        spec.forest.n_trees = 10;
        const EnergyPredictor p{fit_regressor(t.x, t.y, spec), EncodingSchema{}};
        ExperimentConfig c;
        c.n_classes = 5;
        testing::WarningCapture warnings;
        CHECK(std::isfinite(p.predict(c)));
        CHECK(warnings.contains("n_classes=5"));
    }
}

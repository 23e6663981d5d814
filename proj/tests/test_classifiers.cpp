#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "edgebench/classifiers.hpp"
#include "edgebench/model_io.hpp"
#include "support.hpp"

using namespace edgebench;

namespace {

/// Isotropic Gaussian blobs, one centre per class on a circle of the given radius.
LabeledSamples blobs(std::size_t n, int classes, std::size_t dim, double radius, std::uint64_t seed, bool sparse = false) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> data(n * dim);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
        labels[i] = c;
        const double angle = 2.0 * M_PI * c / classes;
        for (std::size_t j = 0; j < dim; ++j) {
            const double centre = j == 0 ? radius * std::cos(angle) : j == 1 ? radius * std::sin(angle) : 0.0;
            data[i * dim + j] = centre + noise(rng);
        }
    }
    auto fm = FeatureMatrix::dense(std::move(data), n, dim);
    return {sparse ? fm.to_sparse() : fm, labels, classes};
}

/// Exhaustive k-NN: sort all (distance, index) pairs, vote, lowest class on ties.
std::vector<int> knn_oracle(const LabeledSamples& train, const FeatureMatrix& q, int k) {
    std::vector<int> out;
    std::vector<double> a(train.features.cols());
    std::vector<double> b(train.features.cols());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        q.copy_row(i, b);
        std::vector<std::pair<double, std::size_t>> d;
        for (std::size_t j = 0; j < train.size(); ++j) {
            train.features.copy_row(j, a);
            double s = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) {
                s += (a[c] - b[c]) * (a[c] - b[c]);
            }
            d.emplace_back(s, j);
        }
        std::sort(d.begin(), d.end());
        std::vector<int> votes(static_cast<std::size_t>(train.n_classes), 0);
        for (int t = 0; t < k; ++t) {
            ++votes[static_cast<std::size_t>(train.labels[d[static_cast<std::size_t>(t)].second])];
        }
        out.push_back(static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
    }
    return out;
}

}  // namespace

TEST_SUITE("accuracy") {
    TEST_CASE("fixtures") {
        const std::vector<int> a{0, 1, 2, 3};
        CHECK(accuracy(a, a) == 1.0);
        CHECK(accuracy(a, std::vector<int>{1, 2, 3, 0}) == 0.0);
        CHECK(accuracy(a, std::vector<int>{0, 1, 2, 0}) == 0.75);
        CHECK_THROWS_AS(accuracy(a, std::vector<int>{0}), ConfigError);
        CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), ConfigError);
    }
}

TEST_SUITE("knn") {
    TEST_CASE("single training point, k = 1") {
        LabeledSamples train{FeatureMatrix::dense({0.3, 0.4}, 1, 2), {1}, 2};
        const auto model = knn_fit(train, 1);
        CHECK(knn_predict(model, FeatureMatrix::dense({9, -9, 0, 0}, 2, 2)) == std::vector<int>{1, 1});
    }

    TEST_CASE("k outside [1, n] and empty training set are rejected") {
        LabeledSamples train{FeatureMatrix::dense({0.3, 0.4}, 1, 2), {1}, 2};
        CHECK_THROWS_AS(knn_fit(train, 2), ConfigError);
        CHECK_THROWS_AS(knn_fit(train, 0), ConfigError);
        LabeledSamples empty{FeatureMatrix::dense({}, 0, 2), {}, 2};
        CHECK_THROWS_AS(knn_fit(empty, 1), ConfigError);
    }

    TEST_CASE("100-point 2-class blobs match the exhaustive oracle") {
        const auto train = blobs(100, 2, 4, 1.5, 1);
        const auto queries = blobs(60, 2, 4, 1.5, 2);
        const auto model = knn_fit(train, 5);
        CHECK(knn_predict(model, queries.features) == knn_oracle(train, queries.features, 5));
    }

    TEST_CASE("ties: equidistant neighbours resolve by index, split votes by lowest class") {
        // Training rows at +1 and -1 on a line; query at 0 is equidistant from both.
        LabeledSamples train{FeatureMatrix::dense({1.0, -1.0, 3.0, -3.0}, 4, 1), {1, 0, 1, 0}, 2};
        const auto q = FeatureMatrix::dense({0.0}, 1, 1);
        CHECK(knn_predict(knn_fit(train, 1), q) == std::vector<int>{1});  // index 0 wins the tie
        CHECK(knn_predict(knn_fit(train, 2), q) == std::vector<int>{0});  // 1-1 vote -> lowest class
    }

    TEST_CASE("workers and storage do not change the output") {
        const auto train = blobs(150, 3, 12, 1.0, 4);
        const auto queries = blobs(77, 3, 12, 1.0, 5);
        const auto dense = knn_predict(knn_fit(train, 5), queries.features, 1);
        for (const int w : {2, 3, 4, 8}) {
            CHECK(knn_predict(knn_fit(train, 5), queries.features, w) == dense);
        }
        LabeledSamples sparse_train{train.features.to_sparse(), train.labels, train.n_classes};
        CHECK(knn_predict(knn_fit(sparse_train, 5), queries.features.to_sparse(), 4) == dense);
    }
}

TEST_SUITE("logreg") {
    TEST_CASE("boundary point scores 0.5") {
        CHECK(sigmoid(0.0) == 0.5);
        CHECK(sigmoid(-800.0) >= 0.0);
        CHECK(sigmoid(800.0) <= 1.0);
    }

    TEST_CASE("separable 1-D set is fit exactly") {
        LabeledSamples train{FeatureMatrix::dense({-1, -1, -1, 1, 1, 1}, 6, 1), {0, 0, 0, 1, 1, 1}, 2};
        const auto model = logreg_fit(train);
        CHECK(model.classifier_count() == 1);
        CHECK(accuracy(logreg_predict(model, train.features), train.labels) == 1.0);
        // The problem is symmetric, so the learned boundary sits at the origin.
        CHECK(std::abs(model.bias[0]) < 1e-12);
        CHECK(sigmoid(logreg_scores(model, FeatureMatrix::dense({0.0}, 1, 1), 0)[0]) == doctest::Approx(0.5));
    }

    TEST_CASE("10 classes hold 10 weight vectors") {
        const auto train = blobs(200, 10, 5, 4.0, 7);
        const auto model = logreg_fit(train);
        CHECK(model.classifier_count() == 10);
        CHECK(model.weights.size() == 10);
        CHECK(model.weights[0].size() == 5);
    }

    TEST_CASE("worker count does not change the weights") {
        const auto train = blobs(120, 4, 9, 2.0, 8);
        const auto ref = logreg_fit(train, {}, 1);
        for (const int w : {2, 3, 4}) {
            const auto m = logreg_fit(train, {}, w);
            CHECK(m.weights == ref.weights);
            CHECK(m.bias == ref.bias);
        }
        LabeledSamples sparse{train.features.to_sparse(), train.labels, 4};
        const auto s = logreg_fit(sparse, {}, 2);
        CHECK(logreg_predict(s, train.features) == logreg_predict(ref, train.features));
    }

    TEST_CASE("divergence names the class") {
        LabeledSamples train{FeatureMatrix::dense({1e200, -1e200, 1e200, -1e200}, 4, 1), {0, 1, 0, 1}, 2};
        LogRegParams p;
        p.learning_rate = 1e10;
        try {
            logreg_fit(train, p);
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("class") != std::string::npos);
        }
    }

    TEST_CASE("fewer than 2 classes is rejected") {
        LabeledSamples train{FeatureMatrix::dense({1, 2}, 2, 1), {0, 0}, 1};
        CHECK_THROWS_AS(logreg_fit(train), ConfigError);
    }
}

TEST_SUITE("svm") {
    TEST_CASE("pairwise classifier counts") {
        CHECK(svm_fit(blobs(100, 10, 3, 3.0, 1)).classifier_count() == 45);
        CHECK(svm_fit(blobs(40, 2, 3, 3.0, 1)).classifier_count() == 1);
        CHECK(svm_fit(blobs(60, 4, 3, 3.0, 1)).classifier_count() == 6);
    }

    TEST_CASE("separable 2-class blobs reach >= 0.95 and agree with k-NN") {
        const auto train = blobs(200, 2, 6, 3.0, 21);
        const auto test = blobs(200, 2, 6, 3.0, 22);
        const auto model = svm_fit(train);
        const auto pred = svm_predict(model, test.features);
        CHECK(accuracy(pred, test.labels) >= 0.95);
        const auto knn = knn_predict(knn_fit(train, 5), test.features);
        CHECK(accuracy(pred, knn) >= 0.95);
        CHECK_FALSE(model.reached_iteration_cap());
    }

    TEST_CASE("dual feasibility and KKT on support vectors") {
        const auto train = blobs(120, 3, 4, 1.5, 9);
        SvmParams p;
        p.c = 2.0;
        const auto model = svm_fit(train, p);
        for (const auto& pair : model.pairs) {
            double balance = 0.0;
            for (std::size_t s = 0; s < pair.alpha.size(); ++s) {
                CHECK(pair.alpha[s] >= 0.0);
                CHECK(pair.alpha[s] <= p.c);
                balance += pair.alpha[s] * pair.label_sign[s];
                const double f = pair.decision(pair.support_vectors, s, model.gamma);
                const double margin = pair.label_sign[s] * f;
                if (pair.alpha[s] < p.c - 1e-9) {
                    // free support vectors lie on the margin
                    CHECK(margin == doctest::Approx(1.0).epsilon(0.02));
                } else {
                    CHECK(margin <= 1.0 + 1e-2);
                }
            }
            CHECK(std::abs(balance) < 1e-9);
        }
    }

    TEST_CASE("iteration cap sets the flag instead of failing") {
        const auto train = blobs(80, 2, 3, 0.2, 3);
        SvmParams p;
        p.max_iterations = 2;
        testing::WarningCapture warnings;
        const auto model = svm_fit(train, p);
        CHECK(model.reached_iteration_cap());
        CHECK_FALSE(warnings.messages.empty());
    }

    TEST_CASE("support vector count tends to grow with the training set") {
        int holds = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            std::size_t prev = 0;
            bool monotone = true;
            for (const std::size_t n : {60, 120, 240}) {
                const auto sv = svm_fit(blobs(n, 3, 5, 1.0, seed * 100 + n)).support_vector_count();
                monotone = monotone && sv >= prev;
                prev = sv;
            }
            holds += monotone ? 1 : 0;
        }
        CHECK(holds >= 3);
    }

    TEST_CASE("vote ties go to the lowest class") {
        // Three classes, each pairwise classifier hand-set to a constant decision
        // forming a cycle 0 > 1, 1 > 2, 2 > 0: every class gets one vote.
        SvmModel m;
        m.n_classes = 3;
        m.gamma = 1.0;
        auto constant_pair = [](int pos, int neg, double value) {
            PairwiseSvm p;
            p.positive = pos;
            p.negative = neg;
            p.support_vectors = FeatureMatrix::dense({0.0}, 1, 1);
            p.support_indices = {0};
            p.alpha = {0.0};
            p.label_sign = {1.0};
            p.rho = -value;
            return p;
        };
        m.pairs = {constant_pair(0, 1, 1.0), constant_pair(0, 2, -1.0), constant_pair(1, 2, 1.0)};
        CHECK(svm_predict(m, FeatureMatrix::dense({0.5}, 1, 1)) == std::vector<int>{0});
    }

    TEST_CASE("invalid parameters") {
        const auto train = blobs(20, 2, 2, 3.0, 1);
        SvmParams p;
        p.c = 0.0;
        CHECK_THROWS_AS(svm_fit(train, p), ConfigError);
    }
}

TEST_SUITE("model io") {
    TEST_CASE("every classifier round-trips with identical predictions") {
        testing::TempDir dir;
        const auto train = blobs(90, 3, 6, 2.0, 31);
        const auto queries = blobs(30, 3, 6, 2.0, 32);
        LabeledSamples sparse{train.features.to_sparse(), train.labels, 3};

        const ClassifierModel knn = knn_fit(sparse, 3);
        const ClassifierModel lr = logreg_fit(train);
        const ClassifierModel svm = svm_fit(train);
        save_classifier(knn, dir / "knn.json");
        save_classifier(lr, dir / "lr.json");
        save_classifier(svm, dir / "svm.json");

        const auto knn2 = std::get<KnnModel>(load_classifier(dir / "knn.json"));
        const auto lr2 = std::get<LogRegModel>(load_classifier(dir / "lr.json"));
        const auto svm2 = std::get<SvmModel>(load_classifier(dir / "svm.json"));
        CHECK(knn2.train.is_sparse());
        CHECK(knn_predict(knn2, queries.features) == knn_predict(std::get<KnnModel>(knn), queries.features));
        CHECK(lr2.weights == std::get<LogRegModel>(lr).weights);
        CHECK(svm_predict(svm2, queries.features) == svm_predict(std::get<SvmModel>(svm), queries.features));
        CHECK(svm2.support_vector_count() == std::get<SvmModel>(svm).support_vector_count());
    }

    TEST_CASE("garbage is rejected") {
        CHECK_THROWS_AS(deserialize_classifier("{\"format\":\"other\"}"), DataError);
        CHECK_THROWS_AS(deserialize_classifier("not json"), DataError);
    }
}

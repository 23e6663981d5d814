#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "edgebench/cli.hpp"
#include "edgebench/records.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace edgebench;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

RecordSet energy_records(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 1000);
    std::normal_distribution<double> noise(0.0, 0.05);
    const int sizes[] = {300, 600, 900, 1200, 1500};
    const int res[] = {17, 22, 28};
    RecordSet rs;
    for (std::size_t i = 0; i < n; ++i) {
        MeasurementRecord r;
        r.config.algorithm = static_cast<Algorithm>(pick(rng) % 3);
        r.config.phase = pick(rng) % 2 ? Phase::test : Phase::train;
        r.config.dataset = pick(rng) % 2 ? "digits" : "fashion";
        r.config.n_images = sizes[pick(rng) % 5];
        r.config.resolution = res[pick(rng) % 3];
        r.repetition = static_cast<int>(i);
        r.duration_s = 1.0;
        r.energy_j = r.config.n_images / 300.0 * (1.0 + (r.config.phase == Phase::test)) + noise(rng);
        rs.push_back(r);
    }
    return rs;
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("exit codes: help, usage error, runtime error") {
    CHECK(run({"--help"}).code == kExitOk);
    const auto bogus = run({"fit", "--bogus"});
    CHECK(bogus.code == kExitUsage);
    CHECK_FALSE(bogus.err.empty());
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"nonsense"}).code == kExitUsage);

    testing::TempDir dir;
    std::ofstream(dir / "bad.csv") << "not,a,records,file\n1,2,3,4\n";
    const auto r = run({"fit", "--in", (dir / "bad.csv").string(), "--out", (dir / "m.json").string()});
    CHECK(r.code == kExitRuntime);
    CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("bench run on a one-configuration matrix") {
    testing::TempDir dir;
    std::ofstream(dir / "m.json") << R"({
        "algorithms": ["knn"], "phases": ["test"],
        "datasets": [{"name": "tiny", "channels": 1, "n_classes": 2, "base_resolution": 12}],
        "sizes": [300], "resolutions": [12], "repetitions": 1,
        "output": "records.csv"
    })";
    const auto r = run({"bench", "run", "--config", (dir / "m.json").string()});
    CHECK_MESSAGE(r.code == kExitOk, r.err);
    const auto records = load_records(dir / "records.csv");
    REQUIRE(records.size() == 1);
    CHECK(records[0].ok());
    CHECK(records[0].energy_j > 0.0);

    const auto again = run({"bench", "run", "--config", (dir / "m.json").string(), "--resume"});
    CHECK(again.code == kExitOk);
    CHECK(again.out.find("skipped 1") != std::string::npos);
    CHECK(load_records(dir / "records.csv").size() == 1);
}

TEST_CASE("fit, predict, evaluate, importance, report") {
    testing::TempDir dir;
    export_records(energy_records(120, 1), dir / "train.csv");
    export_records(energy_records(40, 2), dir / "test.csv");
    const auto model = (dir / "model.json").string();

    const auto fit = run({"fit", "--model", "rf", "--in", (dir / "train.csv").string(), "--out", model, "--trees",
                          "50", "--cv", "5"});
    REQUIRE_MESSAGE(fit.code == kExitOk, fit.err);
    CHECK(fit.out.find("mean_r_squared=") != std::string::npos);

    const auto pred = run({"predict", "--model", model, "--in", (dir / "test.csv").string()});
    REQUIRE(pred.code == kExitOk);
    CHECK(pred.out.rfind("key,energy_j,predicted_energy_j\n", 0) == 0);
    CHECK(count_lines(pred.out) == 41);
    std::istringstream lines(pred.out);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    const double value = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(std::isfinite(value));

    const auto eval = run({"evaluate", "--model", model, "--in", (dir / "test.csv").string(), "--report",
                           (dir / "report.csv").string()});
    REQUIRE(eval.code == kExitOk);
    const auto j = nlohmann::json::parse(eval.out);
    CHECK(j.contains("r_squared"));
    CHECK(j.at("n") == 40);
    CHECK(j.at("r_squared").get<double>() > 0.8);
    CHECK(std::filesystem::exists(dir / "report.csv"));

    const auto imp = run({"importance", "--model", model});
    REQUIRE(imp.code == kExitOk);
    CHECK(count_lines(imp.out) == 15);
    CHECK(imp.out.find("phase,") != std::string::npos);

    const auto rep = run({"report", "--in", (dir / "test.csv").string(), "--plot-data", "--model", model, "--out-dir",
                          (dir / "plots").string()});
    REQUIRE(rep.code == kExitOk);
    CHECK(std::filesystem::exists(dir / "plots" / "energy_vs_size.csv"));
    CHECK(std::filesystem::exists(dir / "plots" / "energy_vs_resolution.csv"));
    CHECK(std::filesystem::exists(dir / "plots" / "grouped_report.csv"));

    const auto ols = run({"fit", "--model", "ols", "--in", (dir / "train.csv").string(), "--out",
                          (dir / "ols.json").string()});
    CHECK(ols.code == kExitOk);
    CHECK(run({"importance", "--model", (dir / "ols.json").string()}).code == kExitRuntime);
    const auto tuned = run({"fit", "--model", "rf", "--in", (dir / "train.csv").string(), "--out",
                            (dir / "tuned.json").string(), "--search", "2", "--cv", "3"});
    CHECK_MESSAGE(tuned.code == kExitOk, tuned.err);
    CHECK(tuned.out.find("search tried=2") != std::string::npos);
    CHECK(run({"fit", "--model", "gp", "--in", (dir / "train.csv").string(), "--out", (dir / "g.json").string(),
               "--search", "2"})
              .code == kExitRuntime);
    CHECK(run({"fit", "--model", "tree", "--in", (dir / "train.csv").string(), "--out", model}).code == kExitUsage);
}

TEST_CASE("dataset subcommands") {
    testing::TempDir dir;
    const auto gen = run({"dataset", "gen", "--out", (dir / "d.csv").string(), "--images", "60", "--resolution", "12",
                          "--classes", "3", "--seed", "5"});
    REQUIRE_MESSAGE(gen.code == kExitOk, gen.err);
    CHECK(std::filesystem::exists(dir / "d.csv"));

    const auto stdz = run({"dataset", "standardize", "--in", (dir / "d.csv").string(), "--sizes", "30,60",
                           "--resolutions", "8,12", "--out-dir", (dir / "v").string()});
    REQUIRE_MESSAGE(stdz.code == kExitOk, stdz.err);
    CHECK(count_lines(stdz.out) == 4);

    const auto too_big = run({"dataset", "standardize", "--in", (dir / "d.csv").string(), "--sizes", "61",
                              "--resolutions", "12", "--out-dir", (dir / "w").string()});
    CHECK(too_big.code == kExitRuntime);

    CHECK(run({"dataset", "ingest", "--dir", (dir / "missing").string(), "--out", "x.csv"}).code == kExitUsage);
}

#ifdef EDGEBENCH_CLI_PATH
TEST_CASE("the installed binary reports usage errors through its exit status") {
    const std::string bin = EDGEBENCH_CLI_PATH;
    CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
    CHECK(std::system((bin + " fit --bogus > /dev/null 2>&1").c_str()) != 0);
}
#endif

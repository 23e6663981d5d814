#include "edgebench/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "edgebench/common.hpp"

namespace edgebench {

double r_squared(std::span<const double> predicted, std::span<const double> truth) {
    if (predicted.size() != truth.size()) {
        throw ConfigError("r_squared: length mismatch");
    }
    if (truth.size() < 2) {
        throw ConfigError("r_squared: need at least 2 values");
    }
    double mean = 0.0;
    for (const double t : truth) {
        mean += t;
    }
    mean /= static_cast<double>(truth.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
    }
    if (ss_tot == 0.0) {
        throw ConfigError("r_squared: truth is constant");
    }
    return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> predicted, std::span<const double> truth) {
    if (predicted.size() != truth.size()) {
        throw ConfigError("rmse: length mismatch");
    }
    if (truth.empty()) {
        throw ConfigError("rmse: empty input");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    }
    return std::sqrt(ss / static_cast<double>(truth.size()));
}

double nrmse(double rmse_value, double range) {
    if (!(range > 0.0)) {
        throw ConfigError("nrmse: range must be > 0");
    }
    return rmse_value / range;
}

double value_range(std::span<const double> values) {
    if (values.empty()) {
        return 0.0;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

Metrics compute_metrics(std::span<const double> predicted, std::span<const double> truth) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    Metrics m;
    m.rmse = rmse(predicted, truth);
    m.range = value_range(truth);
    m.nrmse = m.range > 0.0 ? m.rmse / m.range : nan;
    m.r_squared = truth.size() >= 2 && m.range > 0.0 ? r_squared(predicted, truth) : nan;
    return m;
}

}  // namespace edgebench

namespace edgebench {

namespace {

ReportRow make_row(std::string algorithm, std::string phase, std::string dataset, const std::vector<double>& pred,
                   const std::vector<double>& truth) {
    ReportRow row{std::move(algorithm), std::move(phase), std::move(dataset), truth.size(), {}, 0.0};
    row.metrics = compute_metrics(pred, truth);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        row.ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    }
    return row;
}

std::string fmt(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

GroupedReport grouped_report(const RecordSet& records, const std::map<std::string, double>& predictions) {
    std::map<std::string, const MeasurementRecord*> by_key;
    for (const auto& r : records) {
        if (r.ok()) {
            by_key.emplace(r.key(), &r);
        }
    }
    using Group = std::tuple<std::string, std::string, std::string>;
    std::map<Group, std::pair<std::vector<double>, std::vector<double>>> groups;
    std::vector<double> all_pred;
    std::vector<double> all_truth;
    for (const auto& [key, value] : predictions) {
        const auto it = by_key.find(key);
        if (it == by_key.end()) {
            throw DataError("prediction for '" + key + "' has no matching record");
        }
        const auto& c = it->second->config;
        auto& g = groups[{to_string(c.algorithm), to_string(c.phase), c.dataset}];
        g.first.push_back(value);
        g.second.push_back(it->second->energy_j);
        all_pred.push_back(value);
        all_truth.push_back(it->second->energy_j);
    }
    if (all_truth.empty()) {
        throw DataError("grouped_report: no predictions");
    }
    GroupedReport report;
    for (const auto& [g, v] : groups) {
        report.rows.push_back(make_row(std::get<0>(g), std::get<1>(g), std::get<2>(g), v.first, v.second));
    }
    report.total = make_row("all", "all", "all", all_pred, all_truth);
    return report;
}

void write_report_csv(const GroupedReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "algorithm,phase,dataset,n,rmse,range,nrmse,r_squared\n";
    auto line = [&out](const ReportRow& r) {
        out << r.algorithm << ',' << r.phase << ',' << r.dataset << ',' << r.n << ',' << fmt(r.metrics.rmse) << ','
            << fmt(r.metrics.range) << ',' << fmt(r.metrics.nrmse) << ',' << fmt(r.metrics.r_squared) << '\n';
    };
    for (const auto& r : report.rows) {
        line(r);
    }
    line(report.total);
}

std::vector<PlotPoint> plot_series(const RecordSet& records, PlotAxis axis) {
    using Key = std::tuple<std::string, std::string, std::string, std::string, int, int, int>;
    std::map<Key, std::vector<double>> cells;
    for (const auto& r : records) {
        if (!r.ok()) {
            continue;
        }
        const auto& c = r.config;
        const int fixed = axis == PlotAxis::size ? c.resolution : c.n_images;
        const int x = axis == PlotAxis::size ? c.n_images : c.resolution;
        cells[{to_string(c.algorithm), to_string(c.phase), c.dataset, c.device, c.workers, fixed, x}].push_back(
            r.energy_j);
    }
    std::vector<PlotPoint> out;
    for (const auto& [k, v] : cells) {
        PlotPoint p;
        std::tie(p.algorithm, p.phase, p.dataset, p.device, p.workers, p.fixed, p.x) = k;
        p.n = v.size();
        double mean = 0.0;
        for (const double e : v) {
            mean += e;
        }
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (const double e : v) {
            ss += (e - mean) * (e - mean);
        }
        p.mean_energy_j = mean;
        p.std_energy_j = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::filesystem::path> write_plot_data(const RecordSet& records, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const PlotAxis axis : {PlotAxis::size, PlotAxis::resolution}) {
        const bool by_size = axis == PlotAxis::size;
        const auto path = dir / (by_size ? "energy_vs_size.csv" : "energy_vs_resolution.csv");
        std::ofstream out(path);
        if (!out) {
            throw DataError("cannot write " + path.string());
        }
        out << "algorithm,phase,dataset,device,workers," << (by_size ? "resolution,n_images" : "n_images,resolution")
            << ",mean_energy_j,std_energy_j,n\n";
        for (const auto& p : plot_series(records, axis)) {
            out << p.algorithm << ',' << p.phase << ',' << p.dataset << ',' << p.device << ',' << p.workers << ','
                << p.fixed << ',' << p.x << ',' << fmt(p.mean_energy_j) << ',' << fmt(p.std_energy_j) << ',' << p.n
                << '\n';
        }
        written.push_back(path);
    }
    return written;
}

}  // namespace edgebench

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "edgebench/harness.hpp"
#include "edgebench/metrics.hpp"

namespace edgebench {

struct ReportRow {
    std::string algorithm;  ///< "all" on the totals row
    std::string phase;
    std::string dataset;
    std::size_t n = 0;
    Metrics metrics;
    double ss_res = 0.0;
};

struct GroupedReport {
    std::vector<ReportRow> rows;  ///< sorted by (algorithm, phase, dataset)
    ReportRow total;
};

/**
 * Metrics per (algorithm, phase, dataset) over the records that have a
 * prediction. `predictions` is keyed by MeasurementRecord::key(); a key with
 * no matching ok record throws DataError.
 */
GroupedReport grouped_report(const RecordSet& records, const std::map<std::string, double>& predictions);

void write_report_csv(const GroupedReport& report, const std::filesystem::path& path);

enum class PlotAxis { size, resolution };

/// Mean energy over repetitions at one x value of a series.
struct PlotPoint {
    std::string algorithm;
    std::string phase;
    std::string dataset;
    std::string device;
    int workers = 1;
    int fixed = 0;  ///< resolution for size series, n_images for resolution series
    int x = 0;
    double mean_energy_j = 0.0;
    double std_energy_j = 0.0;
    std::size_t n = 0;
};

/// Failed records are ignored. Points are sorted by series, then x.
std::vector<PlotPoint> plot_series(const RecordSet& records, PlotAxis axis);

/// Writes energy_vs_size.csv and energy_vs_resolution.csv into `dir`; returns their paths.
std::vector<std::filesystem::path> write_plot_data(const RecordSet& records, const std::filesystem::path& dir);

}  // namespace edgebench

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "edgebench/harness.hpp"

namespace edgebench {

inline constexpr const char* kRecordsHeader =
    "algorithm,phase,dataset,n_images,resolution,channels,n_classes,color,device,workers,rep,seed,duration_s,"
    "energy_j,accuracy,status";

std::string format_record(const MeasurementRecord& record);
/// Throws DataError("<source>:<line>: ...") for malformed rows.
MeasurementRecord parse_record(const std::string& line, const std::string& source, std::size_t line_no);

void export_records(const RecordSet& records, const std::filesystem::path& path);
RecordSet load_records(const std::filesystem::path& path);
RecordSet read_records(std::istream& in, const std::string& source);

}  // namespace edgebench

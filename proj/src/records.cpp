#include "edgebench/records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <vector>

#include "edgebench/common.hpp"

namespace edgebench {

namespace {

std::string format_double(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

}  // namespace

std::string format_record(const MeasurementRecord& r) {
    const auto& c = r.config;
    std::string out;
    out += to_string(c.algorithm) + ',' + to_string(c.phase) + ',' + c.dataset + ',';
    out += std::to_string(c.n_images) + ',' + std::to_string(c.resolution) + ',' + std::to_string(c.channels) + ',';
    out += std::to_string(c.n_classes) + ',' + (c.color ? "1" : "0") + ',' + c.device + ',';
    out += std::to_string(c.workers) + ',' + std::to_string(r.repetition) + ',' + std::to_string(c.seed) + ',';
    out += format_double(r.duration_s) + ',' + format_double(r.energy_j) + ',';
    out += r.accuracy ? format_double(*r.accuracy) : std::string();
    out += ',' + r.status;
    return out;
}

MeasurementRecord parse_record(const std::string& line, const std::string& source, std::size_t line_no) {
    auto fail = [&](const std::string& what) -> void {
        throw DataError(source + ":" + std::to_string(line_no) + ": " + what);
    };
    const auto f = split_csv(line);
    if (f.size() != 16) {
        fail("expected 16 fields, found " + std::to_string(f.size()));
    }
    auto to_int = [&](const std::string& s, const char* field) {
        long long v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
            fail(std::string("bad integer in ") + field + ": '" + s + "'");
        }
        return v;
    };
    auto to_u64 = [&](const std::string& s, const char* field) {
        std::uint64_t v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
            fail(std::string("bad integer in ") + field + ": '" + s + "'");
        }
        return v;
    };
    auto to_double = [&](const std::string& s, const char* field) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size()) {
            fail(std::string("bad number in ") + field + ": '" + s + "'");
        }
        return v;
    };

    MeasurementRecord r;
    try {
        r.config.algorithm = parse_algorithm(f[0]);
        r.config.phase = parse_phase(f[1]);
    } catch (const ConfigError& e) {
        fail(e.what());
    }
    r.config.dataset = f[2];
    r.config.n_images = static_cast<int>(to_int(f[3], "n_images"));
    r.config.resolution = static_cast<int>(to_int(f[4], "resolution"));
    r.config.channels = static_cast<int>(to_int(f[5], "channels"));
    r.config.n_classes = static_cast<int>(to_int(f[6], "n_classes"));
    if (f[7] != "0" && f[7] != "1") {
        fail("color must be 0 or 1");
    }
    r.config.color = f[7] == "1";
    r.config.device = f[8];
    r.config.workers = static_cast<int>(to_int(f[9], "workers"));
    r.repetition = static_cast<int>(to_int(f[10], "rep"));
    r.config.seed = to_u64(f[11], "seed");
    r.duration_s = to_double(f[12], "duration_s");
    r.energy_j = to_double(f[13], "energy_j");
    if (!f[14].empty()) {
        r.accuracy = to_double(f[14], "accuracy");
    }
    r.status = f[15];
    if (r.status.empty()) {
        fail("empty status");
    }
    return r;
}

void export_records(const RecordSet& records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << kRecordsHeader << '\n';
    for (const auto& r : records) {
        out << format_record(r) << '\n';
    }
}

RecordSet read_records(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(source + ":1: missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kRecordsHeader) {
        throw DataError(source + ":1: unexpected header");
    }
    RecordSet out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        out.push_back(parse_record(line, source, line_no));
    }
    return out;
}

RecordSet load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_records(in, path.string());
}

}  // namespace edgebench

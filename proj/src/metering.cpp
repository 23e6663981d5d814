#include "edgebench/metering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edgebench/common.hpp"
#include "edgebench/parallel.hpp"
#include "json.hpp"

namespace edgebench {

void PowerTrace::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!std::isfinite(s.t_s) || !(s.volts >= 0.0) || !(s.amps >= 0.0)) {
            throw DataError("power trace: invalid sample " + std::to_string(i));
        }
        if (i > 0 && !(s.t_s > samples[i - 1].t_s)) {
            throw DataError("power trace: timestamps not strictly increasing at sample " + std::to_string(i));
        }
    }
}

double quantize(double value, double steps_per_unit) {
    return std::round(value * steps_per_unit) / steps_per_unit;
}

PowerSample quantize_sample(const PowerSample& sample) {
    return {sample.t_s, quantize(sample.volts, kVoltageStepsPerVolt), quantize(sample.amps, kCurrentStepsPerAmp)};
}

double integrate_trace(const PowerTrace& trace, double t_start, double t_stop) {
    const auto& s = trace.samples;
    if (!(t_start < t_stop)) {
        throw ConfigError("integrate_trace: window start must precede stop");
    }
    if (s.empty() || t_start < s.front().t_s || t_stop > s.back().t_s) {
        throw ConfigError("integrate_trace: window outside the trace span");
    }
    const auto first = std::lower_bound(s.begin(), s.end(), t_start,
                                        [](const PowerSample& p, double t) { return p.t_s < t; });
    const auto last = std::upper_bound(s.begin(), s.end(), t_stop,
                                       [](double t, const PowerSample& p) { return t < p.t_s; });
    if (last - first < 2) {
        throw ConfigError("integrate_trace: fewer than 2 samples in window");
    }

    auto power = [](const PowerSample& p) {
        const PowerSample q = quantize_sample(p);
        return q.volts * q.amps;
    };
    // Power at time t, linear between neighbouring samples.
    auto power_at = [&](double t) {
        const auto hi = std::lower_bound(s.begin(), s.end(), t, [](const PowerSample& p, double x) { return p.t_s < x; });
        if (hi->t_s == t || hi == s.begin()) {
            return power(*hi);
        }
        const auto lo = hi - 1;
        const double w = (t - lo->t_s) / (hi->t_s - lo->t_s);
        return power(*lo) * (1.0 - w) + power(*hi) * w;
    };

    double energy = 0.0;
    double t_prev = t_start;
    double p_prev = power_at(t_start);
    for (auto it = first; it != last; ++it) {
        if (it->t_s <= t_start) {
            continue;
        }
        const double p = power(*it);
        energy += 0.5 * (p_prev + p) * (it->t_s - t_prev);
        t_prev = it->t_s;
        p_prev = p;
    }
    if (t_prev < t_stop) {
        energy += 0.5 * (p_prev + power_at(t_stop)) * (t_stop - t_prev);
    }
    return energy;
}

PowerTrace load_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("t_s,volts,amps", 0) != 0) {
        throw DataError(path.string() + ":1: expected header t_s,volts,amps");
    }
    PowerTrace trace;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        PowerSample s;
        char extra = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &s.t_s, &s.volts, &s.amps, &extra) != 3) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed sample");
        }
        trace.samples.push_back(s);
    }
    trace.validate();
    if (trace.samples.size() >= 2) {
        const double span = trace.samples.back().t_s - trace.samples.front().t_s;
        trace.nominal_rate_hz = static_cast<double>(trace.samples.size() - 1) / span;
    }
    return trace;
}

void save_trace_csv(const PowerTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "t_s,volts,amps\n";
    char buf[96];
    for (const auto& s : trace.samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t_s, s.volts, s.amps);
        out << buf;
    }
}

void DeviceProfile::validate() const {
    if (name.empty()) {
        throw ConfigError("device profile: name is required");
    }
    if (cores < 1) {
        throw ConfigError("device profile '" + name + "': cores must be >= 1");
    }
    if (!(idle_power_w >= 0.0) || !(active_power_per_core_w >= 0.0)) {
        throw ConfigError("device profile '" + name + "': powers must be >= 0");
    }
    if (!(throughput_scale > 0.0)) {
        throw ConfigError("device profile '" + name + "': throughput_scale must be > 0");
    }
}

std::vector<DeviceProfile> default_profiles() {
    return {
        {"rpi3", 4, 0.5, 1.5, 1.2},
        {"bbb", 1, 0.5, 1.5, 1.0},
    };
}

namespace {

DeviceProfile profile_from_json(const nlohmann::json& j) {
    DeviceProfile p;
    p.name = j.at("name").get<std::string>();
    p.cores = j.at("cores").get<int>();
    p.idle_power_w = j.at("idle_power_w").get<double>();
    p.active_power_per_core_w = j.at("active_power_per_core_w").get<double>();
    p.throughput_scale = j.value("throughput_scale", 1.0);
    p.validate();
    return p;
}

}  // namespace

std::vector<DeviceProfile> load_profiles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open profile file " + path.string());
    }
    try {
        const auto j = nlohmann::json::parse(in);
        const auto& list = j.is_object() && j.contains("profiles") ? j.at("profiles") : j;
        std::vector<DeviceProfile> out;
        if (list.is_array()) {
            for (const auto& item : list) {
                out.push_back(profile_from_json(item));
            }
        } else {
            out.push_back(profile_from_json(list));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("profile file " + path.string() + ": " + e.what());
    }
}

const DeviceProfile& find_profile(const std::vector<DeviceProfile>& profiles, const std::string& name) {
    for (const auto& p : profiles) {
        if (p.name == name) {
            return p;
        }
    }
    throw ConfigError("unknown device profile '" + name + "'");
}

double model_energy(const DeviceProfile& profile, double duration_s, int active_cores) {
    if (active_cores < 1 || active_cores > profile.cores) {
        throw ConfigError("model_energy: active_cores=" + std::to_string(active_cores) + " outside [1, " +
                          std::to_string(profile.cores) + "] for '" + profile.name + "'");
    }
    if (!(duration_s >= 0.0)) {
        throw ConfigError("model_energy: duration must be >= 0");
    }
    return (profile.idle_power_w + active_cores * profile.active_power_per_core_w) * duration_s;
}

MeterClock steady_seconds() {
    return [] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    };
}

Meter Meter::analytical(DeviceProfile profile, MeterClock clock) {
    profile.validate();
    Meter m;
    m.profile_ = std::move(profile);
    m.clock_ = std::move(clock);
    return m;
}

Meter Meter::from_trace(PowerTrace trace, MeterClock clock) {
    trace.validate();
    Meter m;
    m.trace_ = std::move(trace);
    m.clock_ = std::move(clock);
    return m;
}

void Meter::set_active_cores(int cores) {
    if (cores < 1 || (profile_ && cores > profile_->cores)) {
        throw ConfigError("meter: active cores " + std::to_string(cores) + " out of range");
    }
    active_cores_ = cores;
}

SessionResult Meter::session(const std::function<void()>& phase) {
    if (in_session_) {
        throw ConfigError("meter: nested sessions are not allowed");
    }
    in_session_ = true;
    struct Reset {
        bool& flag;
        ~Reset() { flag = false; }
    } reset{in_session_};

    RegionLedger ledger;
    double t0 = 0.0;
    double t1 = 0.0;
    {
        ScopedRegionLedger guard(ledger);
        t0 = clock_();
        phase();
        t1 = clock_();
    }
    const double wall = std::max(t1 - t0, 0.0);
    if (trace_) {
        return {wall, wall > 0.0 ? integrate_trace(*trace_, t0, t1) : 0.0};
    }
    const double device = std::max(wall - ledger.region_wall_s + ledger.critical_cpu_s, 0.0) /
                          profile_->throughput_scale;
    return {device, model_energy(*profile_, device, active_cores_)};
}

}  // namespace edgebench

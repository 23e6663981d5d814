#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace edgebench {

struct PowerSample {
    double t_s = 0.0;
    double volts = 0.0;
    double amps = 0.0;
};

/// Sampled supply voltage and current; timestamps strictly increasing.
struct PowerTrace {
    std::vector<PowerSample> samples;
    double nominal_rate_hz = 1000.0;

    void validate() const;
};

/// Instrument resolution: 100 uA current steps and 4 mV voltage steps.
inline constexpr double kCurrentStepsPerAmp = 10'000.0;
inline constexpr double kVoltageStepsPerVolt = 250.0;

/// Round-to-nearest onto a grid with `steps_per_unit` steps per unit.
double quantize(double value, double steps_per_unit);
PowerSample quantize_sample(const PowerSample& sample);

/**
 * Energy in joules over [t_start, t_stop]. Samples are quantized to the
 * instrument grid, power V*I is linearly interpolated between samples (so the
 * window edges need not fall on a sample), and the result is the trapezoidal
 * integral. The window must lie inside the trace and contain at least two samples.
 */
double integrate_trace(const PowerTrace& trace, double t_start, double t_stop);

/// CSV `t_s,volts,amps` with header.
PowerTrace load_trace_csv(const std::filesystem::path& path);
void save_trace_csv(const PowerTrace& trace, const std::filesystem::path& path);

/// Analytical board power model: idle draw plus a per-active-core increment.
struct DeviceProfile {
    std::string name;
    int cores = 1;
    double idle_power_w = 0.0;
    double active_power_per_core_w = 0.0;
    double throughput_scale = 1.0;  ///< relative op rate; measured time is divided by it

    void validate() const;
};

/// Calibration defaults for the "rpi3" (4 cores) and "bbb" (1 core) profiles.
std::vector<DeviceProfile> default_profiles();
/// JSON file holding one profile object, a list of them, or {"profiles": [...]}.
std::vector<DeviceProfile> load_profiles(const std::filesystem::path& path);
const DeviceProfile& find_profile(const std::vector<DeviceProfile>& profiles, const std::string& name);

/// (idle + active_cores * per_core) * duration. Throws ConfigError for cores outside [1, profile.cores].
double model_energy(const DeviceProfile& profile, double duration_s, int active_cores);

struct SessionResult {
    double duration_s = 0.0;
    double energy_j = 0.0;
};

/// Monotonic time source in seconds.
using MeterClock = std::function<double()>;
MeterClock steady_seconds();

/**
 * Scoped energy meter. Energy comes either from a power trace whose
 * timestamps share the meter clock's frame, or from a device profile.
 *
 * Under a device profile the session duration is device-equivalent time:
 * wall time, except that every data-parallel region is charged its longest
 * per-worker CPU time (as if each worker had a dedicated core), divided by
 * the profile's throughput_scale.
 */
class Meter {
public:
    static Meter analytical(DeviceProfile profile, MeterClock clock = steady_seconds());
    static Meter from_trace(PowerTrace trace, MeterClock clock = steady_seconds());

    bool uses_trace() const { return trace_.has_value(); }
    const DeviceProfile* profile() const { return profile_ ? &*profile_ : nullptr; }

    /// Cores credited as active during the next session (analytical meter).
    void set_active_cores(int cores);
    int active_cores() const { return active_cores_; }

    /// Run `phase` and meter exactly its window. Nested sessions throw ConfigError.
    SessionResult session(const std::function<void()>& phase);

private:
    Meter() = default;

    std::optional<DeviceProfile> profile_;
    std::optional<PowerTrace> trace_;
    MeterClock clock_;
    int active_cores_ = 1;
    bool in_session_ = false;
};

}  // namespace edgebench

#pragma once

#include <cstddef>
#include <functional>

namespace edgebench {

/// CPU time consumed by the calling thread, in seconds.
double thread_cpu_seconds();

/**
 * Accounting for data-parallel regions executed while a ledger is installed
 * on the calling thread. A region contributes its wall time and the longest
 * per-worker CPU time (its critical path on dedicated cores).
 */
struct RegionLedger {
    double region_wall_s = 0.0;
    double critical_cpu_s = 0.0;
    std::size_t regions = 0;
};

/// Installs a ledger for the current thread for the lifetime of the guard.
class ScopedRegionLedger {
public:
    explicit ScopedRegionLedger(RegionLedger& ledger);
    ~ScopedRegionLedger();
    ScopedRegionLedger(const ScopedRegionLedger&) = delete;
    ScopedRegionLedger& operator=(const ScopedRegionLedger&) = delete;

private:
    RegionLedger* previous_;
};

/**
 * Split [0, n) into `workers` contiguous chunks and run `body(begin, end)` on
 * each chunk in its own thread. With one worker (or n <= 1) the body runs
 * inline. Chunk boundaries depend only on n and workers. The first exception
 * thrown by any chunk is rethrown after all threads join.
 */
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace edgebench

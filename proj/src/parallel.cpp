#include "edgebench/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <time.h>

namespace edgebench {

namespace {
thread_local RegionLedger* active_ledger = nullptr;
}

double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

ScopedRegionLedger::ScopedRegionLedger(RegionLedger& ledger) : previous_(active_ledger) {
    active_ledger = &ledger;
}

ScopedRegionLedger::~ScopedRegionLedger() {
    active_ledger = previous_;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) {
        return;
    }
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (threads <= 1) {
        body(0, n);
        return;
    }

    std::vector<double> cpu(threads, 0.0);
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto wall_start = std::chrono::steady_clock::now();
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            const std::size_t begin = w * n / threads;
            const std::size_t end = (w + 1) * n / threads;
            pool.emplace_back([&, w, begin, end] {
                const double c0 = thread_cpu_seconds();
                try {
                    body(begin, end);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
                cpu[w] = thread_cpu_seconds() - c0;
            });
        }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

    if (active_ledger != nullptr) {
        active_ledger->region_wall_s += wall;
        active_ledger->critical_cpu_s += *std::max_element(cpu.begin(), cpu.end());
        ++active_ledger->regions;
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace edgebench

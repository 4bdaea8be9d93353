#pragma once

// Deterministic static-partition batch engine.
//
// Work is a flat index range split into contiguous chunks of K units, one chunk
// per worker. Callers write results into pre-sized slots indexed by unit, so the
// output never depends on the number of workers or on scheduling order.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace mrep {

struct WorkPlan {
    std::size_t total_units = 0;
    std::size_t workers = 1;
    std::size_t units_per_worker = 0;  // K

    /// Half-open unit range assigned to `worker`.
    [[nodiscard]] std::pair<std::size_t, std::size_t> range(std::size_t worker) const {
        const std::size_t begin = std::min(total_units, worker * units_per_worker);
        const std::size_t end = std::min(total_units, begin + units_per_worker);
        return {begin, end};
    }
};

/// K = ceil(total_units / workers).
inline WorkPlan plan_work(std::size_t total_units, std::size_t workers) {
    if (workers == 0) workers = 1;
    WorkPlan plan{total_units, workers, (total_units + workers - 1) / workers};
    if (total_units > 0 && plan.units_per_worker == 0) plan.units_per_worker = 1;
    return plan;
}

/// Number of workers used when the caller passes 0.
inline std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(begin, end) over the plan's chunks. The first exception thrown by any
/// chunk is rethrown after all workers have joined.
template <class Body>
void parallel_for(std::size_t total_units, std::size_t workers, Body&& body) {
    if (workers == 0) workers = default_workers();
    const WorkPlan plan = plan_work(total_units, workers);
    if (total_units == 0) return;
    if (plan.workers == 1 || total_units <= plan.units_per_worker) {
        body(std::size_t{0}, total_units);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> threads;
        threads.reserve(plan.workers);
        for (std::size_t w = 0; w < plan.workers; ++w) {
            const auto [begin, end] = plan.range(w);
            if (begin >= end) break;
            threads.emplace_back([&, begin = begin, end = end] {
                try {
                    body(begin, end);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace mrep

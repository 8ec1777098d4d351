#pragma once

// Deterministic work pool. Tasks are grouped into fixed-size chunks that do not
// depend on the worker count; each chunk is reduced sequentially and chunk
// results are merged in index order, so the output is bit-identical for any
// number of workers.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace kinlab {

inline constexpr std::size_t default_chunk = 8;

/// Resolve a requested worker count; values < 1 mean "one per hardware thread".
inline int resolve_workers(int requested) {
    if (requested >= 1) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// make_context() -> Ctx is called once per worker thread (e.g. to own FFT plans).
/// task(Ctx&, Acc&, i) folds task i into a chunk accumulator that starts as a copy
/// of `identity`; merge(Acc&, const Acc&) combines chunk accumulators in order.
template <class Acc, class MakeContext, class Task, class Merge>
Acc ordered_reduce(std::size_t n_tasks, int workers, const Acc& identity, MakeContext make_context,
                   Task task, Merge merge, std::size_t chunk = default_chunk) {
    if (chunk == 0) chunk = 1;
    const std::size_t n_chunks = (n_tasks + chunk - 1) / chunk;
    std::vector<std::optional<Acc>> partial(n_chunks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        try {
            auto ctx = make_context();
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                Acc acc = identity;
                const std::size_t end = std::min(n_tasks, (c + 1) * chunk);
                for (std::size_t i = c * chunk; i < end; ++i) task(ctx, acc, i);
                partial[c].emplace(std::move(acc));
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n_chunks;
        }
    };

    const auto n_threads =
        static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)), n_chunks));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    Acc total = identity;
    for (auto& p : partial) merge(total, *p);
    return total;
}

/// Independent tasks writing to disjoint outputs; order does not matter.
template <class MakeContext, class Task>
void parallel_for(std::size_t n_tasks, int workers, MakeContext make_context, Task task,
                  std::size_t chunk = default_chunk) {
    struct Nothing {};
    ordered_reduce(
        n_tasks, workers, Nothing{}, make_context,
        [&](auto& ctx, Nothing&, std::size_t i) { task(ctx, i); }, [](Nothing&, const Nothing&) {},
        chunk);
}

}  // namespace kinlab

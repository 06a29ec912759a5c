#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cstdint>
#include <functional>
#include <future>
#include <thread>
#include <vector>

namespace hbasket {

// Worker cap: HB_THREADS env var, else hardware concurrency. Results must be
// invariant to this value, so parallel loops below always split work into
// batches whose boundaries depend only on the problem, never on the cap.
inline int worker_count() {
    if (const char* env = std::getenv("HB_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

// Runs fn(batch_index, begin, end) over [0, n) split into fixed-size batches.
// Batches are claimed dynamically but identified by index, so the caller can
// combine per-batch results in deterministic batch order.
inline void parallel_batches(std::uint64_t n, std::uint64_t batch_size,
                             const std::function<void(std::size_t, std::uint64_t, std::uint64_t)>& fn) {
    if (n == 0) return;
    batch_size = std::max<std::uint64_t>(1, batch_size);
    std::size_t n_batches = static_cast<std::size_t>((n + batch_size - 1) / batch_size);
    int workers = std::min<int>(worker_count(), static_cast<int>(n_batches));
    if (workers <= 1) {
        for (std::size_t bi = 0; bi < n_batches; ++bi)
            fn(bi, bi * batch_size, std::min(n, (bi + 1) * batch_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t bi = next.fetch_add(1);
            if (bi >= n_batches) return;
            fn(bi, bi * batch_size, std::min(n, (bi + 1) * batch_size));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
}

} // namespace hbasket

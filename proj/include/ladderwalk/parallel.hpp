#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ladderwalk {

// Runs fn(chunk, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries do not depend on `workers`, so callers that reduce
// per-chunk results in chunk order get worker-count invariant output.
template <class Fn>
void parallel_chunks(long long n, long long chunk, int workers, Fn&& fn) {
    if (n <= 0) return;
    chunk = std::max<long long>(chunk, 1);
    const long long chunks = (n + chunk - 1) / chunk;
    const int nthreads = static_cast<int>(std::clamp<long long>(workers, 1, chunks));
    auto run_one = [&](long long c) {
        const long long begin = c * chunk;
        fn(c, begin, std::min(n, begin + chunk));
    };
    if (nthreads == 1) {
        for (long long c = 0; c < chunks; ++c) run_one(c);
        return;
    }
    std::atomic<long long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            for (long long c = next++; c < chunks; c = next++) {
                try {
                    run_one(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = chunks;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace ladderwalk

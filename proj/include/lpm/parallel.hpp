#pragma once

// Deterministic fork-join helper.  Work is split into fixed-size chunks by
// index; workers pull chunks from an atomic counter, so any thread count
// produces the same chunk decomposition.  Callers must combine per-chunk
// results in chunk order if bit-stable output is required.

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lpm {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Invokes fn(chunk_index, begin, end) for chunks [i*chunk, min((i+1)*chunk, count)).
// fn runs concurrently on up to `threads` workers; exceptions are rethrown
// on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t chunk, int threads, Fn&& fn) {
    if (count == 0) return;
    if (chunk == 0) chunk = 1;
    const std::size_t nchunks = (count + chunk - 1) / chunk;
    if (threads <= 1 || nchunks <= 1) {
        for (std::size_t i = 0; i < nchunks; ++i)
            fn(i, i * chunk, std::min((i + 1) * chunk, count));
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= nchunks) return;
            try {
                fn(i, i * chunk, std::min((i + 1) * chunk, count));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nworkers = std::min<std::size_t>(static_cast<std::size_t>(threads), nchunks);
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace lpm

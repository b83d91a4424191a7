#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ddlab {

/// Global worker-thread cap. 0 means "use hardware concurrency".
void set_thread_count(int n);
int thread_count();

namespace par {

inline constexpr std::int64_t kChunk = 4096;

namespace detail {

/// Runs body(chunk_index) for every chunk over the worker threads, capturing
/// the first exception and rethrowing it on the calling thread.
template <class Body>
void run_chunks(std::int64_t nchunks, Body&& body) {
    const int nthreads =
        static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(thread_count(), nchunks)));
    if (nthreads == 1) {
        for (std::int64_t c = 0; c < nchunks; ++c)
            body(c);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::int64_t c = t; c < nchunks; c += nthreads)
                    body(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace detail

/// Runs fn(begin, end) over [0,n) split into fixed-size chunks. The chunk
/// grid is independent of the thread count, so chunk-indexed accumulation is
/// reproducible.
template <class Fn>
void for_chunks(std::int64_t n, Fn&& fn) {
    if (n <= 0)
        return;
    const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
    detail::run_chunks(nchunks, [&](std::int64_t c) {
        fn(c * kChunk, std::min(n, (c + 1) * kChunk));
    });
}

/// Deterministic parallel reduction: partial sums are produced per chunk and
/// combined in chunk order, so the result does not depend on the thread count.
template <class Fn>
double sum_chunks(std::int64_t n, Fn&& fn) {
    if (n <= 0)
        return 0.0;
    const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
    detail::run_chunks(nchunks, [&](std::int64_t c) {
        double acc = 0.0;
        const std::int64_t e = std::min(n, (c + 1) * kChunk);
        for (std::int64_t i = c * kChunk; i < e; ++i)
            acc += fn(i);
        partial[static_cast<std::size_t>(c)] = acc;
    });
    double total = 0.0;
    for (double p : partial)
        total += p;
    return total;
}

} // namespace par
} // namespace ddlab

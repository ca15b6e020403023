#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace localvar {

/// Runs fn(i) for i in [0, n) across `workers` threads. Each index is
/// processed exactly once; callers write into pre-sized slots so results
/// are identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nthreads = std::min<std::size_t>(workers, n);
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        threads.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += nthreads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

}  // namespace localvar

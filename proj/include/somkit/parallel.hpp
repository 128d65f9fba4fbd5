#pragma once

#include <cstddef>
#include <functional>

namespace somkit {

/// Process-wide worker count used by data-parallel loops. 0 restores the
/// default (SOMKIT_THREADS, else hardware concurrency).
void set_thread_count(int threads);
int thread_count();

/// Overrides the worker count for the calling thread while alive.
class ScopedThreadCount {
public:
    explicit ScopedThreadCount(int threads);
    ~ScopedThreadCount();
    ScopedThreadCount(const ScopedThreadCount&) = delete;
    ScopedThreadCount& operator=(const ScopedThreadCount&) = delete;

private:
    int previous_;
};

/// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
/// visited exactly once; callers only write per-index outputs, so results
/// never depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 16);

}  // namespace somkit

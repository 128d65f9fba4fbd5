#include "somkit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace somkit {
namespace {

std::atomic<int> g_threads{0};
thread_local int t_threads = 0;

int default_threads() {
    if (const char* env = std::getenv("SOMKIT_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

void set_thread_count(int threads) { g_threads = std::max(0, threads); }

int thread_count() {
    if (t_threads > 0) return t_threads;
    const int g = g_threads.load();
    return g > 0 ? g : default_threads();
}

ScopedThreadCount::ScopedThreadCount(int threads) : previous_(t_threads) { t_threads = threads; }
ScopedThreadCount::~ScopedThreadCount() { t_threads = previous_; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
    if (n == 0) return;
    const std::size_t max_workers = (n + min_chunk - 1) / std::max<std::size_t>(min_chunk, 1);
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(thread_count()), max_workers);
    if (workers <= 1) {
        body(0, n);
        return;
    }

    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
            ScopedThreadCount single(1);
            try {
                body(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    try {
        ScopedThreadCount single(1);
        body(0, std::min(n, chunk));
    } catch (...) {
        errors[0] = std::current_exception();
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace somkit

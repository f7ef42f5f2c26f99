#include "safempd/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace safempd {

namespace {
thread_local int g_worker_override = 0;

int env_workers() {
    static const int cached = [] {
        if (const char* env = std::getenv("SAFEMPD_WORKERS")) {
            const int n = std::atoi(env);
            if (n >= 1) return n;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }();
    return cached;
}
} // namespace

int worker_count() {
    return g_worker_override > 0 ? g_worker_override : env_workers();
}

void set_worker_override(int n) {
    g_worker_override = n;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
        const int lo = static_cast<int>(static_cast<long long>(n) * w / workers);
        const int hi = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
        pool.emplace_back([&, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace safempd

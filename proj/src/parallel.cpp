#include "dproj/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dproj {

namespace {
std::atomic<unsigned> g_limit{0};
}

void set_worker_limit(unsigned limit) noexcept { g_limit = limit; }

unsigned worker_limit() noexcept {
    const unsigned limit = g_limit.load();
    if (limit > 0)
        return limit;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_chunks(std::size_t chunk_count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(worker_limit(), chunk_count);
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunk_count; ++c)
            fn(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t c = next++; c < chunk_count; c = next++) {
            try {
                fn(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w)
        pool.emplace_back(run);
    run();
    pool.clear();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace dproj

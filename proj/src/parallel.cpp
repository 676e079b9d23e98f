#include "orbitknots/parallel.hpp"

#include <atomic>

namespace orbitknots {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() {
    int n = g_max_threads.load();
    if (n == 0) {
        n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(max_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = std::max<std::size_t>(1, n / (workers * 8));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= n) break;
                const std::size_t end = std::min(begin + chunk, n);
                for (std::size_t i = begin; i < end; ++i) fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace orbitknots

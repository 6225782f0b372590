#include "fraclab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace fraclab {

namespace {
std::atomic<int> g_threads{0};

int resolve_threads() {
    int t = g_threads.load();
    if (t > 0) return t;
    if (const char* env = std::getenv("FRACLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}
}  // namespace

int thread_count() { return resolve_threads(); }

void set_thread_count(int n) { g_threads.store(n); }

void parallel_for_chunks(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t, std::int64_t)>& f) {
    const std::int64_t len = end - begin;
    if (len <= 0) return;
    const int nt = thread_count();
    if (nt <= 1 || len < 2) {
        f(begin, end);
        return;
    }
    // Fixed chunking: independent of nt so ownership of index ranges is stable.
    const std::int64_t chunk = std::max<std::int64_t>(1, (len + 255) / 256);
    std::atomic<std::int64_t> next{begin};
    auto worker = [&]() {
        for (;;) {
            const std::int64_t c0 = next.fetch_add(chunk);
            if (c0 >= end) break;
            f(c0, std::min(end, c0 + chunk));
        }
    };
    std::vector<std::thread> pool;
    const int spawn = std::min<std::int64_t>(nt, (len + chunk - 1) / chunk);
    pool.reserve(spawn - 1);
    for (int t = 1; t < spawn; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& f) {
    parallel_for_chunks(begin, end, [&](std::int64_t a, std::int64_t b) {
        for (std::int64_t i = a; i < b; ++i) f(i);
    });
}

double pairwise_sum(std::span<const double> a) {
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = a[0];
        for (std::size_t i = 1; i < n; ++i) s += a[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a.subspan(0, half)) + pairwise_sum(a.subspan(half));
}

}  // namespace fraclab

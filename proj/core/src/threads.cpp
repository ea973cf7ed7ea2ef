#include "oblab/threads.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace oblab {

int thread_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (const char* env = std::getenv("LAB_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, cap);
    }
    return hw;
}

void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    int workers = thread_count();
    if (workers <= 1 || n < 2048) {
        fn(0, n);
        return;
    }
    std::size_t w = static_cast<std::size_t>(workers);
    std::size_t chunk = (n + w - 1) / w;
    std::vector<std::thread> pool;
    for (std::size_t b = 0; b < n; b += chunk) {
        std::size_t e = std::min(n, b + chunk);
        pool.emplace_back([&, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace oblab

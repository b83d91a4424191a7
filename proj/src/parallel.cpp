#include "ddlab/parallel.hpp"

#include <atomic>

namespace ddlab {

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) {
    g_threads.store(n < 0 ? 0 : n);
}

int thread_count() {
    int n = g_threads.load();
    if (n == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        n = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return n;
}

} // namespace ddlab

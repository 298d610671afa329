#include "ryd/parallel.hpp"

namespace ryd {

namespace {
unsigned g_workers = 0; // 0 = hardware_concurrency
}

unsigned default_workers() {
    return g_workers ? g_workers : std::max(1u, std::thread::hardware_concurrency());
}

void set_default_workers(unsigned w) { g_workers = w; }

} // namespace ryd

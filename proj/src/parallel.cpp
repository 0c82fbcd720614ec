#include "csrbm/parallel.hpp"

#include <atomic>

namespace csrbm {

namespace {
std::atomic<int> g_workers{0};
}

void set_default_workers(int workers) { g_workers.store(workers < 0 ? 0 : workers); }

int default_workers() {
  int w = g_workers.load();
  if (w > 0) return w;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace csrbm

#include "resntk/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace resntk {

namespace {
std::atomic<unsigned> g_max_threads{0};
}

void set_max_threads(unsigned n) { g_max_threads.store(n); }

unsigned max_threads() {
  const unsigned cap = g_max_threads.load();
  if (cap > 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::size_t chunk_count(std::size_t total, std::size_t chunk_size) {
  if (total == 0 || chunk_size == 0) return 0;
  return (total + chunk_size - 1) / chunk_size;
}

void parallel_chunks(std::size_t total, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn) {
  const std::size_t chunks = chunk_count(total, chunk_size);
  if (chunks == 0) return;
  const unsigned workers =
      unsigned(std::min<std::size_t>(max_threads(), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      fn(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned i = 0; i + 1 < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace resntk

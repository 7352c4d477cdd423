#ifndef PHONON_THREADS_HPP
#define PHONON_THREADS_HPP

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace phonon {

/// Worker count: PHONON_THREADS caps it, hardware concurrency is the default.
inline unsigned thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("PHONON_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1 && static_cast<unsigned long>(v) < hw) return static_cast<unsigned>(v);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return hw;
}

// Runs body(begin, end, chunk_index) over [0,n) split into fixed-size chunks.
// Chunk boundaries depend only on chunk_size, never on the worker count, so
// any per-chunk partial results merged in chunk order are bit-stable.
inline void parallel_chunks(std::size_t n, std::size_t chunk_size,
                            const std::function<void(std::size_t, std::size_t,
                                                     std::size_t)>& body) {
  if (n == 0) return;
  std::size_t nchunks = (n + chunk_size - 1) / chunk_size;
  unsigned workers = thread_count();
  if (workers <= 1 || nchunks <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c)
      body(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nchunks) break;
      body(c * chunk_size, std::min(n, (c + 1) * chunk_size), c);
    }
  };
  std::vector<std::thread> pool;
  unsigned nt = std::min<std::size_t>(workers, nchunks);
  pool.reserve(nt);
  for (unsigned t = 0; t + 1 < nt; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

}  // namespace phonon

#endif

#include "rlw/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace rlw {

void retain_heap_memory() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, -1);
#endif
}

std::size_t worker_count() {
  if (const char* env = std::getenv("RLW_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double reduce_chunks(std::size_t count, std::span<double> gradient,
                     const std::function<double(std::size_t, std::span<double>)>& chunk) {
  const std::size_t wave = std::max<std::size_t>(1, worker_count());
  std::vector<std::vector<double>> buffers(std::min(wave, count),
                                           std::vector<double>(gradient.size()));
  std::vector<double> values(buffers.size());
  double total = 0.0;
  for (std::size_t begin = 0; begin < count; begin += wave) {
    const std::size_t n = std::min(wave, count - begin);
    for (std::size_t k = 0; k < n; ++k) std::fill(buffers[k].begin(), buffers[k].end(), 0.0);
    parallel_for(n, [&](std::size_t k) { values[k] = chunk(begin + k, buffers[k]); });
    for (std::size_t k = 0; k < n; ++k) {
      total += values[k];
      for (std::size_t i = 0; i < gradient.size(); ++i) gradient[i] += buffers[k][i];
    }
  }
  return total;
}

}  // namespace rlw

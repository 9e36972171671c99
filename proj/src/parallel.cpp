#include "cartoonkit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace cartoonkit {
namespace {

int default_thread_count() {
  if (const char* env = std::getenv("CARTOONKIT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::atomic<int>& threads_setting() {
  static std::atomic<int> n{default_thread_count()};
  return n;
}

// Nested parallel_for calls run inline on the calling worker.
thread_local bool inside_parallel_region = false;

}  // namespace

int thread_count() noexcept { return threads_setting().load(); }

void set_thread_count(int n) noexcept { threads_setting().store(std::max(1, n)); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1 || inside_parallel_region) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    const std::size_t lo = begin + n * t / workers;
    const std::size_t hi = begin + n * (t + 1) / workers;
    pool.emplace_back([&, lo, hi, t] {
      inside_parallel_region = true;
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cartoonkit

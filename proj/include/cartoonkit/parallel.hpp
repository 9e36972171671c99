#pragma once

#include <cstddef>
#include <functional>

namespace cartoonkit {

/// Process-wide worker count used by parallel_for. Defaults to
/// CARTOONKIT_THREADS when set, otherwise hardware concurrency.
int thread_count() noexcept;
void set_thread_count(int n) noexcept;

/// Runs body(i) for i in [begin, end) over a fixed contiguous partition.
/// Callers must only write to locations owned by index i; results are then
/// independent of the thread count.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& body);

}  // namespace cartoonkit

#pragma once

#include <cstddef>
#include <functional>

namespace hdrkit {

/// Caps worker threads used by per-row kernels. 0 selects hardware concurrency.
void set_thread_limit(unsigned threads);
unsigned thread_limit();

/// Runs body(i) for i in [begin, end). Iterations must be independent; each
/// writes only its own output slots, so results do not depend on the thread count.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace hdrkit

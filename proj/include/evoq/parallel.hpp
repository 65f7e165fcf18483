#pragma once

#include <cstddef>
#include <functional>

namespace evoq {

// Thread cap from EVOQ_THREADS, else the hardware count.
unsigned thread_count();

// Runs body(i) for i in [0, count) over contiguous chunks. Each index writes
// only its own slot, so results do not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace evoq

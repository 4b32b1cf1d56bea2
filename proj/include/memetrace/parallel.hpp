#pragma once

#include <cstddef>
#include <functional>

namespace memetrace {

/// Worker cap for data-parallel sweeps; 0 restores the hardware default.
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs task(0..count-1) on up to max_threads() workers. Tasks must not share
/// mutable state; completion order is unspecified.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

} // namespace memetrace

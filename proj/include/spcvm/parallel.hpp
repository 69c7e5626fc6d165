#pragma once

#include <cstddef>
#include <functional>

namespace spcvm {

// Process-wide worker cap, set once by the CLI --threads flag.
// Defaults to hardware concurrency.
unsigned max_threads();
void set_max_threads(unsigned n);

// Runs fn(i) for i in [0, count). Work items are claimed from a shared
// atomic counter; every item must write only to its own output slot, so
// the schedule never affects results.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

} // namespace spcvm

#pragma once

#include <cstddef>
#include <functional>

namespace ydl {

/// Runs fn(i) for i in [0, n) on `threads` workers (1 = inline on the caller).
/// Tasks must be independent and write only to their own output slots; results
/// are then identical for every thread count, which is what makes whole-run
/// outputs byte-stable under --threads changes. Exceptions from tasks are
/// captured and rethrown (first one wins) after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace ydl

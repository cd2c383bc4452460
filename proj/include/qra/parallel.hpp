#pragma once

#include <cstddef>
#include <functional>

namespace qra {

// Runs fn(i) for i in [0, n). Work is handed out index-by-index to at most
// n_threads workers; callers that need deterministic reductions store one
// partial result per index and combine them in index order afterwards.
void parallel_for(std::size_t n, unsigned n_threads,
                  const std::function<void(std::size_t)>& fn);

// Process-wide default used by library entry points; the CLI sets it from
// --threads. 0 means hardware concurrency.
void set_default_threads(unsigned n);
unsigned default_threads();

} // namespace qra

#pragma once

#include <cstddef>
#include <functional>

namespace resntk {

// Worker cap for parallel loops. 0 restores the hardware default.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs fn(chunk_index, begin, end) over [0, total) split into chunks of
// chunk_size. Chunk boundaries depend only on (total, chunk_size), so callers
// that keep one accumulator per chunk and merge them in chunk order get
// results independent of the worker count.
void parallel_chunks(std::size_t total, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn);

std::size_t chunk_count(std::size_t total, std::size_t chunk_size);

}  // namespace resntk

#pragma once

#include <cstddef>
#include <functional>

namespace condshrink {

/// Number of workers to use for `requested` (0 = hardware concurrency).
int resolve_threads(int requested);

/// Splits [0, total) into fixed blocks of `block_size` and runs
/// `body(block_index, begin, end)` for every block on up to `threads` workers.
/// Block boundaries depend only on `total` and `block_size`, so per-block
/// results reduced in block order are independent of the worker count.
/// The first exception thrown by any block is rethrown on the caller.
void for_each_block(std::size_t total, std::size_t block_size, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t block_count(std::size_t total, std::size_t block_size) {
    return (total + block_size - 1) / block_size;
}

}  // namespace condshrink

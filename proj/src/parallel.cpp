#include "condshrink/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace condshrink {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void for_each_block(std::size_t total, std::size_t block_size, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    const std::size_t blocks = block_count(total, block_size);
    if (blocks == 0) return;
    const auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * block_size;
        body(b, begin, std::min(total, begin + block_size));
    };
    const int workers = std::min<std::size_t>(resolve_threads(threads), blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= blocks) return;
                try {
                    run_block(b);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    next.store(blocks);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace condshrink

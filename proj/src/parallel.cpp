#include "gwsos/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gwsos {

int default_jobs() {
    if (const char* env = std::getenv("GWSOS_JOBS")) {
        try {
            const int j = std::stoi(env);
            if (j >= 1) return j;
        } catch (...) {
        }
    }
    return 1;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1, jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr error;
    std::size_t error_index = count;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (i < error_index) {
                        error_index = i;
                        error = std::current_exception();
                    }
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace gwsos

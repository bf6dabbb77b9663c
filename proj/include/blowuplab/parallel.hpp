#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace blowuplab {

/// Worker count from BLOWUPLAB_THREADS, else hardware concurrency.
inline unsigned default_worker_count()
{
    if (const char* env = std::getenv("BLOWUPLAB_THREADS"))
    {
        try
        {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        }
        catch (const std::exception&)
        {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs task(i) for i in [0, count) on `workers` threads. Each index is
/// executed exactly once; callers write results into slot i, so the output
/// does not depend on the schedule. The first exception is rethrown.
template <class Task>
void parallel_for(std::size_t count, unsigned workers, Task&& task)
{
    if (workers <= 1 || count <= 1)
    {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (true)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try
            {
                task(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::jthread> pool;
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(body);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace blowuplab

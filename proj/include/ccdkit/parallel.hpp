#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace ccdkit {

// Static chunking over [0, n). body(worker, begin, end) runs once per chunk;
// chunk boundaries depend only on (n, threads), never on scheduling, so
// worker-local outputs can be concatenated in worker order deterministically.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body)
{
    if (threads <= 1 || n <= 1) {
        body(0u, std::size_t(0), n);
        return;
    }
    unsigned workers = threads;
    if (static_cast<std::size_t>(workers) > n)
        workers = static_cast<unsigned>(n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end)
            break;
        pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
    }
    for (auto& t : pool)
        t.join();
}

} // namespace ccdkit

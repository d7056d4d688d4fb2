#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cantor {

/// Runs body(begin, end, chunk) over `workers` contiguous chunks of [0, count).
/// Chunk boundaries depend only on (count, workers); callers merge chunk
/// results in chunk order so the output is independent of scheduling.
template <class Body>
void parallel_chunks(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1U, workers);
  if (workers == 1 || count < 2) {
    body(std::size_t{0}, count, std::size_t{0});
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(workers, count);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(chunks);
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = count * c / chunks;
    const std::size_t end = count * (c + 1) / chunks;
    threads.emplace_back([&, begin, end, c] {
      try {
        body(begin, end, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t count, unsigned workers) {
  return std::max<std::size_t>(1, std::min<std::size_t>(std::max(1U, workers), count));
}

}  // namespace cantor

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kaplansky::detail {

inline std::size_t resolve_parallelism(std::size_t requested, std::size_t work) {
  std::size_t threads = requested == 0 ? std::thread::hardware_concurrency() : requested;
  return std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(work, 1));
}

// Runs fn(atom) for every atom. Each call must write only to its own slot;
// the first exception thrown by any worker is rethrown on the caller.
template <class Fn>
void for_each_atom(std::size_t atoms, std::size_t parallelism, Fn&& fn) {
  const std::size_t threads = resolve_parallelism(parallelism, atoms);
  if (threads <= 1 || atoms < 2) {
    for (std::size_t i = 0; i < atoms; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < atoms; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kaplansky::detail

// Copyright 2026 The volaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VOLAUG_PARALLEL_HPP
#define VOLAUG_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace volaug {

namespace detail {
inline std::atomic<unsigned>& thread_setting() {
  static std::atomic<unsigned> n{1};
  return n;
}
}  // namespace detail

/** Sets the worker count used by parallel_for. 0 selects the hardware concurrency. */
inline void set_thread_count(unsigned n) {
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  detail::thread_setting().store(n);
}

inline unsigned thread_count() { return detail::thread_setting().load(); }

/**
 * Calls body(i) for every i in [0, n), split into contiguous blocks over
 * thread_count() workers. Each body(i) must only write state owned by index i,
 * which makes results independent of the worker count. The first exception
 * (by block order) is rethrown on the calling thread.
 */
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  auto run_block = [&](std::size_t w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    try {
      for (std::size_t i = begin; i < end; ++i) body(i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run_block, w);
    run_block(0);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace volaug

#endif  // VOLAUG_PARALLEL_HPP

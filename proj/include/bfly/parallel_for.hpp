/*
 Copyright 2026 The bfly Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace bfly {

// Thread cap from BFLY_THREADS; 1 when unset or malformed.
inline int harness_threads() {
  const char* env = std::getenv("BFLY_THREADS");
  if (env == nullptr) return 1;
  try {
    return std::max(1, std::stoi(env));
  } catch (...) {
    return 1;
  }
}

// Calls fn(i, worker) for i in [0, count) on up to `threads` workers with a
// static contiguous partition, so each index runs on a fixed worker.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t, int)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  const std::size_t used = std::min(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (std::size_t w = 0; w < used; ++w) {
    const std::size_t begin = count * w / used;
    const std::size_t end = count * (w + 1) / used;
    pool.emplace_back([&fn, begin, end, w] {
      for (std::size_t i = begin; i < end; ++i) fn(i, static_cast<int>(w));
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace bfly

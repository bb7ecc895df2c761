/*
 * Copyright 2026 The SelfSHAP Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "selfshap/parallel.h"

#include <atomic>
#include <algorithm>
#include <thread>
#include <vector>

namespace selfshap {
namespace {
int g_threads = []() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}();
}  // namespace

void set_num_threads(int n) { g_threads = n < 1 ? 1 : n; }
int num_threads() { return g_threads; }

void parallel_chunks(std::size_t count, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  std::size_t n_chunks = (count + chunk_size - 1) / chunk_size;
  int workers = std::min<std::size_t>(static_cast<std::size_t>(g_threads), n_chunks);

  auto run_chunk = [&](std::size_t c) {
    std::size_t begin = c * chunk_size;
    std::size_t end = std::min(begin + chunk_size, count);
    fn(c, begin, end);
  };

  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t c = next.fetch_add(1);
        if (c >= n_chunks) break;
        run_chunk(c);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace selfshap

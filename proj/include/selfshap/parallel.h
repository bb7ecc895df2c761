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
#pragma once

#include <cstddef>
#include <functional>

namespace selfshap {

/// Global worker count for data-parallel loops (1 = fully serial).
void set_num_threads(int n);
int num_threads();

/// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, count).
/// Chunk boundaries depend only on `count` and `chunk_size`, never on the
/// worker count, so callers that reduce per-chunk results in chunk order get
/// bit-identical sums on any machine.
void parallel_chunks(std::size_t count, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace selfshap

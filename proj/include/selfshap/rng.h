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

#include <cstdint>
#include <cstddef>

namespace selfshap {

/// Counter-based generator: output = mix(key, counter). Streams derived with
/// split() are statistically independent and never share (key, counter) pairs,
/// so parallel consumers stay reproducible regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(scramble(seed)) {}

  /// Child stream; the parent is unaffected.
  Rng split(std::uint64_t stream) const { return Rng(key_, stream); }
  Rng split(std::uint64_t a, std::uint64_t b) const { return split(a).split(b); }

  std::uint64_t next_u64() { return mix(key_, counter_++); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via Box-Muller; consumes exactly two raw draws.
  double normal();

  std::uint64_t key() const { return key_; }

 private:
  Rng(std::uint64_t parent_key, std::uint64_t stream)
      : key_(mix(parent_key, stream ^ 0x9e3779b97f4a7c15ULL)) {}

  static std::uint64_t scramble(std::uint64_t x);
  static std::uint64_t mix(std::uint64_t key, std::uint64_t ctr);

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace selfshap

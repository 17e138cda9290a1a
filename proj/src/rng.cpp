// Copyright 2026 The causalkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "causalkit/rng.hpp"

#include <cmath>
#include <numbers>

namespace causalkit {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Stream Stream::derive(std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (std::uint64_t part : path) h = mix64(h ^ mix64(part + kGolden));
  return Stream(h);
}

Stream::result_type Stream::at(std::uint64_t k) const {
  return mix64(key_ + (k + 1) * kGolden);
}

double Stream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double Stream::normal() {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection of the biased tail.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const unsigned __int128 m =
        static_cast<unsigned __int128>((*this)()) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

}  // namespace causalkit

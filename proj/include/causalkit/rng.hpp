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

#ifndef CAUSALKIT_RNG_HPP_
#define CAUSALKIT_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace causalkit {

// Counter-based stream: the k-th draw is a pure function of (key, k), so a
// stream can be recreated anywhere from its key alone. Keys are derived by
// hashing a path of integers, e.g. (seed, case, run, variable), which keeps
// unrelated consumers on disjoint streams no matter the execution order.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key) : key_(key) {}

  static Stream derive(std::initializer_list<std::uint64_t> path);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return at(counter_++); }

  // Draw number `k` without advancing.
  result_type at(std::uint64_t k) const;

  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal, Box-Muller
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace causalkit

#endif  // CAUSALKIT_RNG_HPP_

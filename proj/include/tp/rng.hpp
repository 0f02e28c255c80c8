// Copyright 2026 The threepillars Authors.
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

#ifndef TP_RNG_HPP_
#define TP_RNG_HPP_

#include <cstdint>
#include <random>

namespace tp {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class StreamTag : std::uint64_t {
  kSketch = 1,
  kSyncCoin = 2,
  kNodeSampling = 3,
  kData = 4,
  kConstants = 5,
  kInit = 6,
};

// One engine per consumer, all derived from a single run seed, so adding
// draws to one stream never shifts another.
inline Rng make_stream(std::uint64_t seed, StreamTag tag) {
  return Rng(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(tag)));
}

inline bool bernoulli(Rng& rng, double p) {
  if (p >= 1.0) return true;
  if (p <= 0.0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

}  // namespace tp

#endif  // TP_RNG_HPP_

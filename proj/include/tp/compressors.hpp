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

#ifndef TP_COMPRESSORS_HPP_
#define TP_COMPRESSORS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "tp/linalg.hpp"
#include "tp/rng.hpp"

namespace tp {

// Coordinated permutation sketches. One sketch is shared by all n devices
// in a communication round; device i transmits only the coordinates the
// sketch assigns to it, scaled so that every Q_i is unbiased.
//
// Two regimes:
//   d >= n: d = q*n, pi is a permutation of {0..d-1}; device i owns
//           pi[q*i .. q*i+q) and scales by n.
//   d <  n: n = q*d, pi is a permutation of the multiset where each of
//           {0..d-1} occurs q times; device i owns pi[i] and scales by d.
// Dimensions that do not fit are zero-padded. Padded (phantom) coordinates
// take permutation slots but are never transmitted.
enum class SketchRegime { kDimAtLeastDevices, kDevicesAtLeastDim };

struct PermutationSketch {
  int n = 0;
  int original_dim = 0;
  int padded_dim = 0;
  int q = 0;
  SketchRegime regime = SketchRegime::kDimAtLeastDevices;
  std::vector<int> pi;  // 0-based coordinate ids
};

struct Coord {
  int index = 0;
  double value = 0.0;
};

struct CompressedMsg {
  int origin_device = 0;
  std::vector<Coord> coords;  // strictly increasing indices, scale applied

  // Transmitted coordinates. Indices of permutation sketches are implied by
  // the shared seed and cost nothing.
  std::int64_t float_count() const {
    return static_cast<std::int64_t>(coords.size());
  }
};

// Padded dimension and regime for (n, original_dim).
struct SketchShape {
  int padded_dim;
  int q;
  SketchRegime regime;
};
SketchShape sketch_shape(int n, int original_dim);

PermutationSketch sample_sketch(int n, int original_dim, Rng& rng);

// Builds a sketch from an explicit arrangement; validates its structure.
PermutationSketch make_sketch(int n, int original_dim, std::vector<int> pi);

// Every equally likely sketch for (n, original_dim). Throws ValidationError
// once more than max_count sketches would be produced.
std::vector<PermutationSketch> enumerate_sketches(int n, int original_dim,
                                                  std::int64_t max_count);

// Q_i(u) for device in [0, n).
CompressedMsg compress(const PermutationSketch& sketch, int device,
                       const Vec& u);

enum class ClaimPolicy {
  kExclusive,  // permutation sketches with d >= n: one owner per coordinate
  kShared,     // multiplicity allowed (d < n regime, rand-K, identity)
};

// (1/n) * sum of the scattered messages.
Vec aggregate(std::span<const CompressedMsg> msgs, int n, int dim,
              ClaimPolicy policy);

ClaimPolicy claim_policy(const PermutationSketch& sketch);

struct VarianceCheck {
  double lhs = 0.0;  // E || mean_i Q_i(a_i) - mean_i a_i ||^2, exact
  double rhs = 0.0;  // mean_i || a_i - mean_j a_j ||^2
};

// Exact by enumeration over all sketches for n = a.size().
VarianceCheck variance_check(std::span<const Vec> a,
                             std::int64_t max_sketches = 100000);

CompressedMsg identity_compress(int device, const Vec& u);

// K coordinates drawn uniformly without replacement, scaled by d/K,
// independently per device.
CompressedMsg randk_compress(int device, const Vec& u, int k, Rng& rng);

enum class CompressorKind { kPermutation, kIdentity, kRandK };

struct CompressorSpec {
  CompressorKind kind = CompressorKind::kPermutation;
  int k = 1;  // rand-K only
};

// Per-round compression state used by the solvers: begin_round() draws the
// shared randomness, then every device compresses against it.
class RoundCompressor {
 public:
  RoundCompressor(CompressorSpec spec, int n, int dim);

  void begin_round(Rng& rng);
  CompressedMsg compress(int device, const Vec& u, Rng& rng) const;
  Vec aggregate(std::span<const CompressedMsg> msgs) const;

  const CompressorSpec& spec() const { return spec_; }
  const PermutationSketch& sketch() const { return sketch_; }

 private:
  CompressorSpec spec_;
  int n_;
  int dim_;
  PermutationSketch sketch_;
};

}  // namespace tp

#endif  // TP_COMPRESSORS_HPP_

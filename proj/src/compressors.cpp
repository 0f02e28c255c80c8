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

#include "tp/compressors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tp/errors.hpp"

namespace tp {
namespace {

void check_device(int device, int n) {
  if (device < 0 || device >= n) {
    throw ValidationError("device index " + std::to_string(device) +
                          " out of range [0, " + std::to_string(n) + ")");
  }
}

std::vector<int> base_arrangement(const SketchShape& shape, int n) {
  std::vector<int> pi;
  if (shape.regime == SketchRegime::kDimAtLeastDevices) {
    pi.resize(shape.padded_dim);
    std::iota(pi.begin(), pi.end(), 0);
  } else {
    pi.reserve(n);
    for (int c = 0; c < shape.padded_dim; ++c) {
      for (int r = 0; r < shape.q; ++r) pi.push_back(c);
    }
  }
  return pi;
}

PermutationSketch sketch_from(int n, int original_dim, const SketchShape& s,
                              std::vector<int> pi) {
  PermutationSketch sketch;
  sketch.n = n;
  sketch.original_dim = original_dim;
  sketch.padded_dim = s.padded_dim;
  sketch.q = s.q;
  sketch.regime = s.regime;
  sketch.pi = std::move(pi);
  return sketch;
}

}  // namespace

SketchShape sketch_shape(int n, int original_dim) {
  if (n < 1) throw ValidationError("sketch needs at least one device");
  if (original_dim < 1) throw ValidationError("sketch needs dim >= 1");
  if (original_dim >= n) {
    const int d = (original_dim + n - 1) / n * n;
    return SketchShape{d, d / n, SketchRegime::kDimAtLeastDevices};
  }
  // Smallest divisor of n that is >= original_dim. n itself always works.
  int d = original_dim;
  while (n % d != 0) ++d;
  if (d == n) return SketchShape{d, 1, SketchRegime::kDimAtLeastDevices};
  return SketchShape{d, n / d, SketchRegime::kDevicesAtLeastDim};
}

PermutationSketch sample_sketch(int n, int original_dim, Rng& rng) {
  const SketchShape shape = sketch_shape(n, original_dim);
  std::vector<int> pi = base_arrangement(shape, n);
  for (std::size_t i = pi.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(pi[i - 1], pi[pick(rng)]);
  }
  return sketch_from(n, original_dim, shape, std::move(pi));
}

PermutationSketch make_sketch(int n, int original_dim, std::vector<int> pi) {
  const SketchShape shape = sketch_shape(n, original_dim);
  std::vector<int> expected = base_arrangement(shape, n);
  std::vector<int> sorted = pi;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != expected) {
    throw ValidationError(
        "arrangement is not a permutation of the sketch's index multiset");
  }
  return sketch_from(n, original_dim, shape, std::move(pi));
}

std::vector<PermutationSketch> enumerate_sketches(int n, int original_dim,
                                                  std::int64_t max_count) {
  const SketchShape shape = sketch_shape(n, original_dim);
  std::vector<int> pi = base_arrangement(shape, n);
  std::vector<PermutationSketch> out;
  do {
    if (static_cast<std::int64_t>(out.size()) >= max_count) {
      throw ValidationError(
          "sketch enumeration exceeds budget of " + std::to_string(max_count) +
          " arrangements; use smaller n and dim (e.g. n*dim <= 10)");
    }
    out.push_back(sketch_from(n, original_dim, shape, pi));
  } while (std::next_permutation(pi.begin(), pi.end()));
  return out;
}

CompressedMsg compress(const PermutationSketch& sketch, int device,
                       const Vec& u) {
  check_device(device, sketch.n);
  if (u.size() != sketch.original_dim) {
    throw ValidationError("compress: vector dim " + std::to_string(u.size()) +
                          " does not match sketch dim " +
                          std::to_string(sketch.original_dim));
  }
  CompressedMsg msg;
  msg.origin_device = device;
  if (sketch.regime == SketchRegime::kDimAtLeastDevices) {
    const double scale = sketch.n;
    msg.coords.reserve(sketch.q);
    for (int j = sketch.q * device; j < sketch.q * (device + 1); ++j) {
      const int c = sketch.pi[j];
      if (c < sketch.original_dim) msg.coords.push_back({c, scale * u[c]});
    }
    std::sort(msg.coords.begin(), msg.coords.end(),
              [](const Coord& a, const Coord& b) { return a.index < b.index; });
  } else {
    const int c = sketch.pi[device];
    if (c < sketch.original_dim) {
      msg.coords.push_back({c, static_cast<double>(sketch.padded_dim) * u[c]});
    }
  }
  return msg;
}

ClaimPolicy claim_policy(const PermutationSketch& sketch) {
  return sketch.regime == SketchRegime::kDimAtLeastDevices
             ? ClaimPolicy::kExclusive
             : ClaimPolicy::kShared;
}

Vec aggregate(std::span<const CompressedMsg> msgs, int n, int dim,
              ClaimPolicy policy) {
  if (static_cast<int>(msgs.size()) != n) {
    throw ValidationError("aggregate expects one message per device (" +
                          std::to_string(n) + "), got " +
                          std::to_string(msgs.size()));
  }
  Vec sum = Vec::Zero(dim);
  std::vector<char> claimed;
  if (policy == ClaimPolicy::kExclusive) claimed.assign(dim, 0);
  for (const auto& msg : msgs) {
    for (const auto& c : msg.coords) {
      if (c.index < 0 || c.index >= dim) {
        throw ValidationError("aggregate: coordinate " +
                              std::to_string(c.index) + " out of range");
      }
      if (policy == ClaimPolicy::kExclusive) {
        if (claimed[c.index]) {
          throw ValidationError("aggregate: coordinate " +
                                std::to_string(c.index) +
                                " claimed by more than one device");
        }
        claimed[c.index] = 1;
      }
      sum[c.index] += c.value;
    }
  }
  return sum / static_cast<double>(n);
}

VarianceCheck variance_check(std::span<const Vec> a,
                             std::int64_t max_sketches) {
  const int n = static_cast<int>(a.size());
  if (n < 1) throw ValidationError("variance_check needs at least one vector");
  const int dim = static_cast<int>(a[0].size());
  Vec mean = Vec::Zero(dim);
  for (const auto& ai : a) {
    require_same_dim(ai, a[0], "variance_check");
    mean += ai;
  }
  mean /= n;

  VarianceCheck out;
  for (const auto& ai : a) out.rhs += (ai - mean).squaredNorm();
  out.rhs /= n;

  const auto sketches = enumerate_sketches(n, dim, max_sketches);
  std::vector<CompressedMsg> msgs(n);
  for (const auto& s : sketches) {
    for (int i = 0; i < n; ++i) msgs[i] = compress(s, i, a[i]);
    out.lhs += (aggregate(msgs, n, dim, claim_policy(s)) - mean).squaredNorm();
  }
  out.lhs /= static_cast<double>(sketches.size());
  return out;
}

CompressedMsg identity_compress(int device, const Vec& u) {
  CompressedMsg msg;
  msg.origin_device = device;
  msg.coords.reserve(u.size());
  for (int c = 0; c < u.size(); ++c) msg.coords.push_back({c, u[c]});
  return msg;
}

CompressedMsg randk_compress(int device, const Vec& u, int k, Rng& rng) {
  const int d = static_cast<int>(u.size());
  if (k < 1 || k > d) {
    throw ValidationError("rand-K needs 1 <= K <= d (K=" + std::to_string(k) +
                          ", d=" + std::to_string(d) + ")");
  }
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, d - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  const double scale = static_cast<double>(d) / k;
  CompressedMsg msg;
  msg.origin_device = device;
  msg.coords.reserve(k);
  for (int c : idx) msg.coords.push_back({c, scale * u[c]});
  return msg;
}

RoundCompressor::RoundCompressor(CompressorSpec spec, int n, int dim)
    : spec_(spec), n_(n), dim_(dim) {
  if (n < 1 || dim < 1) {
    throw ValidationError("compressor needs n >= 1 and dim >= 1");
  }
  if (spec.kind == CompressorKind::kRandK && (spec.k < 1 || spec.k > dim)) {
    throw ValidationError("rand-K needs 1 <= K <= d");
  }
}

void RoundCompressor::begin_round(Rng& rng) {
  if (spec_.kind == CompressorKind::kPermutation) {
    sketch_ = sample_sketch(n_, dim_, rng);
  }
}

CompressedMsg RoundCompressor::compress(int device, const Vec& u,
                                        Rng& rng) const {
  check_device(device, n_);
  switch (spec_.kind) {
    case CompressorKind::kPermutation:
      return tp::compress(sketch_, device, u);
    case CompressorKind::kIdentity:
      return identity_compress(device, u);
    case CompressorKind::kRandK:
      return randk_compress(device, u, spec_.k, rng);
  }
  throw ValidationError("unknown compressor kind");
}

Vec RoundCompressor::aggregate(std::span<const CompressedMsg> msgs) const {
  const ClaimPolicy policy = spec_.kind == CompressorKind::kPermutation
                                 ? claim_policy(sketch_)
                                 : ClaimPolicy::kShared;
  return tp::aggregate(msgs, n_, dim_, policy);
}

}  // namespace tp

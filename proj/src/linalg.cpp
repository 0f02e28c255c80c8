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

#include "tp/linalg.hpp"

#include <cmath>
#include <string>

#include "tp/errors.hpp"

namespace tp {

BlockLayout::BlockLayout(
    const std::vector<std::pair<std::string, int>>& blocks) {
  blocks_.reserve(blocks.size());
  for (const auto& [name, len] : blocks) {
    if (len <= 0) {
      throw ValidationError("block '" + name + "' must have positive length");
    }
    if (!index_.emplace(name, blocks_.size()).second) {
      throw ValidationError("duplicate block name '" + name + "'");
    }
    blocks_.push_back(Block{name, dim_, len});
    dim_ += len;
  }
}

bool BlockLayout::contains(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

const Block& BlockLayout::block(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw ValidationError("unknown block '" + std::string(name) + "'");
  }
  return blocks_[it->second];
}

Eigen::VectorBlock<const Vec> BlockLayout::view(const Vec& z,
                                                std::string_view name) const {
  const Block& b = block(name);
  return z.segment(b.offset, b.len);
}

Eigen::VectorBlock<Vec> BlockLayout::view(Vec& z, std::string_view name) const {
  const Block& b = block(name);
  return z.segment(b.offset, b.len);
}

FeasibleSet FeasibleSet::per_block_balls(const BlockLayout& layout,
                                         std::vector<BallConstraint> balls) {
  FeasibleSet set;
  for (const auto& ball : balls) {
    if (!(ball.radius >= 0.0) || !std::isfinite(ball.radius)) {
      throw ValidationError("ball radius for block '" + ball.block +
                            "' must be finite and >= 0");
    }
    const Block& b = layout.block(ball.block);
    set.resolved_.push_back(Resolved{b.offset, b.len, ball.radius});
  }
  set.balls_ = std::move(balls);
  return set;
}

void require_same_dim(const Vec& a, const Vec& b, std::string_view where) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(where) + ": dimension mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
}

void require_finite(const Vec& z, std::string_view where) {
  if (!z.allFinite()) {
    throw NumericalError(std::string(where) + ": non-finite value");
  }
}

double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  return a.dot(b);
}

double norm(const Vec& a) { return a.norm(); }

double squared_distance(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "squared_distance");
  return (a - b).squaredNorm();
}

void project_in_place(const FeasibleSet& set, Vec& z) {
  for (const auto& ball : set.resolved()) {
    auto v = z.segment(ball.offset, ball.len);
    const double nv = v.norm();
    if (nv > ball.radius) {
      v *= ball.radius / nv;
    }
  }
}

Vec project(const FeasibleSet& set, const BlockLayout& layout, const Vec& z) {
  if (z.size() != layout.dim()) {
    throw ValidationError("project: vector has dim " +
                          std::to_string(z.size()) + ", layout has " +
                          std::to_string(layout.dim()));
  }
  require_finite(z, "project");
  Vec out = z;
  project_in_place(set, out);
  return out;
}

double feasibility_violation(const FeasibleSet& set, const Vec& z) {
  double worst = 0.0;
  for (const auto& ball : set.resolved()) {
    worst = std::max(worst, z.segment(ball.offset, ball.len).norm() -
                                ball.radius);
  }
  return worst;
}

}  // namespace tp

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

#ifndef TP_LINALG_HPP_
#define TP_LINALG_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tp {

// Dense iterate. Saddle problems concatenate the primal and dual blocks.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Block {
  std::string name;
  int offset = 0;
  int len = 0;
};

// Named contiguous partition of [0, dim).
class BlockLayout {
 public:
  BlockLayout() = default;
  // Blocks are laid out in the given order. Names must be unique and
  // lengths positive.
  explicit BlockLayout(const std::vector<std::pair<std::string, int>>& blocks);

  int dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  bool contains(std::string_view name) const;
  const Block& block(std::string_view name) const;

  // Convenience views into a vector laid out by this layout.
  Eigen::VectorBlock<const Vec> view(const Vec& z, std::string_view name) const;
  Eigen::VectorBlock<Vec> view(Vec& z, std::string_view name) const;

 private:
  std::vector<Block> blocks_;
  std::unordered_map<std::string, std::size_t> index_;
  int dim_ = 0;
};

struct BallConstraint {
  std::string block;
  double radius = 0.0;
};

// Either the whole space or a product of Euclidean balls on some blocks;
// blocks without a ball are unconstrained.
class FeasibleSet {
 public:
  static FeasibleSet whole_space() { return FeasibleSet{}; }
  static FeasibleSet per_block_balls(const BlockLayout& layout,
                                     std::vector<BallConstraint> balls);

  bool is_whole_space() const { return balls_.empty(); }
  const std::vector<BallConstraint>& balls() const { return balls_; }

  // Resolved (offset, len, radius) of every ball, in layout order.
  struct Resolved {
    int offset;
    int len;
    double radius;
  };
  const std::vector<Resolved>& resolved() const { return resolved_; }

 private:
  std::vector<BallConstraint> balls_;
  std::vector<Resolved> resolved_;
};

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double squared_distance(const Vec& a, const Vec& b);

// Euclidean projection. Points on the sphere ||v|| == D are left as is.
Vec project(const FeasibleSet& set, const BlockLayout& layout, const Vec& z);
void project_in_place(const FeasibleSet& set, Vec& z);

// Largest violation max(0, ||v|| - D) over the constrained blocks.
double feasibility_violation(const FeasibleSet& set, const Vec& z);

// Throws NumericalError naming `where` when z carries NaN or Inf.
void require_finite(const Vec& z, std::string_view where);
void require_same_dim(const Vec& a, const Vec& b, std::string_view where);

}  // namespace tp

#endif  // TP_LINALG_HPP_

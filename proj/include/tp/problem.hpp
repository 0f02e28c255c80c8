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

#ifndef TP_PROBLEM_HPP_
#define TP_PROBLEM_HPP_

#include <optional>
#include <string>

#include "tp/linalg.hpp"

namespace tp {

// Constants of Lipschitzness (L, per device), strong monotonicity of the
// mean operator (mu), and relatedness (delta: F_i - F is delta-Lipschitz).
struct ProblemConstants {
  double mu = 0.0;
  double L = 0.0;
  double delta = 0.0;
};

// A distributed variational inequality: find z* in Z with
// <F(z*), z - z*> >= 0 for all z in Z, F = (1/n) sum_i F_i.
// Device 0 is the server and also holds data.
class VIProblem {
 public:
  virtual ~VIProblem() = default;

  virtual int num_devices() const = 0;
  virtual const BlockLayout& layout() const = 0;
  virtual const FeasibleSet& feasible_set() const = 0;
  virtual Vec device_operator(int device, const Vec& z) const = 0;

  // Saddle potential g_i with F_i = [grad_x g_i, -grad_y g_i], if any.
  virtual std::optional<double> potential(int /*device*/,
                                          const Vec& /*z*/) const {
    return std::nullopt;
  }
  // Constants known in closed form.
  virtual std::optional<ProblemConstants> analytic_constants() const {
    return std::nullopt;
  }
  virtual std::string kind() const = 0;

  int dim() const { return layout().dim(); }
  Vec mean_operator(const Vec& z) const;
  Vec project(const Vec& z) const;
};

// Checked F_i evaluation: dimension and finiteness.
Vec evaluate_device(const VIProblem& problem, int device, const Vec& z);

}  // namespace tp

#endif  // TP_PROBLEM_HPP_

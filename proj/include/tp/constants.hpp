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

#ifndef TP_CONSTANTS_HPP_
#define TP_CONSTANTS_HPP_

#include <cstdint>
#include <optional>

#include "tp/linalg.hpp"
#include "tp/problem.hpp"
#include "tp/rng.hpp"

namespace tp {

struct ConstantsEstimate {
  ProblemConstants estimated;
  std::optional<ProblemConstants> analytic;
  bool mu_nonpositive = false;
  std::int64_t pairs = 0;

  // Analytic values when known.
  const ProblemConstants& effective() const {
    return analytic ? *analytic : estimated;
  }
};

struct EstimateOptions {
  double radius = 5.0;
  int samples = 1000;  // random pairs, >= 100
  // Points around which directions from finite-difference Jacobians are
  // probed (top singular vectors, least monotone direction).
  int anchors = 4;
  int max_jacobian_dim = 512;
};

// max(5, 2 ||z0||).
double default_region_radius(const Vec& z0);

// Empirical bounds over pairs in the ball of opts.radius around center
// (projected onto the feasible set):
//   L = max_i ||F_i(u) - F_i(v)|| / ||u - v||
//   delta = max_i ||(F_i - F)(u) - (F_i - F)(v)|| / ||u - v||
//   mu = min <F(u) - F(v), u - v> / ||u - v||^2
ConstantsEstimate estimate_constants(const VIProblem& problem,
                                     const Vec& center,
                                     const EstimateOptions& opts, Rng& rng);

struct ReferenceSolution {
  Vec z;
  double residual = 0.0;  // ||z_{k+1} - z_k|| / (1 + ||z_k||)
  std::int64_t iterations = 0;
};

// Full-information extragradient with eta = 1/(4L) until the residual drops
// to tol. Throws NotConvergedError after max_iters.
ReferenceSolution reference_solution(const VIProblem& problem, double L,
                                     const Vec& z0, double tol = 1e-12,
                                     std::int64_t max_iters = 1000000);

}  // namespace tp

#endif  // TP_CONSTANTS_HPP_

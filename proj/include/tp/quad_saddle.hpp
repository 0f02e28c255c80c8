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

#ifndef TP_QUAD_SADDLE_HPP_
#define TP_QUAD_SADDLE_HPP_

#include <memory>
#include <vector>

#include "tp/problem.hpp"
#include "tp/rng.hpp"

namespace tp {

// Per-device data of the quadratic saddle
//   g_i(x, y) = 1/2 x'(A + mu0 I)x + x'B y - 1/2 y'(C + mu0 I)y - cx'x + cy'y
// so that F_i(x, y) = ((A + mu0)x + By - cx, (C + mu0)y - B'x - cy).
struct QuadSaddleDevice {
  Mat A;   // dx x dx, symmetric PSD
  Mat B;   // dx x dy coupling
  Mat C;   // dy x dy, symmetric PSD
  Vec cx;  // dx
  Vec cy;  // dy
};

class QuadSaddle final : public VIProblem {
 public:
  QuadSaddle(std::vector<QuadSaddleDevice> devices, double mu0);

  int num_devices() const override { return static_cast<int>(jac_.size()); }
  const BlockLayout& layout() const override { return layout_; }
  const FeasibleSet& feasible_set() const override { return set_; }
  Vec device_operator(int device, const Vec& z) const override;
  std::optional<double> potential(int device, const Vec& z) const override;
  std::optional<ProblemConstants> analytic_constants() const override {
    return constants_;
  }
  std::string kind() const override { return "quad_saddle"; }

  const Mat& jacobian(int device) const { return jac_[device]; }
  const Vec& offset(int device) const { return offset_[device]; }
  double mu0() const { return mu0_; }

  // Unique zero of the mean operator by a dense linear solve.
  Vec exact_solution() const;

 private:
  std::vector<QuadSaddleDevice> devices_;
  std::vector<Mat> jac_;
  std::vector<Vec> offset_;
  double mu0_;
  BlockLayout layout_;
  FeasibleSet set_;
  ProblemConstants constants_;
};

struct QuadSaddleOptions {
  int n = 8;
  int dx = 20;
  int dy = 20;
  double mu0 = 1.0;
  // Scale of the per-device perturbation of the shared matrices and
  // offsets; 0 gives identical devices (delta = 0).
  double spread = 0.1;
  double coupling = 1.0;      // entry scale of B
  double offset_scale = 1.0;  // 0 makes z* = 0
};

std::unique_ptr<QuadSaddle> make_quad_saddle(const QuadSaddleOptions& opts,
                                             Rng& rng);

// Closed-form constants for a set of device Jacobians:
// mu = lambda_min(sym(mean J)), L = max ||J_i||, delta = max ||J_i - mean J||.
ProblemConstants jacobian_constants(const std::vector<Mat>& jacobians);

double spectral_norm(const Mat& m);

}  // namespace tp

#endif  // TP_QUAD_SADDLE_HPP_

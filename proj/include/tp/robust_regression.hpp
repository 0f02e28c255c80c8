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

#ifndef TP_ROBUST_REGRESSION_HPP_
#define TP_ROBUST_REGRESSION_HPP_

#include <string>
#include <vector>

#include "tp/dataset.hpp"
#include "tp/problem.hpp"

namespace tp {

enum class NoiseMode {
  // One perturbation r in R^d added to every sample: z = (w, r).
  kShared,
  // One r_j per sample: z = (w, r_0, ..., r_{N-1}). Each r_j is local to the
  // device holding sample j, so F_i is zero on other devices' slices and
  // device i weights its own slices by n*beta. The mean operator then matches
  // the pooled objective, but delta grows with n.
  kPerSample,
};

NoiseMode parse_noise_mode(const std::string& s);
std::string to_string(NoiseMode mode);

struct RobustRegSpec {
  double lambda = 0.1;  // ridge weight on w
  double beta = 1.0;    // ridge weight on r
  double radius = 1.0;  // noise ball ||r|| <= D
  NoiseMode noise_mode = NoiseMode::kShared;
};

// Adversarially robust least squares,
//   min_w max_{||r|| <= D} 1/(2N) sum_j (w'(x_j + r) - y_j)^2
//                          + lambda/2 ||w||^2 - beta/2 ||r||^2,
// distributed over the dataset's partition. F_i = [grad_w g_i, -grad_r g_i].
// w is unconstrained.
class RobustRegression final : public VIProblem {
 public:
  RobustRegression(const RegressionDataset& data, RobustRegSpec spec);

  int num_devices() const override {
    return static_cast<int>(devices_.size());
  }
  const BlockLayout& layout() const override { return layout_; }
  const FeasibleSet& feasible_set() const override { return set_; }
  Vec device_operator(int device, const Vec& z) const override;
  std::optional<double> potential(int device, const Vec& z) const override;
  std::string kind() const override { return "robust_regression"; }

  const RobustRegSpec& spec() const { return spec_; }
  int num_features() const { return features_; }

 private:
  struct DeviceData {
    Mat x;
    Vec y;
    std::vector<int> samples;  // global sample ids (per-sample mode)
  };

  RobustRegSpec spec_;
  int features_;
  std::vector<DeviceData> devices_;
  BlockLayout layout_;
  FeasibleSet set_;
};

}  // namespace tp

#endif  // TP_ROBUST_REGRESSION_HPP_

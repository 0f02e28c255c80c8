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

#include "tp/robust_regression.hpp"

#include <string>

#include "tp/errors.hpp"

namespace tp {

NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "shared") return NoiseMode::kShared;
  if (s == "per_sample" || s == "per-sample") return NoiseMode::kPerSample;
  throw ValidationError("unknown noise_mode '" + s +
                        "' (expected shared or per_sample)");
}

std::string to_string(NoiseMode mode) {
  return mode == NoiseMode::kShared ? "shared" : "per_sample";
}

RobustRegression::RobustRegression(const RegressionDataset& data,
                                   RobustRegSpec spec)
    : spec_(spec), features_(data.num_features()) {
  if (!(spec.lambda >= 0.0) || !(spec.beta >= 0.0) || !(spec.radius >= 0.0)) {
    throw ValidationError("robust regression needs lambda, beta, D >= 0");
  }
  validate_partition(data);
  if (data.partition.empty()) throw ValidationError("no devices");

  for (const auto& part : data.partition) {
    DeviceData dev;
    dev.x.resize(static_cast<Eigen::Index>(part.size()), features_);
    dev.y.resize(static_cast<Eigen::Index>(part.size()));
    for (std::size_t k = 0; k < part.size(); ++k) {
      dev.x.row(k) = data.features.row(part[k]);
      dev.y[k] = data.labels[part[k]];
    }
    dev.samples = part;
    devices_.push_back(std::move(dev));
  }

  if (spec.noise_mode == NoiseMode::kShared) {
    layout_ = BlockLayout({{"w", features_}, {"r", features_}});
    set_ = FeasibleSet::per_block_balls(layout_, {{"r", spec.radius}});
  } else {
    std::vector<std::pair<std::string, int>> blocks{{"w", features_}};
    std::vector<BallConstraint> balls;
    for (int j = 0; j < data.num_samples(); ++j) {
      blocks.emplace_back("r" + std::to_string(j), features_);
      balls.push_back({"r" + std::to_string(j), spec.radius});
    }
    layout_ = BlockLayout(blocks);
    set_ = FeasibleSet::per_block_balls(layout_, std::move(balls));
  }
}

Vec RobustRegression::device_operator(int device, const Vec& z) const {
  const DeviceData& dev = devices_[device];
  const int d = features_;
  const double b = static_cast<double>(dev.y.size());
  const auto w = z.head(d);
  Vec out = Vec::Zero(z.size());

  if (spec_.noise_mode == NoiseMode::kShared) {
    const auto r = z.segment(d, d);
    // residuals e_j = w'(x_j + r) - y_j
    const Vec e = (dev.x * w).array() + (r.dot(w)) - dev.y.array();
    const double e_sum = e.sum();
    out.head(d) = (dev.x.transpose() * e + e_sum * r) / b + spec_.lambda * w;
    out.segment(d, d) = spec_.beta * r - (e_sum / b) * w;
    return out;
  }

  const double nbeta = spec_.beta * static_cast<double>(devices_.size());
  Vec grad_w = spec_.lambda * w;
  for (int k = 0; k < dev.x.rows(); ++k) {
    const int off = d + dev.samples[k] * d;
    const auto rj = z.segment(off, d);
    const double e = dev.x.row(k).dot(w) + rj.dot(w) - dev.y[k];
    grad_w += (e / b) * (dev.x.row(k).transpose() + rj);
    out.segment(off, d) = nbeta * rj - (e / b) * w;
  }
  out.head(d) = grad_w;
  return out;
}

std::optional<double> RobustRegression::potential(int device,
                                                  const Vec& z) const {
  const DeviceData& dev = devices_[device];
  const int d = features_;
  const double b = static_cast<double>(dev.y.size());
  const auto w = z.head(d);
  double loss = 0.0;
  double noise = 0.0;
  if (spec_.noise_mode == NoiseMode::kShared) {
    const auto r = z.segment(d, d);
    const Vec e = (dev.x * w).array() + (r.dot(w)) - dev.y.array();
    loss = 0.5 * e.squaredNorm() / b;
    noise = 0.5 * spec_.beta * r.squaredNorm();
  } else {
    const double nbeta = spec_.beta * static_cast<double>(devices_.size());
    for (int k = 0; k < dev.x.rows(); ++k) {
      const auto rj = z.segment(d + dev.samples[k] * d, d);
      const double e = dev.x.row(k).dot(w) + rj.dot(w) - dev.y[k];
      loss += 0.5 * e * e / b;
      noise += 0.5 * nbeta * rj.squaredNorm();
    }
  }
  return loss + 0.5 * spec_.lambda * w.squaredNorm() - noise;
}

}  // namespace tp

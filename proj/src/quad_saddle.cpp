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

#include "tp/quad_saddle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tp/errors.hpp"

namespace tp {
namespace {

constexpr double kPsdTolerance = 1e-10;

void require_psd(const Mat& m, const char* name, int device) {
  if (m.rows() != m.cols()) {
    throw ValidationError(std::string(name) + " must be square");
  }
  if (!m.isApprox(m.transpose(), 1e-12) && m.norm() > 0) {
    throw ValidationError(std::string(name) + " of device " +
                          std::to_string(device) + " is not symmetric");
  }
  if (m.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTolerance * std::max(1.0, m.norm())) {
    throw ValidationError(std::string(name) + " of device " +
                          std::to_string(device) + " is not PSD");
  }
}

Mat gaussian(int rows, int cols, double scale, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = scale * nd(rng);
  return m;
}

Vec gaussian(int n, double scale, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * nd(rng);
  return v;
}

}  // namespace

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(m.transpose() * m,
                                        Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

ProblemConstants jacobian_constants(const std::vector<Mat>& jacobians) {
  if (jacobians.empty()) throw ValidationError("no Jacobians");
  Mat mean = Mat::Zero(jacobians[0].rows(), jacobians[0].cols());
  for (const auto& j : jacobians) mean += j;
  mean /= static_cast<double>(jacobians.size());

  ProblemConstants c;
  Mat sym = 0.5 * (mean + mean.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  c.mu = es.eigenvalues().minCoeff();
  for (const auto& j : jacobians) {
    c.L = std::max(c.L, spectral_norm(j));
    c.delta = std::max(c.delta, spectral_norm(j - mean));
  }
  return c;
}

QuadSaddle::QuadSaddle(std::vector<QuadSaddleDevice> devices, double mu0)
    : devices_(std::move(devices)), mu0_(mu0) {
  if (devices_.empty()) throw ValidationError("quad saddle needs n >= 1");
  if (!(mu0 >= 0.0)) throw ValidationError("mu0 must be >= 0");
  const int dx = static_cast<int>(devices_[0].A.rows());
  const int dy = static_cast<int>(devices_[0].C.rows());
  if (dx < 1 || dy < 1) throw ValidationError("quad saddle needs dx, dy >= 1");
  layout_ = BlockLayout({{"x", dx}, {"y", dy}});
  set_ = FeasibleSet::whole_space();

  for (std::size_t i = 0; i < devices_.size(); ++i) {
    const auto& dv = devices_[i];
    const int dev = static_cast<int>(i);
    if (dv.A.rows() != dx || dv.C.rows() != dy || dv.B.rows() != dx ||
        dv.B.cols() != dy || dv.cx.size() != dx || dv.cy.size() != dy) {
      throw ValidationError("quad saddle device " + std::to_string(i) +
                            " has inconsistent block shapes");
    }
    require_psd(dv.A, "A", dev);
    require_psd(dv.C, "C", dev);
    Mat j(dx + dy, dx + dy);
    j.topLeftCorner(dx, dx) = dv.A + mu0 * Mat::Identity(dx, dx);
    j.topRightCorner(dx, dy) = dv.B;
    j.bottomLeftCorner(dy, dx) = -dv.B.transpose();
    j.bottomRightCorner(dy, dy) = dv.C + mu0 * Mat::Identity(dy, dy);
    jac_.push_back(std::move(j));
    Vec c(dx + dy);
    c << dv.cx, dv.cy;
    offset_.push_back(std::move(c));
  }
  constants_ = jacobian_constants(jac_);
}

Vec QuadSaddle::device_operator(int device, const Vec& z) const {
  return jac_[device] * z - offset_[device];
}

std::optional<double> QuadSaddle::potential(int device, const Vec& z) const {
  const auto& dv = devices_[device];
  const auto x = layout_.view(z, "x");
  const auto y = layout_.view(z, "y");
  return 0.5 * x.dot(dv.A * x) + 0.5 * mu0_ * x.squaredNorm() +
         x.dot(dv.B * y) - 0.5 * y.dot(dv.C * y) -
         0.5 * mu0_ * y.squaredNorm() - dv.cx.dot(x) + dv.cy.dot(y);
}

Vec QuadSaddle::exact_solution() const {
  Mat mean = Mat::Zero(dim(), dim());
  Vec c = Vec::Zero(dim());
  for (int i = 0; i < num_devices(); ++i) {
    mean += jac_[i];
    c += offset_[i];
  }
  return mean.partialPivLu().solve(c);
}

std::unique_ptr<QuadSaddle> make_quad_saddle(const QuadSaddleOptions& o,
                                             Rng& rng) {
  if (o.n < 1 || o.dx < 1 || o.dy < 1) {
    throw ValidationError("quad saddle needs n, dx, dy >= 1");
  }
  if (!(o.mu0 > 0.0)) throw ValidationError("mu0 must be > 0");
  if (!(o.spread >= 0.0)) throw ValidationError("spread must be >= 0");

  const double sx = 1.0 / std::sqrt(o.dx);
  const double sy = 1.0 / std::sqrt(o.dy);
  const Mat gx = gaussian(o.dx, o.dx, sx, rng);
  const Mat gy = gaussian(o.dy, o.dy, sy, rng);
  const Mat b = gaussian(o.dx, o.dy, o.coupling, rng);
  const Vec cx = gaussian(o.dx, o.offset_scale, rng);
  const Vec cy = gaussian(o.dy, o.offset_scale, rng);

  std::vector<QuadSaddleDevice> devices;
  devices.reserve(o.n);
  for (int i = 0; i < o.n; ++i) {
    QuadSaddleDevice dv;
    if (o.spread > 0.0) {
      const Mat gxi = gx + gaussian(o.dx, o.dx, o.spread * sx, rng);
      const Mat gyi = gy + gaussian(o.dy, o.dy, o.spread * sy, rng);
      dv.A = gxi.transpose() * gxi;
      dv.C = gyi.transpose() * gyi;
      dv.B = b + gaussian(o.dx, o.dy, o.spread * o.coupling, rng);
      dv.cx = cx + gaussian(o.dx, o.spread * o.offset_scale, rng);
      dv.cy = cy + gaussian(o.dy, o.spread * o.offset_scale, rng);
    } else {
      dv.A = gx.transpose() * gx;
      dv.C = gy.transpose() * gy;
      dv.B = b;
      dv.cx = cx;
      dv.cy = cy;
    }
    devices.push_back(std::move(dv));
  }
  return std::make_unique<QuadSaddle>(std::move(devices), o.mu0);
}

}  // namespace tp

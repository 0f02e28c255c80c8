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

#include "tp/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tp/errors.hpp"
#include "tp/solvers.hpp"

namespace tp {

double default_region_radius(const Vec& z0) {
  return std::max(5.0, 2.0 * norm(z0));
}

namespace {

Vec gaussian(int d, Rng& rng) {
  std::normal_distribution<double> nd;
  Vec v(d);
  for (int j = 0; j < d; ++j) v[j] = nd(rng);
  return v;
}

Vec uniform_in_ball(const Vec& center, double radius, Rng& rng) {
  const int d = static_cast<int>(center.size());
  Vec v = gaussian(d, rng);
  const double nv = v.norm();
  if (nv == 0.0) return center;
  const double r = radius * std::pow(std::uniform_real_distribution<double>(
                                         0.0, 1.0)(rng),
                                     1.0 / d);
  return center + (r / nv) * v;
}

class Accumulator {
 public:
  explicit Accumulator(const VIProblem& p) : p_(p), n_(p.num_devices()) {}

  void pair(Vec u, Vec v) {
    u = p_.project(u);
    v = p_.project(v);
    const Vec h = u - v;
    const double hh = h.squaredNorm();
    if (!(hh > 0.0)) return;
    const double hn = std::sqrt(hh);
    std::vector<Vec> du(n_);
    Vec mean = Vec::Zero(h.size());
    for (int i = 0; i < n_; ++i) {
      du[i] = evaluate_device(p_, i, u) - evaluate_device(p_, i, v);
      mean += du[i];
    }
    mean /= static_cast<double>(n_);
    for (int i = 0; i < n_; ++i) {
      L_ = std::max(L_, du[i].norm() / hn);
      delta_ = std::max(delta_, (du[i] - mean).norm() / hn);
    }
    mu_ = std::min(mu_, mean.dot(h) / hh);
    ++pairs_;
  }

  double mu() const { return mu_; }
  double L() const { return L_; }
  double delta() const { return delta_; }
  std::int64_t pairs() const { return pairs_; }

 private:
  const VIProblem& p_;
  int n_;
  double mu_ = std::numeric_limits<double>::infinity();
  double L_ = 0.0;
  double delta_ = 0.0;
  std::int64_t pairs_ = 0;
};

Mat fd_jacobian(const VIProblem& p, int device, const Vec& z) {
  const int d = static_cast<int>(z.size());
  const double s = 1e-5 * std::max(1.0, z.norm());
  Mat J(d, d);
  Vec zp = z;
  Vec zm = z;
  for (int k = 0; k < d; ++k) {
    zp[k] += s;
    zm[k] -= s;
    J.col(k) = (p.device_operator(device, zp) - p.device_operator(device, zm)) /
               (2.0 * s);
    zp[k] = z[k];
    zm[k] = z[k];
  }
  return J;
}

Vec top_right_singular(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m.transpose() * m);
  return es.eigenvectors().col(m.cols() - 1);
}

}  // namespace

ConstantsEstimate estimate_constants(const VIProblem& problem,
                                     const Vec& center,
                                     const EstimateOptions& opts, Rng& rng) {
  if (opts.samples < 100) {
    throw ValidationError("constants estimation needs samples >= 100");
  }
  if (!(opts.radius > 0.0)) {
    throw ValidationError("constants region radius must be > 0");
  }
  if (center.size() != problem.dim()) {
    throw ValidationError("constants center has the wrong dimension");
  }
  Accumulator acc(problem);
  for (int s = 0; s < opts.samples; ++s) {
    Vec u = uniform_in_ball(center, opts.radius, rng);
    Vec v = uniform_in_ball(center, opts.radius, rng);
    acc.pair(std::move(u), std::move(v));
  }

  const int d = problem.dim();
  const int n = problem.num_devices();
  if (d <= opts.max_jacobian_dim) {
    const double step = 0.25 * opts.radius;
    for (int a = 0; a < opts.anchors; ++a) {
      const Vec z = problem.project(
          a == 0 ? center : uniform_in_ball(center, 0.5 * opts.radius, rng));
      std::vector<Mat> J(n);
      Mat Jbar = Mat::Zero(d, d);
      for (int i = 0; i < n; ++i) {
        J[i] = fd_jacobian(problem, i, z);
        Jbar += J[i];
      }
      Jbar /= static_cast<double>(n);
      std::vector<Vec> dirs;
      {
        const Mat sym = 0.5 * (Jbar + Jbar.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(sym);
        dirs.push_back(es.eigenvectors().col(0));
      }
      for (int i = 0; i < n; ++i) {
        dirs.push_back(top_right_singular(J[i]));
        dirs.push_back(top_right_singular(J[i] - Jbar));
      }
      for (const Vec& e : dirs) acc.pair(z + step * e, z - step * e);
    }
  }

  ConstantsEstimate out;
  out.estimated = {acc.mu(), acc.L(), acc.delta()};
  out.analytic = problem.analytic_constants();
  out.mu_nonpositive = !(out.effective().mu > 0.0);
  out.pairs = acc.pairs();
  return out;
}

ReferenceSolution reference_solution(const VIProblem& problem, double L,
                                     const Vec& z0, double tol,
                                     std::int64_t max_iters) {
  if (!(L > 0.0)) throw ValidationError("reference solution needs L > 0");
  if (!(tol > 0.0)) throw ValidationError("reference tolerance must be > 0");
  const double eta = 1.0 / (4.0 * L);
  auto F = [&](const Vec& v) { return problem.mean_operator(v); };
  ReferenceSolution out;
  out.z = problem.project(z0);
  out.residual = std::numeric_limits<double>::infinity();
  const double scale = std::max(1.0, norm(out.z));
  for (std::int64_t k = 1; k <= max_iters; ++k) {
    Vec next = eg_step(F, out.z, eta, problem.feasible_set());
    const double step = (next - out.z).norm();
    out.residual = step / (1.0 + out.z.norm());
    const bool done = step <= tol * (1.0 + out.z.norm());
    out.z = std::move(next);
    out.iterations = k;
    if (out.z.norm() > 1e8 * scale) {
      throw NumericalError("reference solution diverged");
    }
    if (done) return out;
  }
  throw NotConvergedError("reference solution did not converge within " +
                              std::to_string(max_iters) + " iterations",
                          out.residual);
}

}  // namespace tp

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

#include "tp/problem.hpp"

#include <string>

#include "tp/errors.hpp"

namespace tp {

Vec evaluate_device(const VIProblem& problem, int device, const Vec& z) {
  if (device < 0 || device >= problem.num_devices()) {
    throw ValidationError("device " + std::to_string(device) +
                          " out of range");
  }
  if (z.size() != problem.dim()) {
    throw ValidationError("operator input has dim " +
                          std::to_string(z.size()) + ", problem has " +
                          std::to_string(problem.dim()));
  }
  Vec out = problem.device_operator(device, z);
  require_finite(out, "operator evaluation");
  return out;
}

Vec VIProblem::mean_operator(const Vec& z) const {
  Vec sum = evaluate_device(*this, 0, z);
  for (int i = 1; i < num_devices(); ++i) sum += evaluate_device(*this, i, z);
  return sum / static_cast<double>(num_devices());
}

Vec VIProblem::project(const Vec& z) const {
  return tp::project(feasible_set(), layout(), z);
}

}  // namespace tp

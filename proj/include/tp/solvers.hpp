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

#ifndef TP_SOLVERS_HPP_
#define TP_SOLVERS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tp/compressors.hpp"
#include "tp/errors.hpp"
#include "tp/linalg.hpp"
#include "tp/netsim.hpp"
#include "tp/problem.hpp"

namespace tp {

struct SolverParams {
  double tau = 0.25;
  double gamma = 1.0;
  double eta = 0.1;
  double p = 0.25;
  int H = 1;
  std::int64_t K = 1000;

  void validate() const;
};

// ln(40 L / (mu p)).
double schedule_log_term(double mu, double L, double p);

// tau = p, H = ceil(8 ln(40L/(mu p))),
// gamma = min{p/(3mu), sqrt(p)/(4 delta), (H/(4 ln(40L/(mu p))) - 1)/L},
// eta = 1/(4(L + 1/gamma)). delta == 0 drops the middle term.
SolverParams schedule_params(double mu, double L, double delta, double p);

// Same shape with a caller-chosen H >= 2 and the last gamma term replaced by
// (H - 1)/(4L), so that gamma grows with H until the other terms bind.
SolverParams local_steps_params(double mu, double L, double delta, double p,
                                int H);

// min(1/n, 1/4).
double default_sync_probability(int n);

// ceil(L / (delta sqrt(n)) + 1); 0 when delta == 0.
int optimal_local_steps(double L, double delta, int n);

// One projected extragradient step.
template <class Oracle>
Vec eg_step(Oracle&& oracle, const Vec& z, double eta, const FeasibleSet& set) {
  if (!(eta > 0.0)) throw ValidationError("extragradient step needs eta > 0");
  Vec g = oracle(z);
  require_finite(g, "extragradient oracle");
  Vec half = z - eta * g;
  project_in_place(set, half);
  Vec g_half = oracle(half);
  require_finite(g_half, "extragradient oracle");
  Vec next = z - eta * g_half;
  project_in_place(set, next);
  return next;
}

// Server-side data of the inner subproblem
//   G(u) = F_1(u) - F_1(m) + F(m) + (u - z - tau (m - z)) / gamma.
struct InnerState {
  const Vec* z = nullptr;
  const Vec* m = nullptr;
  const Vec* F_m = nullptr;   // (1/n) sum F_i(m)
  const Vec* F1_m = nullptr;  // F_1(m)
};

// H extragradient steps on G starting from z. H == 0 returns z.
Vec solve_inner(const VIProblem& problem, const InnerState& state,
                const SolverParams& params);

struct TraceRow {
  std::int64_t iter = 0;
  std::int64_t rounds = 0;
  double uplink_floats_device_mean = 0.0;
  double uplink_full_operators = 0.0;
  double dist_sq = 0.0;
  double dist_sq_rel = 0.0;
  double wall_seconds = 0.0;
};

struct IterTrace {
  std::string solver;
  std::vector<TraceRow> rows;
  std::int64_t iterations = 0;
  Vec z_final;
  // Filled with record_iterates: one entry per outer iteration.
  std::vector<Vec> iterates;           // z^1, z^2, ...
  std::vector<double> correction_norms;  // ||server correction||
};

struct RunOptions {
  std::optional<Vec> reference;
  // 0 picks every iteration up to 1e4 iterations, else every ceil(K/1e4).
  std::int64_t log_every = 0;
  // Stop once dist_sq_rel <= stop_below (needs a reference).
  double stop_below = 0.0;
  bool record_iterates = false;
  // Charge the initial exchange of F_i(z0) that seeds the reference point.
  bool charge_setup = false;
};

std::int64_t logging_stride(std::int64_t K, std::int64_t log_every);

IterTrace three_pillars_run(const VIProblem& problem,
                            const SolverParams& params,
                            const CompressorSpec& compressor,
                            CommLedger& ledger, const Vec& z0,
                            std::uint64_t seed, const RunOptions& options);

IterTrace three_pillars_pp_run(const VIProblem& problem,
                               const SolverParams& params, CommLedger& ledger,
                               const Vec& z0, std::uint64_t seed,
                               const RunOptions& options);

// Each iteration every device uploads F_i at the point and the half point.
IterTrace distributed_eg_run(const VIProblem& problem, CommLedger& ledger,
                             const Vec& z0, double eta, std::int64_t K,
                             const RunOptions& options);

// K averaging rounds of H local forward steps each.
IterTrace local_sgda_run(const VIProblem& problem, CommLedger& ledger,
                         const Vec& z0, double eta_local, int H,
                         std::int64_t K, const RunOptions& options);

}  // namespace tp

#endif  // TP_SOLVERS_HPP_

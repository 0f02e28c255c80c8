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

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "tp/constants.hpp"
#include "tp/dataset.hpp"
#include "tp/errors.hpp"
#include "tp/quad_saddle.hpp"
#include "tp/robust_regression.hpp"
#include "tp/solvers.hpp"

namespace tp {
namespace {

using testing::LambdaProblem;
using testing::max_abs_diff;
using testing::random_vec;

Vec v2(double a, double b) {
  Vec z(2);
  z << a, b;
  return z;
}

TEST(Schedule, WorkedExample) {
  const auto s = schedule_params(1.0, 10.0, 1.0, 0.25);
  EXPECT_NEAR(schedule_log_term(1.0, 10.0, 0.25), 7.3777589082278725, 1e-12);
  EXPECT_EQ(s.H, 60);
  EXPECT_DOUBLE_EQ(s.gamma, 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(s.eta, 1.0 / 88.0);
  EXPECT_DOUBLE_EQ(s.tau, 0.25);
  EXPECT_DOUBLE_EQ(s.p, 0.25);
}

TEST(Schedule, SimilarityTermDroppedWithoutHeterogeneity) {
  const auto s = schedule_params(1.0, 10.0, 0.0, 0.25);
  EXPECT_DOUBLE_EQ(s.gamma, 1.0 / 12.0);
}

TEST(Schedule, SimilarityTermBinds) {
  const auto s = schedule_params(0.01, 10.0, 2.0, 0.25);
  EXPECT_EQ(s.H, 96);
  EXPECT_DOUBLE_EQ(s.gamma, 0.0625);
  EXPECT_NEAR(s.eta, 0.009615384615384616, 1e-15);
}

TEST(Schedule, LocalStepTermBinds) {
  const auto s = schedule_params(0.01, 1.0, 0.0, 0.25);
  EXPECT_EQ(s.H, 78);
  EXPECT_NEAR(s.gamma, 1.0143912238592532, 1e-12);
  EXPECT_NEAR(s.eta, 0.12589302562536003, 1e-12);
}

TEST(Schedule, Refusals) {
  EXPECT_THROW(schedule_params(1.0, 10.0, 1.0, 0.3), ValidationError);
  EXPECT_THROW(schedule_params(0.0, 10.0, 1.0, 0.25), ValidationError);
  EXPECT_THROW(schedule_params(-1.0, 10.0, 1.0, 0.25), ValidationError);
  EXPECT_THROW(schedule_params(1.0, 0.5, 1.0, 0.25), ValidationError);
  EXPECT_THROW(schedule_params(1.0, 10.0, 1.0, 0.0), ValidationError);
}

TEST(Schedule, LocalStepsVariant) {
  const auto s = local_steps_params(1.0, 8.0, 0.5, 0.125, 5);
  EXPECT_EQ(s.H, 5);
  EXPECT_DOUBLE_EQ(s.gamma, 4.0 / 32.0 < 0.125 / 3.0 ? 0.125 : 0.125 / 3.0);
  EXPECT_DOUBLE_EQ(local_steps_params(1.0, 8.0, 0.5, 0.125, 2).gamma,
                   1.0 / 32.0);
  EXPECT_THROW(local_steps_params(1.0, 8.0, 0.5, 0.125, 1), ValidationError);
}

TEST(Schedule, Defaults) {
  EXPECT_DOUBLE_EQ(default_sync_probability(25), 0.04);
  EXPECT_DOUBLE_EQ(default_sync_probability(2), 0.25);
  EXPECT_EQ(optimal_local_steps(8.0, 1.0, 8), 4);  // ceil(2.828 + 1)
  EXPECT_EQ(optimal_local_steps(8.0, 0.0, 8), 0);
}

TEST(Params, Validation) {
  SolverParams s;
  EXPECT_NO_THROW(s.validate());
  s.tau = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = {};
  s.H = 0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = {};
  s.eta = std::nan("");
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(EgStep, RotationExample) {
  auto F = [](const Vec& z) { return v2(z[1], -z[0]); };
  const Vec z = eg_step(F, v2(1, 0), 0.5, FeasibleSet::whole_space());
  EXPECT_DOUBLE_EQ(z[0], 0.75);
  EXPECT_DOUBLE_EQ(z[1], 0.5);
}

TEST(EgStep, ZeroOperatorFixedPoint) {
  auto F = [](const Vec& z) { return Vec::Zero(z.size()); };
  const Vec z0 = v2(3, -1);
  EXPECT_EQ(eg_step(F, z0, 0.1, FeasibleSet::whole_space()), z0);
}

TEST(EgStep, NanIsAnError) {
  auto F = [](const Vec&) { return v2(NAN, 0); };
  EXPECT_THROW(eg_step(F, v2(0, 0), 0.1, FeasibleSet::whole_space()),
               NumericalError);
  auto G = [](const Vec& z) { return z; };
  EXPECT_THROW(eg_step(G, v2(0, 0), 0.0, FeasibleSet::whole_space()),
               ValidationError);
}

TEST(EgStep, LinearRateOnAffineOperator) {
  Rng rng(1);
  const auto p = make_quad_saddle({}, rng);
  const auto c = *p->analytic_constants();
  const Vec zs = p->exact_solution();
  Vec z = Vec::Zero(p->dim());
  const double d0 = (z - zs).squaredNorm();
  auto F = [&](const Vec& u) { return p->mean_operator(u); };
  for (int k = 1; k <= 200; ++k) {
    z = eg_step(F, z, 1.0 / (4.0 * c.L), p->feasible_set());
    EXPECT_LE((z - zs).squaredNorm(), 2.0 * std::exp(-k * c.mu / (4 * c.L)) * d0)
        << "k=" << k;
  }
}

TEST(SolveInner, ZeroStepsReturnsStart) {
  Rng rng(2);
  const auto p = make_quad_saddle({}, rng);
  const Vec z = random_vec(40, rng);
  const Vec m = random_vec(40, rng);
  const Vec Fm = p->mean_operator(m);
  const Vec F1m = p->device_operator(0, m);
  SolverParams s;
  s.H = 0;
  EXPECT_EQ(solve_inner(*p, {&z, &m, &Fm, &F1m}, s), z);
}

TEST(SolveInner, ConstantOperatorProx) {
  Rng rng(3);
  const Vec c1 = random_vec(3, rng);
  // device 0 is identically zero, device 1 constant
  LambdaProblem p(testing::single_block(3), FeasibleSet::whole_space(),
                  {[](const Vec& z) { return Vec::Zero(z.size()); },
                   [c1](const Vec&) { return c1; }});
  const Vec z = random_vec(3, rng);
  const Vec m = random_vec(3, rng);
  const Vec Fm = p.mean_operator(m);
  const Vec F1m = p.device_operator(0, m);
  SolverParams s;
  s.tau = 0.0;
  s.gamma = 0.7;
  s.eta = s.gamma / 4.0;
  const Vec u_hat = z - s.gamma * Fm;
  // G(u) = (u - u_hat) / gamma, so each step scales the error by
  // 1 - (1/4)(3/4) = 13/16
  const double e0 = (z - u_hat).norm();
  for (int H : {1, 2, 4, 8, 16, 32}) {
    s.H = H;
    const double err = (solve_inner(p, {&z, &m, &Fm, &F1m}, s) - u_hat).norm();
    EXPECT_NEAR(err, std::pow(13.0 / 16.0, H) * e0, 1e-12 * e0);
    EXPECT_LE(err * err, std::exp(-H / 4.0) * e0 * e0);
  }
}

TEST(SolveInner, ContractionOnQuadSaddle) {
  Rng rng(4);
  const auto p = make_quad_saddle({}, rng);
  const auto c = *p->analytic_constants();
  SolverParams s = schedule_params(c.mu, c.L, c.delta, 0.125);
  const Vec z = random_vec(40, rng);
  const Vec m = random_vec(40, rng);
  const Vec Fm = p->mean_operator(m);
  const Vec F1m = p->device_operator(0, m);
  const InnerState st{&z, &m, &Fm, &F1m};
  SolverParams long_run = s;
  long_run.H = 10000;
  const Vec u_hat = solve_inner(*p, st, long_run);
  for (int H : {10, 40, 160}) {
    s.H = H;
    const double ratio = (solve_inner(*p, st, s) - u_hat).squaredNorm() /
                         (z - u_hat).squaredNorm();
    EXPECT_LE(ratio, 1.1 * std::exp(-H / (4.0 * (s.gamma * c.L + 1.0))));
  }
}

struct QuadFixture {
  std::unique_ptr<QuadSaddle> p;
  ProblemConstants c;
  Vec zs;
};

QuadFixture quad(double spread, int n = 8, std::uint64_t seed = 5) {
  Rng rng(seed);
  QuadSaddleOptions o;
  o.n = n;
  o.spread = spread;
  QuadFixture f;
  f.p = make_quad_saddle(o, rng);
  f.c = *f.p->analytic_constants();
  f.zs = f.p->exact_solution();
  return f;
}

TEST(ThreePillars, ConvergesOnQuadSaddle) {
  auto f = quad(0.1);
  SolverParams s = schedule_params(f.c.mu, f.c.L, f.c.delta, 0.125);
  s.K = 400;
  CommLedger ledger({8, 40});
  RunOptions opts;
  opts.reference = f.zs;
  const auto t =
      three_pillars_run(*f.p, s, {}, ledger, Vec::Zero(40), 1, opts);
  EXPECT_EQ(t.iterations, 400);
  EXPECT_EQ(t.rows.size(), 401u);
  EXPECT_LE(t.rows.back().dist_sq_rel, 1e-8);
  EXPECT_DOUBLE_EQ(t.rows.front().dist_sq_rel, 1.0);
}

TEST(ThreePillars, Deterministic) {
  auto f = quad(0.1);
  SolverParams s = schedule_params(f.c.mu, f.c.L, f.c.delta, 0.125);
  s.K = 50;
  RunOptions opts;
  opts.reference = f.zs;
  opts.record_iterates = true;
  CommLedger la({8, 40});
  CommLedger lb({8, 40});
  const auto a = three_pillars_run(*f.p, s, {}, la, Vec::Zero(40), 7, opts);
  const auto b = three_pillars_run(*f.p, s, {}, lb, Vec::Zero(40), 7, opts);
  ASSERT_EQ(a.iterates.size(), b.iterates.size());
  for (std::size_t k = 0; k < a.iterates.size(); ++k) {
    EXPECT_EQ(a.iterates[k], b.iterates[k]);
  }
  EXPECT_EQ(la.uplink_per_device(), lb.uplink_per_device());
  CommLedger lc({8, 40});
  const auto c = three_pillars_run(*f.p, s, {}, lc, Vec::Zero(40), 8, opts);
  EXPECT_NE(a.z_final, c.z_final);
}

TEST(ThreePillars, SingleDeviceHasNoCorrection) {
  auto f = quad(0.1, 1);
  SolverParams s = schedule_params(f.c.mu, f.c.L, f.c.delta, 0.25);
  s.K = 30;
  RunOptions opts;
  opts.record_iterates = true;
  CommLedger ledger({1, 40});
  const auto t = three_pillars_run(*f.p, s, {}, ledger, Vec::Zero(40), 1, opts);
  ASSERT_EQ(t.correction_norms.size(), 30u);
  for (double c : t.correction_norms) EXPECT_EQ(c, 0.0);
  EXPECT_EQ(ledger.total_uplink(), 0);
}

TEST(ThreePillars, AlwaysSyncWithUnitProbability) {
  auto f = quad(0.1, 4);
  SolverParams s = schedule_params(f.c.mu, f.c.L, f.c.delta, 0.25);
  s.p = 1.0;
  s.K = 20;
  CommLedger ledger({4, 40});
  three_pillars_run(*f.p, s, {}, ledger, Vec::Zero(40), 1, {});
  EXPECT_EQ(ledger.full_syncs(), 20);
  EXPECT_EQ(ledger.rounds(), 40);
  EXPECT_EQ(ledger.uplink(1), 20 * (10 + 40));
}

TEST(ThreePillars, FrozenReferenceCountsCompressedOnly) {
  Rng rng(6);
  QuadSaddleOptions o;
  o.n = 25;
  o.dx = 50;
  o.dy = 50;
  const auto p = make_quad_saddle(o, rng);
  const auto c = *p->analytic_constants();
  SolverParams s = schedule_params(c.mu, c.L, c.delta, 0.04);
  s.p = 0.0;
  s.K = 100;
  s.H = 2;
  CommLedger ledger({25, 100});
  three_pillars_run(*p, s, {}, ledger, Vec::Zero(100), 1, {});
  for (int i = 1; i < 25; ++i) EXPECT_EQ(ledger.uplink(i), 100 * 4);
  EXPECT_EQ(ledger.uplink(0), 0);
  EXPECT_EQ(ledger.full_syncs(), 0);

  CommLedger with_setup({25, 100});
  RunOptions opts;
  opts.charge_setup = true;
  three_pillars_run(*p, s, {}, with_setup, Vec::Zero(100), 1, opts);
  EXPECT_EQ(with_setup.uplink(1), 100 * 4 + 100);
}

TEST(ThreePillars, IdenticalDevicesCompressionIsExact) {
  auto f = quad(0.0);
  SolverParams s = schedule_params(f.c.mu, f.c.L, 1e-3, 0.125);
  s.K = 60;
  RunOptions opts;
  opts.record_iterates = true;
  CommLedger la({8, 40});
  CommLedger lb({8, 40});
  const auto a = three_pillars_run(*f.p, s, {CompressorKind::kPermutation, 1},
                                   la, Vec::Zero(40), 3, opts);
  const auto b = three_pillars_run(*f.p, s, {CompressorKind::kIdentity, 1}, lb,
                                   Vec::Zero(40), 3, opts);
  for (std::size_t k = 0; k < a.iterates.size(); ++k) {
    EXPECT_LE(max_abs_diff(a.iterates[k], b.iterates[k]), 1e-12);
  }
}

TEST(ThreePillars, IteratesStayFeasible) {
  Rng rng(7);
  RobustRegSpec spec;
  spec.radius = 0.05;
  const RobustRegression p(gen_synthetic(5, 20, 6, 0.05, rng), spec);
  EstimateOptions eo;
  eo.radius = 1.0;
  Rng crng(8);
  const auto c = estimate_constants(p, Vec::Zero(12), eo, crng).effective();
  SolverParams s = schedule_params(c.mu, c.L, c.delta, 0.2);
  s.K = 100;
  RunOptions opts;
  opts.record_iterates = true;
  CommLedger l1({5, 12});
  CommLedger l2({5, 12});
  const Vec z0 = Vec::Constant(12, 0.5);
  const std::vector<IterTrace> traces{
      three_pillars_run(p, s, {}, l1, z0, 1, opts),
      three_pillars_pp_run(p, s, l2, z0, 1, opts)};
  for (const auto& t : traces) {
    ASSERT_EQ(t.iterates.size(), 100u);
    for (const auto& z : t.iterates) {
      EXPECT_LE(feasibility_violation(p.feasible_set(), z), 1e-12);
    }
  }
}

TEST(ThreePillars, EarlyStop) {
  auto f = quad(0.1);
  SolverParams s = schedule_params(f.c.mu, f.c.L, f.c.delta, 0.125);
  s.K = 5000;
  RunOptions opts;
  opts.reference = f.zs;
  opts.stop_below = 1e-6;
  CommLedger ledger({8, 40});
  const auto t = three_pillars_run(*f.p, s, {}, ledger, Vec::Zero(40), 1, opts);
  EXPECT_LT(t.iterations, 5000);
  EXPECT_LE(t.rows.back().dist_sq_rel, 1e-6);
  EXPECT_GT(t.rows[t.rows.size() - 2].dist_sq_rel, 1e-6);
}

TEST(ThreePillars, Validation) {
  auto f = quad(0.1);
  SolverParams s;
  CommLedger wrong({4, 40});
  EXPECT_THROW(three_pillars_run(*f.p, s, {}, wrong, Vec::Zero(40), 1, {}),
               ValidationError);
  CommLedger ok({8, 40});
  EXPECT_THROW(three_pillars_run(*f.p, s, {}, ok, Vec::Zero(39), 1, {}),
               ValidationError);
}

TEST(ThreePillars, DivergenceGuard) {
  auto f = quad(0.1);
  SolverParams s;
  s.gamma = 1e3;
  s.eta = 10.0;
  s.H = 5;
  s.K = 100;
  CommLedger ledger({8, 40});
  EXPECT_THROW(
      three_pillars_run(*f.p, s, {}, ledger, Vec::Ones(40), 1, {}),
      NumericalError);
}

TEST(ThreePillarsPP, SingleDeviceHasNoCorrection) {
  auto f = quad(0.1, 1);
  SolverParams s = schedule_params(f.c.mu, f.c.L, f.c.delta, 0.25);
  s.K = 30;
  RunOptions opts;
  opts.record_iterates = true;
  CommLedger ledger({1, 40});
  const auto t = three_pillars_pp_run(*f.p, s, ledger, Vec::Zero(40), 1, opts);
  for (double c : t.correction_norms) EXPECT_EQ(c, 0.0);
}

TEST(ThreePillarsPP, ConvergesAndCountsOneUploader) {
  auto f = quad(0.1);
  SolverParams s = schedule_params(f.c.mu, f.c.L, f.c.delta, 0.125);
  s.K = 400;
  RunOptions opts;
  opts.reference = f.zs;
  CommLedger ledger({8, 40});
  const auto t = three_pillars_pp_run(*f.p, s, ledger, Vec::Zero(40), 2, opts);
  EXPECT_LE(t.rows.back().dist_sq_rel, 1e-8);
  // every iteration: one full upload (free when the server is picked),
  // plus 40 floats per non-server device at each sync
  const std::int64_t total = ledger.total_uplink();
  const std::int64_t sync_part = ledger.full_syncs() * 7 * 40;
  EXPECT_LE(total - sync_part, 400 * 40);
  EXPECT_EQ((total - sync_part) % 40, 0);
}

TEST(ExtraGradient, MatchesEgStep) {
  auto f = quad(0.1);
  const double eta = 1.0 / (4.0 * f.c.L);
  RunOptions opts;
  opts.record_iterates = true;
  CommLedger ledger({8, 40});
  const auto t = distributed_eg_run(*f.p, ledger, Vec::Zero(40), eta, 50, opts);
  Vec z = Vec::Zero(40);
  auto F = [&](const Vec& u) { return f.p->mean_operator(u); };
  for (int k = 0; k < 50; ++k) {
    z = eg_step(F, z, eta, f.p->feasible_set());
    EXPECT_EQ(z, t.iterates[k]);
  }
  for (int i = 1; i < 8; ++i) EXPECT_EQ(ledger.uplink(i), 50 * 2 * 40);
  EXPECT_EQ(ledger.rounds(), 100);
}

TEST(ExtraGradient, RateAgainstReference) {
  auto f = quad(0.1);
  RunOptions opts;
  opts.reference = f.zs;
  CommLedger ledger({8, 40});
  const auto t = distributed_eg_run(*f.p, ledger, Vec::Zero(40),
                                    1.0 / (4.0 * f.c.L), 300, opts);
  for (const auto& r : t.rows) {
    EXPECT_LE(r.dist_sq_rel, std::exp(-r.iter * f.c.mu / (8.0 * f.c.L)));
  }
}

TEST(LocalSgda, SingleStepIsAveragedGda) {
  auto f = quad(0.1);
  const double eta = f.c.mu / (f.c.L * f.c.L);
  RunOptions opts;
  opts.record_iterates = true;
  CommLedger ledger({8, 40});
  const auto t = local_sgda_run(*f.p, ledger, Vec::Zero(40), eta, 1, 20, opts);
  Vec z = Vec::Zero(40);
  for (int k = 0; k < 20; ++k) {
    z = z - eta * f.p->mean_operator(z);
    EXPECT_LE(max_abs_diff(z, t.iterates[k]), 1e-12);
  }
  EXPECT_EQ(ledger.uplink(3), 20 * 40);
}

TEST(LocalSgda, IdenticalDevicesMatchSingleMachine) {
  auto f = quad(0.0);
  const double eta = f.c.mu / (f.c.L * f.c.L);
  RunOptions opts;
  opts.record_iterates = true;
  CommLedger ledger({8, 40});
  const auto t = local_sgda_run(*f.p, ledger, Vec::Zero(40), eta, 5, 10, opts);
  Vec z = Vec::Zero(40);
  for (int k = 0; k < 10; ++k) {
    for (int s = 0; s < 5; ++s) z = z - eta * f.p->device_operator(0, z);
    EXPECT_LE(max_abs_diff(z, t.iterates[k]), 1e-12);
  }
}

TEST(LocalSgda, HeterogeneousDevicesPlateau) {
  auto f = quad(1.0);
  const double eta = f.c.mu / (f.c.L * f.c.L);
  RunOptions opts;
  opts.reference = f.zs;
  CommLedger ledger({8, 40});
  const auto t = local_sgda_run(*f.p, ledger, Vec::Zero(40), eta, 10, 3000, opts);
  EXPECT_GT(t.rows.back().dist_sq_rel, 1e-3);
  // settled: the last thousand rounds barely move
  const double late = t.rows[2000].dist_sq_rel;
  EXPECT_NEAR(t.rows.back().dist_sq_rel, late, 1e-3 * late);
}

TEST(Logging, StrideRule) {
  EXPECT_EQ(logging_stride(10000, 0), 1);
  EXPECT_EQ(logging_stride(10001, 0), 2);
  EXPECT_EQ(logging_stride(100000, 0), 10);
  EXPECT_EQ(logging_stride(100000, 3), 3);
}

}  // namespace
}  // namespace tp

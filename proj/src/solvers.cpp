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

#include "tp/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <span>

#include "tp/rng.hpp"

namespace tp {

void SolverParams::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must be in (0, 1]");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("gamma must be positive and finite");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ValidationError("eta must be positive and finite");
  }
  // p == 0 freezes the reference point at z0
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p must be in [0, 1]");
  if (H < 1) throw ValidationError("H must be >= 1");
  if (K < 0) throw ValidationError("K must be >= 0");
}

namespace {

void check_constants(double mu, double L, double delta, double p) {
  if (!(mu > 0.0)) {
    throw ValidationError("schedule refused: mu must be > 0 (problem is not "
                          "strongly monotone on the region)");
  }
  if (!(L >= mu)) throw ValidationError("schedule needs L >= mu");
  if (!(delta >= 0.0)) throw ValidationError("schedule needs delta >= 0");
  if (!(p > 0.0 && p <= 0.25)) {
    throw ValidationError("schedule needs 0 < p <= 1/4");
  }
}

double similarity_term(double delta, double p) {
  if (delta == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(p) / (4.0 * delta);
}

SolverParams finish(double p, int H, double gamma, double L) {
  SolverParams s;
  s.tau = p;
  s.p = p;
  s.H = H;
  s.gamma = gamma;
  s.eta = 1.0 / (4.0 * (L + 1.0 / gamma));
  return s;
}

}  // namespace

double schedule_log_term(double mu, double L, double p) {
  return std::log(40.0 * L / (mu * p));
}

SolverParams schedule_params(double mu, double L, double delta, double p) {
  check_constants(mu, L, delta, p);
  const double lg = schedule_log_term(mu, L, p);
  const int H = static_cast<int>(std::ceil(8.0 * lg));
  const double t1 = p / (3.0 * mu);
  const double t2 = similarity_term(delta, p);
  const double t3 = (H / (4.0 * lg) - 1.0) / L;
  return finish(p, H, std::min({t1, t2, t3}), L);
}

SolverParams local_steps_params(double mu, double L, double delta, double p,
                                int H) {
  check_constants(mu, L, delta, p);
  if (H < 2) throw ValidationError("local_steps_params needs H >= 2");
  const double t1 = p / (3.0 * mu);
  const double t2 = similarity_term(delta, p);
  const double t3 = (H - 1.0) / (4.0 * L);
  return finish(p, H, std::min({t1, t2, t3}), L);
}

double default_sync_probability(int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  return std::min(1.0 / n, 0.25);
}

int optimal_local_steps(double L, double delta, int n) {
  if (delta <= 0.0) return 0;
  return static_cast<int>(std::ceil(L / (delta * std::sqrt(double(n))) + 1.0));
}

namespace {

constexpr double kDivergence = 1e8;

void guard(const Vec& z, double scale, const char* where) {
  require_finite(z, where);
  if (norm(z) > kDivergence * scale) {
    throw NumericalError(std::string(where) + ": iterate norm exceeded 1e8 x "
                         "its initial scale (divergence)");
  }
}

double scale_of(const Vec& z) { return std::max(1.0, norm(z)); }

}  // namespace

Vec solve_inner(const VIProblem& problem, const InnerState& st,
                const SolverParams& params) {
  const Vec& z = *st.z;
  if (params.H == 0) return z;
  // Constant part of G: F(m) - F_1(m) - (z + tau (m - z)) / gamma.
  const double inv_gamma = 1.0 / params.gamma;
  const Vec anchor = z + params.tau * (*st.m - z);
  const Vec shift = *st.F_m - *st.F1_m - inv_gamma * anchor;
  auto G = [&](const Vec& u) -> Vec {
    return problem.device_operator(0, u) + inv_gamma * u + shift;
  };
  const double scale = scale_of(z) + scale_of(anchor);
  Vec u = z;
  for (int t = 0; t < params.H; ++t) {
    u = eg_step(G, u, params.eta, problem.feasible_set());
    guard(u, scale, "inner solve");
  }
  return u;
}

std::int64_t logging_stride(std::int64_t K, std::int64_t log_every) {
  if (log_every > 0) return log_every;
  if (K <= 10000) return 1;
  return (K + 9999) / 10000;
}

namespace {

class Tracker {
 public:
  Tracker(std::string name, const CommLedger& ledger, const Vec& z0,
          std::int64_t K, const RunOptions& opts)
      : ledger_(ledger),
        opts_(opts),
        K_(K),
        stride_(logging_stride(K, opts.log_every)),
        scale_(scale_of(z0)),
        start_(std::chrono::steady_clock::now()) {
    trace_.solver = std::move(name);
    if (opts.reference) {
      require_same_dim(z0, *opts.reference, "reference solution");
      denom_ = squared_distance(z0, *opts.reference);
    }
    log(0, z0);
  }

  // Returns true when the run should stop early.
  bool observe(std::int64_t k, const Vec& z) {
    guard(z, scale_, trace_.solver.c_str());
    trace_.iterations = k;
    if (opts_.record_iterates) trace_.iterates.push_back(z);
    bool stop = false;
    double dist = 0.0;
    if (opts_.reference) {
      dist = squared_distance(z, *opts_.reference);
      stop = opts_.stop_below > 0.0 && rel(dist) <= opts_.stop_below;
    }
    if (stop || k % stride_ == 0 || k == K_) log(k, z);
    return stop;
  }

  void correction(double c) {
    if (opts_.record_iterates) trace_.correction_norms.push_back(c);
  }

  IterTrace finish(Vec z) {
    trace_.z_final = std::move(z);
    return std::move(trace_);
  }

 private:
  double rel(double dist) const { return denom_ > 0.0 ? dist / denom_ : dist; }

  void log(std::int64_t k, const Vec& z) {
    TraceRow row;
    row.iter = k;
    row.rounds = ledger_.rounds();
    row.uplink_floats_device_mean = ledger_.mean_uplink();
    row.uplink_full_operators =
        row.uplink_floats_device_mean / ledger_.topology().dim;
    if (opts_.reference) {
      row.dist_sq = squared_distance(z, *opts_.reference);
      row.dist_sq_rel = rel(row.dist_sq);
    }
    row.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start_)
                           .count();
    trace_.rows.push_back(row);
  }

  const CommLedger& ledger_;
  const RunOptions& opts_;
  std::int64_t K_;
  std::int64_t stride_;
  double scale_;
  double denom_ = 0.0;
  std::chrono::steady_clock::time_point start_;
  IterTrace trace_;
};

void check_run_inputs(const VIProblem& problem, const CommLedger& ledger,
                      const Vec& z0) {
  if (ledger.topology().n != problem.num_devices() ||
      ledger.topology().dim != problem.dim()) {
    throw ValidationError("ledger topology does not match the problem");
  }
  if (z0.size() != problem.dim()) {
    throw ValidationError("z0 has the wrong dimension");
  }
  require_finite(z0, "z0");
}

// Reference point and the cached operator values at it.
struct Anchor {
  Vec m;
  Vec F_m;
  Vec F1_m;
  std::vector<Vec> Fi_m;  // per-device values; device-local except in PP
};

// Full sync: every device uploads F_i(m), server averages and broadcasts m
// and F_1(m). A null ledger leaves the exchange uncharged.
void full_sync(const VIProblem& problem, CommLedger* ledger, Anchor& a) {
  const int n = problem.num_devices();
  const int d = problem.dim();
  if (ledger) ledger->begin_round(true);
  a.Fi_m.resize(n);
  Vec sum = Vec::Zero(d);
  for (int i = 0; i < n; ++i) {
    a.Fi_m[i] = evaluate_device(problem, i, a.m);
    if (ledger) ledger->charge_upload(i, d, EventKind::kFullUpload);
    sum += a.Fi_m[i];
  }
  a.F_m = sum / static_cast<double>(n);
  a.F1_m = a.Fi_m[0];
  if (ledger) {
    ledger->charge_broadcast(2 * static_cast<std::int64_t>(d),
                             EventKind::kSyncBroadcast);
  }
}

Vec projected(const VIProblem& problem, Vec v) {
  project_in_place(problem.feasible_set(), v);
  return v;
}

}  // namespace

IterTrace three_pillars_run(const VIProblem& problem,
                            const SolverParams& params,
                            const CompressorSpec& compressor,
                            CommLedger& ledger, const Vec& z0,
                            std::uint64_t seed, const RunOptions& options) {
  params.validate();
  check_run_inputs(problem, ledger, z0);
  const int n = problem.num_devices();
  const int d = problem.dim();
  Rng sketch_rng = make_stream(seed, StreamTag::kSketch);
  Rng coin_rng = make_stream(seed, StreamTag::kSyncCoin);
  RoundCompressor rc(compressor, n, d);

  Vec z = projected(problem, z0);
  Anchor a;
  a.m = z;
  full_sync(problem, options.charge_setup ? &ledger : nullptr, a);
  Tracker tr("three_pillars", ledger, z, params.K, options);

  std::vector<CompressedMsg> msgs(n);
  for (std::int64_t k = 1; k <= params.K; ++k) {
    const Vec u = solve_inner(problem, {&z, &a.m, &a.F_m, &a.F1_m}, params);
    const Vec F1_u = evaluate_device(problem, 0, u);
    ledger.begin_round(false);
    ledger.charge_broadcast(2 * static_cast<std::int64_t>(d));
    rc.begin_round(sketch_rng);
    for (int i = 0; i < n; ++i) {
      const Vec Fi_u = i == 0 ? F1_u : evaluate_device(problem, i, u);
      const Vec delta_i = a.Fi_m[i] - a.F1_m - Fi_u + F1_u;
      msgs[i] = rc.compress(i, delta_i, sketch_rng);
      ledger.charge_upload(i, msgs[i].float_count(),
                           EventKind::kCompressedUpload);
    }
    const Vec corr = rc.aggregate(msgs);
    tr.correction(norm(corr));
    Vec z_next = projected(problem, u + params.gamma * corr);
    if (bernoulli(coin_rng, params.p)) {
      a.m = z;
      full_sync(problem, &ledger, a);
    }
    z = std::move(z_next);
    if (tr.observe(k, z)) break;
  }
  return tr.finish(std::move(z));
}

IterTrace three_pillars_pp_run(const VIProblem& problem,
                               const SolverParams& params, CommLedger& ledger,
                               const Vec& z0, std::uint64_t seed,
                               const RunOptions& options) {
  params.validate();
  check_run_inputs(problem, ledger, z0);
  const int n = problem.num_devices();
  const int d = problem.dim();
  Rng node_rng = make_stream(seed, StreamTag::kNodeSampling);
  Rng coin_rng = make_stream(seed, StreamTag::kSyncCoin);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Vec z = projected(problem, z0);
  Anchor a;
  a.m = z;
  full_sync(problem, options.charge_setup ? &ledger : nullptr, a);
  Tracker tr("three_pillars_pp", ledger, z, params.K, options);

  for (std::int64_t k = 1; k <= params.K; ++k) {
    const Vec u = solve_inner(problem, {&z, &a.m, &a.F_m, &a.F1_m}, params);
    const Vec F1_u = evaluate_device(problem, 0, u);
    const int i = pick(node_rng);
    ledger.begin_round(false);
    // only the sampled device needs u
    ledger.charge_broadcast(d);
    const Vec Fi_u = i == 0 ? F1_u : evaluate_device(problem, i, u);
    ledger.charge_upload(i, d, EventKind::kFullUpload);
    const Vec corr = a.Fi_m[i] - a.F1_m - Fi_u + F1_u;
    tr.correction(norm(corr));
    Vec z_next = projected(problem, u + params.gamma * corr);
    if (bernoulli(coin_rng, params.p)) {
      a.m = z;
      full_sync(problem, &ledger, a);
    }
    z = std::move(z_next);
    if (tr.observe(k, z)) break;
  }
  return tr.finish(std::move(z));
}

IterTrace distributed_eg_run(const VIProblem& problem, CommLedger& ledger,
                             const Vec& z0, double eta, std::int64_t K,
                             const RunOptions& options) {
  check_run_inputs(problem, ledger, z0);
  if (!(eta > 0.0)) throw ValidationError("extragradient needs eta > 0");
  if (K < 0) throw ValidationError("K must be >= 0");
  const int n = problem.num_devices();
  const int d = problem.dim();
  auto oracle = [&](const Vec& v) -> Vec {
    ledger.begin_round(false);
    ledger.charge_broadcast(d);
    for (int i = 0; i < n; ++i) ledger.charge_upload(i, d);
    return problem.mean_operator(v);
  };
  Vec z = projected(problem, z0);
  Tracker tr("extragradient", ledger, z, K, options);
  for (std::int64_t k = 1; k <= K; ++k) {
    z = eg_step(oracle, z, eta, problem.feasible_set());
    if (tr.observe(k, z)) break;
  }
  return tr.finish(std::move(z));
}

IterTrace local_sgda_run(const VIProblem& problem, CommLedger& ledger,
                         const Vec& z0, double eta_local, int H,
                         std::int64_t K, const RunOptions& options) {
  check_run_inputs(problem, ledger, z0);
  if (!(eta_local > 0.0)) throw ValidationError("local SGDA needs eta > 0");
  if (H < 1) throw ValidationError("local SGDA needs H >= 1");
  if (K < 0) throw ValidationError("K must be >= 0");
  const int n = problem.num_devices();
  const int d = problem.dim();
  const FeasibleSet& set = problem.feasible_set();
  Vec z = projected(problem, z0);
  Tracker tr("local_sgda", ledger, z, K, options);
  for (std::int64_t k = 1; k <= K; ++k) {
    ledger.begin_round(false);
    ledger.charge_broadcast(d);
    Vec sum = Vec::Zero(d);
    for (int i = 0; i < n; ++i) {
      Vec zi = z;
      for (int t = 0; t < H; ++t) {
        zi -= eta_local * evaluate_device(problem, i, zi);
        project_in_place(set, zi);
      }
      ledger.charge_upload(i, d);
      sum += zi;
    }
    z = sum / static_cast<double>(n);
    if (tr.observe(k, z)) break;
  }
  return tr.finish(std::move(z));
}

}  // namespace tp

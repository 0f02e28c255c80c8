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

#ifndef TP_HARNESS_HPP_
#define TP_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tp/compressors.hpp"
#include "tp/constants.hpp"
#include "tp/problem.hpp"
#include "tp/solvers.hpp"

namespace tp {

inline constexpr const char* kOutputRootEnv = "THREEPILLARS_OUTPUT_ROOT";

enum class ProblemKind { kQuadSaddle, kRobustRegression, kLibsvm };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::kQuadSaddle;
  std::uint64_t seed = 1;
  int n = 8;
  // quad_saddle
  int dx = 20;
  int dy = 20;
  double mu0 = 1.0;
  double spread = 0.1;
  double coupling = 1.0;
  double offset_scale = 1.0;
  // robust_regression / libsvm
  int b = 100;
  int d = 50;
  double sigma = 0.01;
  double lambda = 0.1;
  double beta = 1.0;
  double D = 1.0;
  std::string noise_mode = "shared";
  std::filesystem::path path;  // libsvm
};

struct SolverConfig {
  std::string name;  // three_pillars | three_pillars_pp | extragradient | local_sgda
  std::int64_t K = 1000;
  std::optional<double> p;      // default min(1/n, 1/4)
  std::optional<int> H;         // unset: schedule H; local_sgda default 10
  std::optional<double> gamma;  // overrides
  std::optional<double> eta;    // unset: schedule / 1/(4L) / grid
  CompressorSpec compressor;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string text;  // verbatim snapshot
  std::filesystem::path source_dir;
  std::vector<SolverConfig> solvers;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output;
  double target = 1e-6;
  double stop_below = 0.0;
  std::int64_t log_every = 0;
  bool charge_setup = false;
  ProblemConfig problem;
  std::optional<double> constants_radius;
  int constants_samples = 1000;
  std::uint64_t constants_seed = 1;
  bool use_analytic = true;
  double reference_tol = 1e-12;
  std::int64_t reference_max_iters = 1000000;
};

ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& source_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// SHA-1 of "blob <size>\0" + content, as git hashes files.
std::string git_blob_hash(const std::string& content);

// Stable hash of the problem definition; artifacts are comparable only when
// these agree.
std::string problem_hash(const ExperimentConfig& cfg);

struct BuiltProblem {
  std::unique_ptr<VIProblem> problem;
  Vec z0;
};
BuiltProblem build_problem(const ExperimentConfig& cfg);

ConstantsEstimate constants_for(const ExperimentConfig& cfg,
                                const VIProblem& problem, const Vec& z0);

// Output directory with the output-root override applied.
std::filesystem::path resolve_output(const ExperimentConfig& cfg);

void write_trace_csv(std::ostream& out, const IterTrace& trace);

struct SeedResult {
  std::uint64_t seed = 0;
  std::string trace_file;
  std::int64_t iterations = 0;
  double final_dist_sq_rel = 0.0;
  double full_operators = 0.0;
  std::int64_t rounds = 0;
  double crossing = 0.0;  // full operators to reach the target, inf if never
  std::optional<double> eta;
};

struct SolverResult {
  std::string name;
  SolverParams params;  // three pillars variants
  std::vector<SeedResult> seeds;
};

struct RunArtifact {
  std::filesystem::path dir;
  std::string config_hash;
  std::string problem_hash;
  ConstantsEstimate constants;
  ReferenceSolution reference;
  std::vector<SolverResult> solvers;
};

// Builds the problem, fixes constants and the reference, runs every solver
// for every seed and writes config.ini, summary.json and the traces.
RunArtifact run_experiment(const ExperimentConfig& cfg, std::ostream* log);

// Full-operator units at which dist_sq_rel first reaches eps, interpolated
// linearly in log(dist_sq_rel). Infinity when never reached.
double crossing_point(const std::vector<double>& x,
                      const std::vector<double>& dist, double eps);

double median_of(std::vector<double> v);

struct CompareRow {
  std::string solver;
  int seeds = 0;
  double median = 0.0;  // inf when the median run never reaches eps
};

struct CompareRatio {
  std::string faster;
  std::string slower;
  double ratio = 0.0;  // slower.median / faster.median
};

struct CompareTable {
  double eps = 0.0;
  std::string problem_hash;
  std::vector<CompareRow> rows;
  std::vector<CompareRatio> ratios;
};

CompareTable compare(const std::vector<std::filesystem::path>& dirs,
                     double eps);
void print_compare(std::ostream& out, const CompareTable& table);

// log10 of the values drawn with an ASCII ramp, width columns.
std::string sparkline(const std::vector<double>& values, int width = 40);

}  // namespace tp

#endif  // TP_HARNESS_HPP_

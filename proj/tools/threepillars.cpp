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

// threepillars: run experiments, compare runs, inspect constants and
// LibSVM files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tp/dataset.hpp"
#include "tp/errors.hpp"
#include "tp/harness.hpp"
#include "tp/solvers.hpp"

namespace {

int cmd_run(const std::string& path) {
  const tp::ExperimentConfig cfg = tp::load_config(path);
  const tp::RunArtifact art = tp::run_experiment(cfg, &std::cout);
  std::cout << "wrote " << art.dir.string() << " (config " << art.config_hash
            << ")\n";
  std::vector<std::filesystem::path> dirs{art.dir};
  tp::print_compare(std::cout, tp::compare(dirs, cfg.target));
  return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, double eps) {
  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  tp::print_compare(std::cout, tp::compare(paths, eps));
  return 0;
}

void print_params(const char* label, const tp::SolverParams& s) {
  std::printf("%s: tau=%.17g gamma=%.17g eta=%.17g p=%.17g H=%d\n", label,
              s.tau, s.gamma, s.eta, s.p, s.H);
}

int cmd_constants(const std::string& path) {
  const tp::ExperimentConfig cfg = tp::load_config(path);
  const tp::BuiltProblem built = tp::build_problem(cfg);
  const tp::ConstantsEstimate est =
      tp::constants_for(cfg, *built.problem, built.z0);
  std::printf("problem %s n=%d dim=%d\n", built.problem->kind().c_str(),
              built.problem->num_devices(), built.problem->dim());
  std::printf("estimated: mu=%.17g L=%.17g delta=%.17g (%lld pairs)\n",
              est.estimated.mu, est.estimated.L, est.estimated.delta,
              static_cast<long long>(est.pairs));
  if (est.analytic) {
    std::printf("analytic:  mu=%.17g L=%.17g delta=%.17g\n", est.analytic->mu,
                est.analytic->L, est.analytic->delta);
  }
  const tp::ProblemConstants& c = est.effective();
  if (est.mu_nonpositive) {
    std::fprintf(stderr, "mu <= 0 on the region; schedule refused\n");
    return 3;
  }
  const int n = built.problem->num_devices();
  const double p = tp::default_sync_probability(n);
  print_params("schedule", tp::schedule_params(c.mu, c.L, c.delta, p));
  std::printf("optimal local steps: %d\n",
              tp::optimal_local_steps(c.L, c.delta, n));
  return 0;
}

int cmd_parse_libsvm(const std::string& path, const std::string& csv) {
  const tp::RegressionDataset data = tp::parse_libsvm(path);
  double lo = 0.0;
  double hi = 0.0;
  if (data.num_samples() > 0) {
    lo = data.labels.minCoeff();
    hi = data.labels.maxCoeff();
  }
  std::printf("%s: %d samples, %d features, labels in [%g, %g]\n",
              path.c_str(), data.num_samples(), data.num_features(), lo, hi);
  if (!csv.empty()) {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw tp::ValidationError("cannot write " + csv);
    tp::write_csv(out, data);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed variational inequality solvers"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config, "INI config")->required();

  std::vector<std::string> dirs;
  double eps = 1e-6;
  auto* cmp = app.add_subcommand("compare", "compare run directories");
  cmp->add_option("dirs", dirs, "run directories")->required();
  cmp->add_option("--eps", eps, "target dist_sq_rel")->required();

  auto* cst = app.add_subcommand("constants", "estimate mu, L, delta");
  cst->add_option("config", config, "INI config")->required();

  std::string file;
  std::string csv;
  auto* lsv = app.add_subcommand("parse-libsvm", "check a LibSVM file");
  lsv->add_option("file", file, "LibSVM text file")->required();
  lsv->add_option("--csv", csv, "write the dense dataset as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config);
    if (*cmp) return cmd_compare(dirs, eps);
    if (*cst) return cmd_constants(config);
    if (*lsv) return cmd_parse_libsvm(file, csv);
  } catch (const tp::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const tp::NotConvergedError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual()
              << ")\n";
    return 3;
  } catch (const tp::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

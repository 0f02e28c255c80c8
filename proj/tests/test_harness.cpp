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

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "tp/errors.hpp"
#include "tp/harness.hpp"

namespace tp {
namespace {

namespace fs = std::filesystem;

const double kInf = std::numeric_limits<double>::infinity();

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("tp_harness_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string quad_config(const fs::path& out, const std::string& extra = "",
                        int seed = 3) {
  return "[experiment]\nname = t\nsolvers = three_pillars, extragradient\n"
         "seeds = 1, 2\noutput = " +
         out.string() +
         "\ntarget = 1e-6\n" + extra +
         "\n[problem]\nkind = quad_saddle\nseed = " + std::to_string(seed) +
         "\nn = 8\ndx = 25\ndy = 25\n"
         "\n[three_pillars]\nK = 200\n\n[extragradient]\nK = 400\n";
}

TEST(GitHash, KnownBlobs) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"),
            "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Config, Defaults) {
  const auto cfg = parse_config("[problem]\nkind = robust_regression\n");
  EXPECT_EQ(cfg.solvers.size(), 4u);
  EXPECT_EQ(cfg.seeds, std::vector<std::uint64_t>{1});
  EXPECT_EQ(cfg.problem.n, 25);
  EXPECT_EQ(cfg.problem.b, 100);
  EXPECT_DOUBLE_EQ(cfg.problem.lambda, 0.1);
  EXPECT_DOUBLE_EQ(cfg.problem.beta, 1.0);
  EXPECT_DOUBLE_EQ(cfg.problem.D, 1.0);
  EXPECT_FALSE(cfg.solvers[0].p.has_value());
  EXPECT_FALSE(cfg.solvers[0].H.has_value());
}

TEST(Config, ScheduleKeywordsAndOverrides) {
  const auto cfg = parse_config(
      "[experiment]\nsolvers = three_pillars\n[problem]\nkind = quad_saddle\n"
      "[three_pillars]\np = schedule\nH = 12\nK = 7\ncompressor = randk\nk = 3\n");
  ASSERT_EQ(cfg.solvers.size(), 1u);
  EXPECT_FALSE(cfg.solvers[0].p.has_value());
  EXPECT_EQ(*cfg.solvers[0].H, 12);
  EXPECT_EQ(cfg.solvers[0].K, 7);
  EXPECT_EQ(cfg.solvers[0].compressor.kind, CompressorKind::kRandK);
  EXPECT_EQ(cfg.solvers[0].compressor.k, 3);
}

TEST(Config, Rejections) {
  const std::string base = "[problem]\nkind = quad_saddle\n";
  EXPECT_THROW(parse_config(base + "tpyo = 1\n"), ValidationError);
  EXPECT_THROW(parse_config("[problem]\nkind = cubic\n"), ValidationError);
  EXPECT_THROW(parse_config("[experiment]\nseeds = 1\n"), ValidationError);
  EXPECT_THROW(parse_config("[experiment]\nsolvers = adam\n" + base),
               ValidationError);
  EXPECT_THROW(parse_config("[experiment]\nseeds = x\n" + base),
               ValidationError);
  EXPECT_THROW(parse_config(base + "[three_pillars]\np = 1.5\n"),
               ValidationError);
  EXPECT_THROW(parse_config(base + "n = 0\n"), ValidationError);
  EXPECT_THROW(parse_config(base + "[constants]\nsamples = 10\n"),
               ValidationError);
  EXPECT_THROW(parse_config(base + "[bogus]\na = 1\n"), ValidationError);
  EXPECT_THROW(parse_config("[problem]\nkind = libsvm\n"), ValidationError);
  EXPECT_THROW(parse_config(base + "[three_pillars]\nK = 1.5\n"),
               ValidationError);
}

TEST(Crossing, Interpolation) {
  const std::vector<double> x{0, 10, 20, 30};
  const std::vector<double> d{1, 1e-2, 1e-4, 1e-6};
  EXPECT_NEAR(crossing_point(x, d, 1e-3), 15.0, 1e-12);
  EXPECT_NEAR(crossing_point(x, d, 1e-6), 30.0, 1e-9);
  EXPECT_EQ(crossing_point(x, d, 1e-7), kInf);
  EXPECT_EQ(crossing_point(x, d, 2.0), 0.0);
}

TEST(Crossing, MedianWithInfinity) {
  EXPECT_DOUBLE_EQ(median_of({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median_of({4, 1, 2, 3}), 2.5);
  EXPECT_EQ(median_of({1, kInf, kInf}), kInf);
  EXPECT_DOUBLE_EQ(median_of({1, 2, kInf}), 2.0);
}

TEST(Sparkline, ShapeAndRange) {
  const std::string s = sparkline({1, 1e-1, 1e-2, 1e-3}, 40);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.front(), '@');
  EXPECT_EQ(s.back(), '_');
  EXPECT_EQ(sparkline({}, 10), "");
}

TEST(Run, SmokeIsFastAndDeterministic) {
  TempDir tmp;
  const auto cfg = parse_config(quad_config(tmp.path() / "a"));
  const auto t0 = std::chrono::steady_clock::now();
  const auto art = run_experiment(cfg, nullptr);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  EXPECT_LT(secs, 10.0);
  EXPECT_EQ(art.config_hash, git_blob_hash(cfg.text));
  ASSERT_EQ(art.solvers.size(), 2u);
  for (const char* f : {"config.ini", "summary.json",
                        "trace_three_pillars_seed1.csv",
                        "trace_three_pillars_seed2.csv",
                        "trace_extragradient_seed1.csv"}) {
    EXPECT_TRUE(fs::exists(art.dir / f)) << f;
  }
  const std::string trace = slurp(art.dir / "trace_three_pillars_seed1.csv");
  const std::string head = trace.substr(0, trace.find('\n') + 1);
  EXPECT_EQ(head,
            "iter,rounds,uplink_floats_device_mean,uplink_full_operators,"
            "dist_sq_rel\n");
  EXPECT_EQ(slurp(art.dir / "config.ini"), cfg.text);

  // rerun into a second directory: identical bytes
  auto cfg2 = cfg;
  cfg2.output = tmp.path() / "b";
  run_experiment(cfg2, nullptr);
  for (const auto& e : fs::directory_iterator(art.dir)) {
    const auto name = e.path().filename();
    EXPECT_EQ(slurp(e.path()), slurp(tmp.path() / "b" / name)) << name;
  }
}

TEST(Run, SummaryContents) {
  TempDir tmp;
  const auto art =
      run_experiment(parse_config(quad_config(tmp.path() / "a")), nullptr);
  const auto j = nlohmann::json::parse(slurp(art.dir / "summary.json"));
  EXPECT_EQ(j["problem_hash"], art.problem_hash);
  EXPECT_EQ(j["problem"]["dim"], 50);
  EXPECT_TRUE(j["constants"].contains("analytic"));
  EXPECT_LE(j["reference"]["residual"].get<double>(), 1e-12);
  EXPECT_EQ(j["solvers"]["three_pillars"]["runs"].size(), 2u);
  EXPECT_TRUE(j["solvers"]["three_pillars"].contains("params"));
}

TEST(Run, OutputRootOverride) {
  TempDir tmp;
  ::setenv(kOutputRootEnv, tmp.path().c_str(), 1);
  const auto cfg = parse_config(quad_config("rel/out"));
  EXPECT_EQ(resolve_output(cfg), tmp.path() / "rel/out");
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(resolve_output(cfg), fs::path("rel/out"));
  const auto abs = parse_config(quad_config(tmp.path() / "x"));
  EXPECT_EQ(resolve_output(abs), tmp.path() / "x");
}

TEST(Run, NonMonotoneRegionAborts) {
  TempDir tmp;
  const std::string text =
      "[experiment]\nsolvers = extragradient\noutput = " +
      (tmp.path() / "a").string() +
      "\n[problem]\nkind = robust_regression\nn = 3\nb = 10\nd = 4\n"
      "beta = 0.01\nD = 10\n[constants]\nradius = 10\nsamples = 200\n";
  EXPECT_THROW(run_experiment(parse_config(text), nullptr), NumericalError);
}

TEST(Compare, RatiosAndInfinity) {
  TempDir tmp;
  const auto art =
      run_experiment(parse_config(quad_config(tmp.path() / "a")), nullptr);
  const auto table = compare({art.dir}, 1e-6);
  ASSERT_EQ(table.rows.size(), 2u);
  ASSERT_EQ(table.ratios.size(), 1u);
  EXPECT_EQ(table.ratios[0].faster, "three_pillars");
  EXPECT_GT(table.ratios[0].ratio, 1.0);
  const auto never = compare({art.dir}, 1e-300);
  for (const auto& r : never.rows) EXPECT_EQ(r.median, kInf);
  EXPECT_TRUE(never.ratios.empty());
  std::ostringstream out;
  print_compare(out, never);
  EXPECT_NE(out.str().find("inf"), std::string::npos);
}

TEST(Compare, SingleSolverHasNoRatios) {
  TempDir tmp;
  auto text = quad_config(tmp.path() / "a");
  text.replace(text.find("three_pillars, extragradient"), 28, "extragradient");
  const auto art = run_experiment(parse_config(text), nullptr);
  const auto table = compare({art.dir}, 1e-6);
  EXPECT_EQ(table.rows.size(), 1u);
  EXPECT_TRUE(table.ratios.empty());
}

TEST(Compare, MismatchedProblemsRejected) {
  TempDir tmp;
  const auto a =
      run_experiment(parse_config(quad_config(tmp.path() / "a")), nullptr);
  const auto b = run_experiment(
      parse_config(quad_config(tmp.path() / "b", "", 4)), nullptr);
  EXPECT_THROW(compare({a.dir, b.dir}, 1e-6), ValidationError);
  // same problem, different seeds list: merged
  const auto c = run_experiment(
      parse_config(quad_config(tmp.path() / "c", "stop_below = 1e-9")),
      nullptr);
  const auto table = compare({a.dir, c.dir}, 1e-6);
  EXPECT_EQ(table.rows[0].seeds, 4);
}

TEST(Compare, InsensitiveToLoggingGranularity) {
  TempDir tmp;
  const auto fine = run_experiment(
      parse_config(quad_config(tmp.path() / "fine", "log_every = 1")), nullptr);
  const auto coarse = run_experiment(
      parse_config(quad_config(tmp.path() / "coarse", "log_every = 2")),
      nullptr);
  const auto tf = compare({fine.dir}, 1e-6);
  const auto tc = compare({coarse.dir}, 1e-6);
  for (std::size_t k = 0; k < tf.rows.size(); ++k) {
    EXPECT_NEAR(tc.rows[k].median, tf.rows[k].median,
                0.01 * tf.rows[k].median)
        << tf.rows[k].solver;
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  write(tmp.path() / "ok.ini", quad_config(tmp.path() / "out"));
  EXPECT_EQ(run_cli("run " + (tmp.path() / "ok.ini").string()), 0);
  EXPECT_EQ(run_cli("compare " + (tmp.path() / "out").string() +
                    " --eps 1e-6"),
            0);
  EXPECT_EQ(run_cli("constants " + (tmp.path() / "ok.ini").string()), 0);
  write(tmp.path() / "bad.ini", "[problem]\nkind = nope\n");
  EXPECT_EQ(run_cli("run " + (tmp.path() / "bad.ini").string()), 2);
  EXPECT_EQ(run_cli("run /nonexistent.ini"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  write(tmp.path() / "x.svm", "1 1:0.5\n1 q:2\n");
  EXPECT_EQ(run_cli("parse-libsvm " + (tmp.path() / "x.svm").string()), 2);
  write(tmp.path() / "y.svm", "1 1:0.5\n-1 3:2\n");
  EXPECT_EQ(run_cli("parse-libsvm " + (tmp.path() / "y.svm").string() +
                    " --csv " + (tmp.path() / "y.csv").string()),
            0);
  EXPECT_EQ(slurp(tmp.path() / "y.csv"), "label,f1,f2,f3\n1,0.5,0,0\n-1,0,0,2\n");
  write(tmp.path() / "slow.ini",
        "[experiment]\nsolvers = extragradient\noutput = " +
            (tmp.path() / "s").string() +
            "\n[problem]\nkind = quad_saddle\n[reference]\nmax_iters = 3\n");
  EXPECT_EQ(run_cli("run " + (tmp.path() / "slow.ini").string()), 3);
}

}  // namespace
}  // namespace tp

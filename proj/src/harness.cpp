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

#include "tp/harness.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <regex>
#include <set>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "tp/dataset.hpp"
#include "tp/errors.hpp"
#include "tp/quad_saddle.hpp"
#include "tp/robust_regression.hpp"

namespace tp {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSolverNames = {
    "three_pillars", "three_pillars_pp", "extragradient", "local_sgda"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

class Section {
 public:
  Section(const pt::ptree& root, std::string name,
          std::set<std::string> allowed)
      : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) {
      tree_ = *child;
      present_ = true;
    }
    for (const auto& [key, value] : tree_) {
      if (!allowed.count(key)) {
        throw ValidationError("config: unknown key '" + key + "' in [" +
                              name_ + "]");
      }
    }
  }

  bool present() const { return present_; }

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) const {
    auto s = raw(key);
    if (!s) return std::nullopt;
    std::istringstream in(*s);
    T value{};
    in >> value;
    if (in.fail() || !in.eof()) {
      throw ValidationError("config: bad value '" + *s + "' for " + name_ +
                            "." + key);
    }
    return value;
  }

  template <class T>
  T get(const std::string& key, T def) const {
    return opt<T>(key).value_or(def);
  }

 private:
  std::string name_;
  pt::ptree tree_;
  bool present_ = false;
};

template <>
std::optional<std::string> Section::opt<std::string>(
    const std::string& key) const {
  return raw(key);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError("config: " + what);
}

ProblemKind parse_kind(const std::string& s) {
  if (s == "quad_saddle") return ProblemKind::kQuadSaddle;
  if (s == "robust_regression") return ProblemKind::kRobustRegression;
  if (s == "libsvm") return ProblemKind::kLibsvm;
  throw ValidationError("config: unknown problem kind '" + s + "'");
}

CompressorSpec parse_compressor(const std::string& s, int k) {
  CompressorSpec spec;
  spec.k = k;
  if (s == "permutation") {
    spec.kind = CompressorKind::kPermutation;
  } else if (s == "identity") {
    spec.kind = CompressorKind::kIdentity;
  } else if (s == "randk") {
    spec.kind = CompressorKind::kRandK;
  } else {
    throw ValidationError("config: unknown compressor '" + s + "'");
  }
  return spec;
}

// "schedule" and "grid" leave the value unset.
template <class T>
std::optional<T> auto_or(const Section& s, const std::string& key) {
  auto raw = s.raw(key);
  if (!raw || *raw == "schedule" || *raw == "grid" || *raw == "auto") {
    return std::nullopt;
  }
  return s.opt<T>(key);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text,
                              const fs::path& source_dir) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : root) {
    const bool known = section == "experiment" || section == "problem" ||
                       section == "constants" || section == "reference" ||
                       std::find(kSolverNames.begin(), kSolverNames.end(),
                                 section) != kSolverNames.end();
    require(known && body.data().empty(),
            "unknown or malformed section [" + section + "]");
  }

  ExperimentConfig cfg;
  cfg.text = text;
  cfg.source_dir = source_dir;

  const Section ex(root, "experiment",
                   {"name", "solvers", "seeds", "output", "target",
                    "stop_below", "log_every", "charge_setup"});
  cfg.name = ex.get<std::string>("name", cfg.name);
  cfg.output = ex.get<std::string>("output", "runs/" + cfg.name);
  cfg.target = ex.get("target", cfg.target);
  cfg.stop_below = ex.get("stop_below", cfg.stop_below);
  cfg.log_every = ex.get<std::int64_t>("log_every", 0);
  cfg.charge_setup = ex.get<std::string>("charge_setup", "false") == "true";
  require(cfg.target > 0.0, "experiment.target must be > 0");
  require(cfg.stop_below >= 0.0, "experiment.stop_below must be >= 0");
  require(cfg.log_every >= 0, "experiment.log_every must be >= 0");
  for (const auto& s : split_list(ex.get<std::string>("seeds", "1"))) {
    std::istringstream in(s);
    std::uint64_t v = 0;
    in >> v;
    require(!in.fail() && in.eof(), "bad seed '" + s + "'");
    cfg.seeds.push_back(v);
  }
  require(!cfg.seeds.empty(), "experiment.seeds must not be empty");

  const Section pr(root, "problem",
                   {"kind", "seed", "n", "dx", "dy", "mu0", "spread",
                    "coupling", "offset_scale", "b", "d", "sigma", "lambda",
                    "beta", "D", "noise_mode", "path"});
  require(pr.present(), "missing [problem] section");
  ProblemConfig& p = cfg.problem;
  p.kind = parse_kind(pr.get<std::string>("kind", "quad_saddle"));
  p.seed = pr.get<std::uint64_t>("seed", p.seed);
  p.n = pr.get("n", p.kind == ProblemKind::kQuadSaddle ? 8 : 25);
  p.dx = pr.get("dx", p.dx);
  p.dy = pr.get("dy", p.dy);
  p.mu0 = pr.get("mu0", p.mu0);
  p.spread = pr.get("spread", p.spread);
  p.coupling = pr.get("coupling", p.coupling);
  p.offset_scale = pr.get("offset_scale", p.offset_scale);
  p.b = pr.get("b", p.b);
  p.d = pr.get("d", p.d);
  p.sigma = pr.get("sigma", p.sigma);
  p.lambda = pr.get("lambda", p.lambda);
  p.beta = pr.get("beta", p.beta);
  p.D = pr.get("D", p.D);
  p.noise_mode = pr.get<std::string>("noise_mode", p.noise_mode);
  parse_noise_mode(p.noise_mode);
  if (auto path = pr.opt<std::string>("path")) p.path = *path;
  require(p.n >= 1, "problem.n must be >= 1");
  if (p.kind == ProblemKind::kLibsvm) {
    require(!p.path.empty(), "problem.path is required for kind = libsvm");
    if (p.path.is_relative()) p.path = source_dir / p.path;
  }

  const Section co(root, "constants",
                   {"radius", "samples", "seed", "use_analytic"});
  cfg.constants_radius = co.opt<double>("radius");
  cfg.constants_samples = co.get("samples", cfg.constants_samples);
  cfg.constants_seed = co.get<std::uint64_t>("seed", cfg.constants_seed);
  cfg.use_analytic = co.get<std::string>("use_analytic", "true") != "false";
  require(!cfg.constants_radius || *cfg.constants_radius > 0.0,
          "constants.radius must be > 0");
  require(cfg.constants_samples >= 100, "constants.samples must be >= 100");

  const Section re(root, "reference", {"tol", "max_iters"});
  cfg.reference_tol = re.get("tol", cfg.reference_tol);
  cfg.reference_max_iters =
      re.get<std::int64_t>("max_iters", cfg.reference_max_iters);
  require(cfg.reference_tol > 0.0, "reference.tol must be > 0");
  require(cfg.reference_max_iters >= 1, "reference.max_iters must be >= 1");

  const auto names = split_list(ex.get<std::string>(
      "solvers", "three_pillars,three_pillars_pp,extragradient,local_sgda"));
  require(!names.empty(), "experiment.solvers must not be empty");
  for (const auto& name : names) {
    require(std::find(kSolverNames.begin(), kSolverNames.end(), name) !=
                kSolverNames.end(),
            "unknown solver '" + name + "'");
    const Section s(root, name,
                    {"K", "p", "H", "gamma", "eta", "compressor", "k"});
    SolverConfig sc;
    sc.name = name;
    sc.K = s.get<std::int64_t>("K", sc.K);
    sc.p = auto_or<double>(s, "p");
    sc.H = auto_or<int>(s, "H");
    sc.gamma = auto_or<double>(s, "gamma");
    sc.eta = auto_or<double>(s, "eta");
    sc.compressor = parse_compressor(
        s.get<std::string>("compressor", "permutation"), s.get("k", 1));
    require(sc.K >= 0, name + ".K must be >= 0");
    require(!sc.p || (*sc.p > 0.0 && *sc.p <= 1.0), name + ".p out of range");
    require(!sc.H || *sc.H >= 1, name + ".H must be >= 1");
    require(!sc.gamma || *sc.gamma > 0.0, name + ".gamma must be > 0");
    require(!sc.eta || *sc.eta > 0.0, name + ".eta must be > 0");
    cfg.solvers.push_back(sc);
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty()
                                    ? fs::path(".")
                                    : path.parent_path());
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob =
      "blob " + std::to_string(content.size()) + std::string(1, '\0') +
      content;
  unsigned char md[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), md);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : md) {
    out += hex[c >> 4];
    out += hex[c & 15];
  }
  return out;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string problem_hash(const ExperimentConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  std::ostringstream s;
  s << std::setprecision(17);
  s << "n=" << p.n << '\n' << "seed=" << p.seed << '\n';
  switch (p.kind) {
    case ProblemKind::kQuadSaddle:
      s << "kind=quad_saddle\ndx=" << p.dx << "\ndy=" << p.dy
        << "\nmu0=" << p.mu0 << "\nspread=" << p.spread
        << "\ncoupling=" << p.coupling << "\noffset_scale=" << p.offset_scale
        << '\n';
      break;
    case ProblemKind::kRobustRegression:
      s << "kind=robust_regression\nb=" << p.b << "\nd=" << p.d
        << "\nsigma=" << p.sigma << '\n';
      break;
    case ProblemKind::kLibsvm:
      s << "kind=libsvm\ndata=" << git_blob_hash(read_file(p.path)) << '\n';
      break;
  }
  if (p.kind != ProblemKind::kQuadSaddle) {
    s << "lambda=" << p.lambda << "\nbeta=" << p.beta << "\nD=" << p.D
      << "\nnoise_mode=" << p.noise_mode << '\n';
  }
  return git_blob_hash(s.str());
}

BuiltProblem build_problem(const ExperimentConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  Rng rng = make_stream(p.seed, StreamTag::kData);
  BuiltProblem out;
  if (p.kind == ProblemKind::kQuadSaddle) {
    QuadSaddleOptions o;
    o.n = p.n;
    o.dx = p.dx;
    o.dy = p.dy;
    o.mu0 = p.mu0;
    o.spread = p.spread;
    o.coupling = p.coupling;
    o.offset_scale = p.offset_scale;
    out.problem = make_quad_saddle(o, rng);
  } else {
    RegressionDataset data;
    if (p.kind == ProblemKind::kRobustRegression) {
      data = gen_synthetic(p.n, p.b, p.d, p.sigma, rng);
    } else {
      data = parse_libsvm(p.path.string());
      if (data.num_samples() < p.n) {
        throw ValidationError("dataset has fewer samples than devices");
      }
      data.partition = uniform_partition(data.num_samples(), p.n);
    }
    RobustRegSpec spec;
    spec.lambda = p.lambda;
    spec.beta = p.beta;
    spec.radius = p.D;
    spec.noise_mode = parse_noise_mode(p.noise_mode);
    out.problem = std::make_unique<RobustRegression>(data, spec);
  }
  out.z0 = Vec::Zero(out.problem->dim());
  return out;
}

ConstantsEstimate constants_for(const ExperimentConfig& cfg,
                                const VIProblem& problem, const Vec& z0) {
  EstimateOptions o;
  o.samples = cfg.constants_samples;
  if (cfg.constants_radius) {
    o.radius = *cfg.constants_radius;
  } else if (cfg.problem.kind == ProblemKind::kQuadSaddle) {
    o.radius = default_region_radius(z0);
  } else {
    // the robust potential stops being convex-concave far from the origin
    o.radius = std::max(1.0, 2.0 * norm(z0));
  }
  Rng rng = make_stream(cfg.constants_seed, StreamTag::kConstants);
  ConstantsEstimate est = estimate_constants(problem, z0, o, rng);
  if (!cfg.use_analytic) {
    est.analytic.reset();
    est.mu_nonpositive = !(est.estimated.mu > 0.0);
  }
  return est;
}

fs::path resolve_output(const ExperimentConfig& cfg) {
  fs::path out = cfg.output;
  if (out.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
      out = fs::path(root) / out;
    }
  }
  return out;
}

void write_trace_csv(std::ostream& out, const IterTrace& trace) {
  out << "iter,rounds,uplink_floats_device_mean,uplink_full_operators,"
         "dist_sq_rel\n";
  char buf[256];
  for (const auto& r : trace.rows) {
    std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(r.iter),
                  static_cast<long long>(r.rounds),
                  r.uplink_floats_device_mean, r.uplink_full_operators,
                  r.dist_sq_rel);
    out << buf;
  }
}

double crossing_point(const std::vector<double>& x,
                      const std::vector<double>& dist, double eps) {
  if (x.size() != dist.size()) {
    throw ValidationError("crossing_point: column lengths differ");
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (dist[k] > eps) continue;
    if (k == 0) return x[0];
    const double d0 = dist[k - 1];
    const double d1 = dist[k];
    if (!(d1 > 0.0)) return x[k];
    const double t = (std::log(eps) - std::log(d0)) /
                     (std::log(d1) - std::log(d0));
    return x[k - 1] + t * (x[k] - x[k - 1]);
  }
  return std::numeric_limits<double>::infinity();
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  if (std::isinf(v[m])) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

namespace {

struct TraceColumns {
  std::vector<double> full_ops;
  std::vector<double> dist;
};

TraceColumns trace_columns(const IterTrace& t) {
  TraceColumns c;
  for (const auto& r : t.rows) {
    c.full_ops.push_back(r.uplink_full_operators);
    c.dist.push_back(r.dist_sq_rel);
  }
  return c;
}

double trace_crossing(const IterTrace& t, double eps) {
  const auto c = trace_columns(t);
  return crossing_point(c.full_ops, c.dist, eps);
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::ordered_json json_constants(const ProblemConstants& c) {
  return {{"mu", c.mu}, {"L", c.L}, {"delta", c.delta}};
}

SolverParams params_for(const SolverConfig& sc, const ProblemConstants& c,
                        int n) {
  const double p = sc.p.value_or(default_sync_probability(n));
  SolverParams params = sc.H ? local_steps_params(c.mu, c.L, c.delta, p, *sc.H)
                             : schedule_params(c.mu, c.L, c.delta, p);
  if (sc.gamma) {
    params.gamma = *sc.gamma;
    params.eta = 1.0 / (4.0 * (c.L + 1.0 / params.gamma));
  }
  if (sc.eta) params.eta = *sc.eta;
  params.K = sc.K;
  params.validate();
  return params;
}

}  // namespace

RunArtifact run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  RunArtifact art;
  art.dir = resolve_output(cfg);
  art.config_hash = git_blob_hash(cfg.text);
  art.problem_hash = problem_hash(cfg);

  BuiltProblem built = build_problem(cfg);
  const VIProblem& problem = *built.problem;
  const int n = problem.num_devices();
  const int d = problem.dim();
  art.constants = constants_for(cfg, problem, built.z0);
  const ProblemConstants c = art.constants.effective();
  if (art.constants.mu_nonpositive) {
    std::ostringstream m;
    m << "constants: mu = " << c.mu
      << " <= 0 on the estimation region; the problem is not strongly "
         "monotone there (shrink [constants] radius or raise beta)";
    throw NumericalError(m.str());
  }
  if (log) {
    *log << "problem " << problem.kind() << " n=" << n << " dim=" << d
         << " mu=" << c.mu << " L=" << c.L << " delta=" << c.delta
         << (art.constants.analytic ? " (analytic)" : " (estimated)") << '\n';
  }
  art.reference = reference_solution(problem, c.L, built.z0, cfg.reference_tol,
                                     cfg.reference_max_iters);
  if (log) {
    *log << "reference residual " << art.reference.residual << " after "
         << art.reference.iterations << " iterations\n";
  }

  RunOptions opts;
  opts.reference = art.reference.z;
  opts.stop_below = cfg.stop_below;
  opts.log_every = cfg.log_every;
  opts.charge_setup = cfg.charge_setup;

  fs::create_directories(art.dir);
  auto write_trace = [&](const std::string& file, const IterTrace& t) {
    std::ofstream out(art.dir / file, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + (art.dir / file).string());
    write_trace_csv(out, t);
  };

  for (const SolverConfig& sc : cfg.solvers) {
    SolverResult res;
    res.name = sc.name;
    const bool pillars =
        sc.name == "three_pillars" || sc.name == "three_pillars_pp";
    if (pillars) res.params = params_for(sc, c, n);
    for (std::uint64_t seed : cfg.seeds) {
      SeedResult sr;
      sr.seed = seed;
      IterTrace trace;
      std::optional<CommLedger> ledger;
      auto fresh = [&]() -> CommLedger& {
        ledger.emplace(Topology{n, d}, false);
        return *ledger;
      };
      if (sc.name == "three_pillars") {
        trace = three_pillars_run(problem, res.params, sc.compressor, fresh(),
                                  built.z0, seed, opts);
      } else if (sc.name == "three_pillars_pp") {
        trace = three_pillars_pp_run(problem, res.params, fresh(), built.z0,
                                     seed, opts);
      } else if (sc.name == "extragradient") {
        sr.eta = sc.eta.value_or(1.0 / (4.0 * c.L));
        trace = distributed_eg_run(problem, fresh(), built.z0, *sr.eta, sc.K,
                                   opts);
      } else {
        const int H = sc.H.value_or(10);
        std::vector<double> grid;
        if (sc.eta) {
          grid.push_back(*sc.eta);
        } else {
          for (double f : {0.25, 0.5, 1.0}) grid.push_back(f * c.mu / (c.L * c.L));
        }
        // keep the grid point that reaches the target with the least
        // communication, else the lowest final distance
        double best_cross = std::numeric_limits<double>::infinity();
        double best_final = std::numeric_limits<double>::infinity();
        for (double eta : grid) {
          IterTrace t = local_sgda_run(problem, fresh(), built.z0, eta, H,
                                       sc.K, opts);
          const double cross = trace_crossing(t, cfg.target);
          const double fin = t.rows.back().dist_sq_rel;
          const bool better = std::isfinite(cross) || std::isfinite(best_cross)
                                  ? cross < best_cross
                                  : fin < best_final;
          if (!sr.eta || better) {
            best_cross = cross;
            best_final = fin;
            sr.eta = eta;
            trace = std::move(t);
          }
        }
      }
      sr.trace_file = "trace_" + sc.name + "_seed" + std::to_string(seed) +
                      ".csv";
      write_trace(sr.trace_file, trace);
      const TraceRow& last = trace.rows.back();
      sr.iterations = trace.iterations;
      sr.final_dist_sq_rel = last.dist_sq_rel;
      sr.full_operators = last.uplink_full_operators;
      sr.rounds = last.rounds;
      sr.crossing = trace_crossing(trace, cfg.target);
      if (log) {
        const auto cols = trace_columns(trace);
        *log << sc.name << " seed " << seed << ": " << sr.iterations
             << " iters, dist_sq_rel " << sr.final_dist_sq_rel << ", "
             << sr.full_operators << " full operators  "
             << sparkline(cols.dist) << '\n';
      }
      res.seeds.push_back(sr);
    }
    art.solvers.push_back(std::move(res));
  }

  {
    std::ofstream out(art.dir / "config.ini", std::ios::binary);
    out << cfg.text;
  }
  nlohmann::ordered_json j;
  j["name"] = cfg.name;
  j["config_hash"] = art.config_hash;
  j["problem_hash"] = art.problem_hash;
  j["problem"] = {{"kind", problem.kind()}, {"n", n}, {"dim", d}};
  nlohmann::ordered_json cj;
  cj["estimated"] = json_constants(art.constants.estimated);
  if (art.constants.analytic) {
    cj["analytic"] = json_constants(*art.constants.analytic);
  }
  cj["effective"] = json_constants(c);
  cj["pairs"] = art.constants.pairs;
  j["constants"] = cj;
  j["reference"] = {{"residual", art.reference.residual},
                    {"iterations", art.reference.iterations},
                    {"norm", norm(art.reference.z)}};
  j["target"] = cfg.target;
  auto solvers = nlohmann::ordered_json::object();
  for (const auto& r : art.solvers) {
    nlohmann::ordered_json sj;
    if (r.name == "three_pillars" || r.name == "three_pillars_pp") {
      sj["params"] = {{"tau", r.params.tau}, {"gamma", r.params.gamma},
                      {"eta", r.params.eta}, {"p", r.params.p},
                      {"H", r.params.H},     {"K", r.params.K}};
    }
    std::vector<double> crossings;
    auto runs = nlohmann::ordered_json::array();
    for (const auto& s : r.seeds) {
      nlohmann::ordered_json rj = {
          {"seed", s.seed},
          {"trace", s.trace_file},
          {"iterations", s.iterations},
          {"final_dist_sq_rel", s.final_dist_sq_rel},
          {"full_operators", s.full_operators},
          {"rounds", s.rounds},
          {"full_operators_to_target", json_number(s.crossing)}};
      if (s.eta) rj["eta"] = *s.eta;
      runs.push_back(rj);
      crossings.push_back(s.crossing);
    }
    sj["runs"] = runs;
    sj["median_full_operators_to_target"] = json_number(median_of(crossings));
    solvers[r.name] = sj;
  }
  j["solvers"] = solvers;
  std::ofstream out(art.dir / "summary.json", std::ios::binary);
  out << j.dump(2) << '\n';
  return art;
}

namespace {

TraceColumns read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (trim(line) !=
      "iter,rounds,uplink_floats_device_mean,uplink_full_operators,"
      "dist_sq_rel") {
    throw ValidationError("unexpected trace header in " + path.string());
  }
  TraceColumns c;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 5) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": expected 5 columns");
    }
    try {
      c.full_ops.push_back(std::stod(f[3]));
      c.dist.push_back(std::stod(f[4]));
    } catch (const std::exception&) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": bad number");
    }
  }
  return c;
}

}  // namespace

CompareTable compare(const std::vector<fs::path>& dirs, double eps) {
  if (dirs.empty()) throw ValidationError("compare needs at least one run");
  if (!(eps > 0.0)) throw ValidationError("compare needs eps > 0");
  CompareTable table;
  table.eps = eps;
  static const std::regex name_re("trace_(.+)_seed([0-9]+)\\.csv");
  std::map<std::string, std::vector<double>> by_solver;
  std::vector<std::string> order;
  for (const auto& dir : dirs) {
    const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"),
                                               nullptr, false);
    if (summary.is_discarded() || !summary.contains("problem_hash")) {
      throw ValidationError("bad summary.json in " + dir.string());
    }
    const std::string hash = summary["problem_hash"].get<std::string>();
    if (table.problem_hash.empty()) {
      table.problem_hash = hash;
    } else if (hash != table.problem_hash) {
      throw ValidationError("runs solve different problems: " + dir.string() +
                            " has problem hash " + hash + ", expected " +
                            table.problem_hash);
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::smatch m;
      const std::string fname = f.filename().string();
      if (!std::regex_match(fname, m, name_re)) continue;
      const std::string solver = m[1];
      const auto cols = read_trace_csv(f);
      if (!by_solver.count(solver)) order.push_back(solver);
      by_solver[solver].push_back(crossing_point(cols.full_ops, cols.dist, eps));
    }
  }
  for (const auto& s : order) {
    table.rows.push_back(
        {s, static_cast<int>(by_solver[s].size()), median_of(by_solver[s])});
  }
  for (std::size_t a = 0; a < table.rows.size(); ++a) {
    for (std::size_t b = a + 1; b < table.rows.size(); ++b) {
      const auto& ra = table.rows[a];
      const auto& rb = table.rows[b];
      if (!std::isfinite(ra.median) || !std::isfinite(rb.median)) continue;
      if (ra.median <= 0.0 || rb.median <= 0.0) continue;
      if (ra.median <= rb.median) {
        table.ratios.push_back({ra.solver, rb.solver, rb.median / ra.median});
      } else {
        table.ratios.push_back({rb.solver, ra.solver, ra.median / rb.median});
      }
    }
  }
  return table;
}

void print_compare(std::ostream& out, const CompareTable& t) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "full operators per device to reach %g\n",
                t.eps);
  out << buf;
  for (const auto& r : t.rows) {
    if (std::isfinite(r.median)) {
      std::snprintf(buf, sizeof buf, "  %-18s seeds=%-3d %12.4f\n",
                    r.solver.c_str(), r.seeds, r.median);
    } else {
      std::snprintf(buf, sizeof buf, "  %-18s seeds=%-3d %12s\n",
                    r.solver.c_str(), r.seeds, "inf");
    }
    out << buf;
  }
  for (const auto& r : t.ratios) {
    std::snprintf(buf, sizeof buf, "  %s is %.3fx cheaper than %s\n",
                  r.faster.c_str(), r.ratio, r.slower.c_str());
    out << buf;
  }
}

std::string sparkline(const std::vector<double>& values, int width) {
  static const std::string ramp = "_.-:=+*#%@";
  std::vector<double> logs;
  for (double v : values) {
    logs.push_back(v > 0.0 ? std::log10(v) : -300.0);
  }
  if (logs.empty() || width < 1) return "";
  const double lo = *std::min_element(logs.begin(), logs.end());
  const double hi = *std::max_element(logs.begin(), logs.end());
  std::string out;
  const int cols = std::min<int>(width, static_cast<int>(logs.size()));
  for (int c = 0; c < cols; ++c) {
    const std::size_t k = (logs.size() - 1) * c / std::max(1, cols - 1);
    const double t = hi > lo ? (logs[k] - lo) / (hi - lo) : 0.0;
    out += ramp[static_cast<std::size_t>(std::lround(t * (ramp.size() - 1)))];
  }
  return out;
}

}  // namespace tp

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

#include "tp/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <system_error>

namespace tp {
namespace {

bool parse_real(std::string_view tok, double& out) {
  if (tok.empty()) return false;
  // from_chars rejects a leading '+', which LibSVM writers sometimes emit.
  if (tok.front() == '+') tok.remove_prefix(1);
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_index(std::string_view tok, long& out) {
  if (tok.empty()) return false;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct SparseRow {
  double label;
  std::vector<std::pair<int, double>> entries;
};

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::vector<int>> uniform_partition(int num_samples, int n) {
  if (n < 1) throw ValidationError("partition needs n >= 1");
  if (num_samples < n) {
    throw ValidationError("cannot split " + std::to_string(num_samples) +
                          " samples over " + std::to_string(n) + " devices");
  }
  std::vector<std::vector<int>> parts(n);
  const int base = num_samples / n;
  const int extra = num_samples % n;
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int size = base + (i < extra ? 1 : 0);
    parts[i].reserve(size);
    for (int k = 0; k < size; ++k) parts[i].push_back(next++);
  }
  return parts;
}

void validate_partition(const RegressionDataset& data) {
  if (data.features.rows() != data.labels.size()) {
    throw ValidationError("features and labels disagree on sample count");
  }
  std::vector<char> seen(data.num_samples(), 0);
  for (const auto& part : data.partition) {
    if (part.empty()) throw ValidationError("partition has an empty device");
    for (int j : part) {
      if (j < 0 || j >= data.num_samples() || seen[j]) {
        throw ValidationError("partition is not disjoint or out of range");
      }
      seen[j] = 1;
    }
  }
  for (char s : seen) {
    if (!s) throw ValidationError("partition does not cover all samples");
  }
}

RegressionDataset gen_synthetic(int n, int b, int d, double noise_sigma,
                                Rng& rng) {
  if (n < 1 || b < 1 || d < 1) {
    throw ValidationError("synthetic data needs n, b, d >= 1");
  }
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
  std::normal_distribution<double> nd(0.0, 1.0);
  RegressionDataset data;
  data.features.resize(static_cast<Eigen::Index>(n) * b, d);
  data.labels.resize(static_cast<Eigen::Index>(n) * b);
  for (int j = 0; j < b; ++j) {
    for (int k = 0; k < d; ++k) data.features(j, k) = nd(rng);
    data.labels[j] = nd(rng);
  }
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < b; ++j) {
      const int row = i * b + j;
      for (int k = 0; k < d; ++k) {
        data.features(row, k) = data.features(j, k) + noise_sigma * nd(rng);
      }
      data.labels[row] = data.labels[j] + noise_sigma * nd(rng);
    }
  }
  data.partition = uniform_partition(n * b, n);
  return data;
}

LibsvmParseError::LibsvmParseError(const std::string& source, int line,
                                   const std::string& message)
    : ValidationError(source + ":" + std::to_string(line) + ": " + message),
      line_(line) {}

RegressionDataset parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open LibSVM file '" + path + "'");
  return parse_libsvm(in, path);
}

RegressionDataset parse_libsvm(std::istream& in, const std::string& source) {
  std::vector<SparseRow> rows;
  int max_index = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < view.size()) {
      while (pos < view.size() && std::isspace(static_cast<unsigned char>(
                                      view[pos]))) {
        ++pos;
      }
      const std::size_t start = pos;
      while (pos < view.size() && !std::isspace(static_cast<unsigned char>(
                                      view[pos]))) {
        ++pos;
      }
      if (pos > start) tokens.push_back(view.substr(start, pos - start));
    }
    if (tokens.empty()) continue;

    SparseRow row;
    if (!parse_real(tokens[0], row.label)) {
      throw LibsvmParseError(source, lineno,
                             "label '" + std::string(tokens[0]) +
                                 "' is not a number");
    }
    long last = 0;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw LibsvmParseError(source, lineno,
                               "token '" + std::string(tok) +
                                   "' is not of the form index:value");
      }
      long idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx) || idx < 1) {
        throw LibsvmParseError(source, lineno,
                               "bad feature index in '" + std::string(tok) +
                                   "' (indices are 1-based integers)");
      }
      if (idx <= last) {
        throw LibsvmParseError(source, lineno,
                               "feature index " + std::to_string(idx) +
                                   " does not increase");
      }
      if (!parse_real(tok.substr(colon + 1), val)) {
        throw LibsvmParseError(source, lineno,
                               "bad feature value in '" + std::string(tok) +
                                   "'");
      }
      last = idx;
      row.entries.emplace_back(static_cast<int>(idx - 1), val);
    }
    max_index = std::max(max_index, static_cast<int>(last));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw LibsvmParseError(source, lineno, "no samples in LibSVM input");
  }

  RegressionDataset data;
  data.features = Mat::Zero(static_cast<Eigen::Index>(rows.size()),
                            std::max(max_index, 1));
  data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    data.labels[r] = rows[r].label;
    for (const auto& [k, v] : rows[r].entries) data.features(r, k) = v;
  }
  data.partition = uniform_partition(static_cast<int>(rows.size()), 1);
  return data;
}

void write_libsvm(std::ostream& out, const RegressionDataset& data) {
  for (int r = 0; r < data.num_samples(); ++r) {
    out << format_double(data.labels[r]);
    for (int k = 0; k < data.num_features(); ++k) {
      const double v = data.features(r, k);
      if (v != 0.0) out << ' ' << (k + 1) << ':' << format_double(v);
    }
    out << '\n';
  }
}

void write_csv(std::ostream& out, const RegressionDataset& data) {
  out << "label";
  for (int k = 0; k < data.num_features(); ++k) out << ",f" << (k + 1);
  out << '\n';
  for (int r = 0; r < data.num_samples(); ++r) {
    out << format_double(data.labels[r]);
    for (int k = 0; k < data.num_features(); ++k) {
      out << ',' << format_double(data.features(r, k));
    }
    out << '\n';
  }
}

}  // namespace tp

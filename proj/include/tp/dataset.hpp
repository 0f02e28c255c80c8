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

#ifndef TP_DATASET_HPP_
#define TP_DATASET_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "tp/errors.hpp"
#include "tp/linalg.hpp"
#include "tp/rng.hpp"

namespace tp {

struct RegressionDataset {
  Mat features;  // one sample per row
  Vec labels;
  // device -> row indices; disjoint, covering every row
  std::vector<std::vector<int>> partition;

  int num_samples() const { return static_cast<int>(labels.size()); }
  int num_features() const { return static_cast<int>(features.cols()); }
  int num_devices() const { return static_cast<int>(partition.size()); }
};

// Contiguous split of [0, num_samples) into n blocks whose sizes differ by
// at most one.
std::vector<std::vector<int>> uniform_partition(int num_samples, int n);

// Throws ValidationError unless the partition is disjoint and covering.
void validate_partition(const RegressionDataset& data);

// Server block (device 0): b samples with i.i.d. N(0, 1) features and labels.
// Device i >= 1 holds the same b samples plus N(0, noise_sigma^2) noise on
// every feature and label.
RegressionDataset gen_synthetic(int n, int b, int d, double noise_sigma,
                                Rng& rng);

class LibsvmParseError : public ValidationError {
 public:
  LibsvmParseError(const std::string& source, int line,
                   const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

// LibSVM text: "<label> <idx>:<value> ...", 1-based strictly increasing
// indices, '#' starts a comment. The dense width is the largest index seen.
// The returned dataset puts every sample on one device.
RegressionDataset parse_libsvm(const std::string& path);
RegressionDataset parse_libsvm(std::istream& in,
                               const std::string& source = "<stream>");

// Writes nonzero features as shortest round-trip decimals, which parse back to
// the same doubles.
void write_libsvm(std::ostream& out, const RegressionDataset& data);

// Header "label,f1,...,fd", one row per sample.
void write_csv(std::ostream& out, const RegressionDataset& data);

// Shortest round-trip decimal for a double.
std::string format_double(double v);

}  // namespace tp

#endif  // TP_DATASET_HPP_

/*
 Copyright 2026 The bfly Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bfly/geometry.hpp"

namespace bfly {

// Column side: equivalent sources in the source box. Row side: samples of
// the potential in the target box.
enum class Side { column, row };

struct BoxPair {
  DyadicKey target;
  DyadicKey source;

  friend bool operator==(const BoxPair&, const BoxPair&) = default;
  friend auto operator<=>(const BoxPair&, const BoxPair&) = default;
};

struct WeightBlock {
  BoxPair pair;
  Side side = Side::column;
  Eigen::VectorXcd values;
};

struct SourceSet {
  PointSet points;  // d x n
  Eigen::VectorXcd strengths;

  int dim() const { return static_cast<int>(points.rows()); }
  Eigen::Index size() const { return points.cols(); }
};

// Source indices per box at `level`, indexed by linear_index; original order
// is kept within each box.
std::vector<std::vector<int>> bin_sources(const SourceSet& sources, int level);

SourceSet subset(const SourceSet& sources, const std::vector<int>& indices);

// Counters for one (virtual) process. Costs are counted, never timed.
struct CostLedger {
  std::uint64_t flops = 0;
  std::uint64_t messages = 0;
  std::uint64_t entries_sent = 0;

  CostLedger& operator+=(const CostLedger& other) {
    flops += other.flops;
    messages += other.messages;
    entries_sent += other.entries_sent;
    return *this;
  }
};

struct CostParams {
  double alpha = 1e-6;   // seconds per message
  double beta = 1e-9;    // seconds per entry
  double gamma = 1e-10;  // seconds per flop
};

inline double modeled_seconds(const CostLedger& ledger, const CostParams& params) {
  return params.gamma * static_cast<double>(ledger.flops) +
         params.alpha * static_cast<double>(ledger.messages) +
         params.beta * static_cast<double>(ledger.entries_sent);
}

}  // namespace bfly

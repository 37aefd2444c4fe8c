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

// Deterministic simulation of the distributed butterfly: p virtual
// processes own regions of X and Y given by bisection stacks, exchange
// partial weights with bit-masked reduce-scatters, and count their costs.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bfly/butterfly.hpp"
#include "bfly/geometry.hpp"
#include "bfly/types.hpp"

namespace bfly {

// (linear_index(target), linear_index(source)) at the current stage.
using PairId = std::pair<std::uint64_t, std::uint64_t>;

struct VirtualProcess {
  int rank = 0;
  BisectionStacks stacks;
  std::map<PairId, WeightBlock> blocks;
  CostLedger ledger;
};

// Reduce-scatter over `team`: member i receives the sum over members of
// their i-th block, added in ascending rank order. contributions[j][i] is
// member j's block for member i. ledgers[j] is charged log2|team| messages
// and the entries of every block member j sends away.
std::vector<Eigen::VectorXcd> sum_scatter(std::span<const int> team,
                                          const std::vector<std::vector<Eigen::VectorXcd>>& contributions,
                                          std::span<CostLedger> ledgers);

struct TraceEvent {
  int stage = 0;
  int rank = 0;
  int team_bits = 0;
  std::uint64_t entries = 0;
};

struct SimulationOptions {
  int threads = 1;
  bool trace = false;
  // Called at every stage boundary 0..log2 N with the current processes.
  std::function<void(int, const std::vector<VirtualProcess>&)> observer;
};

struct SimulationResult {
  std::vector<VirtualProcess> processes;
  std::vector<TraceEvent> trace;  // ordered by (stage, rank)
  BackendPtr backend;

  // Field restricted to one rank's target boxes.
  PotentialField field(int rank) const;
  // Union over all ranks.
  PotentialField gather() const;
};

// Splits sources by the rank owning their leaf box under the initial
// source-side bisections, keeping the original order within each rank.
std::vector<SourceSet> scatter_sources(const SourceSet& sources, int log2n, int p);

SimulationResult simulate_parallel(const SourceSet& sources, BackendPtr backend, int p,
                                   const SimulationOptions& options = {});

// Sources already distributed; throws unscattered_sources if any lies
// outside its rank's region.
SimulationResult simulate_parallel(const std::vector<SourceSet>& scattered, BackendPtr backend,
                                   int p, const SimulationOptions& options = {});

// gamma r^2 (N^d/p) log2 N + (beta r N^d/p + alpha) log2 p.
double modeled_time(int r, int n, int d, int p, const CostParams& params);

struct LedgerRow {
  int rank = 0;
  std::uint64_t flops = 0;
  std::uint64_t messages = 0;
  std::uint64_t entries_sent = 0;
  double modeled_seconds = 0.0;
};

std::vector<LedgerRow> ledger_report(const std::vector<VirtualProcess>& processes,
                                     const CostParams& params);

// Rescales gamma and beta so the closed form reproduces the flop and entry
// counts of two simulated ledgers: `serial` from p = 1 and `spread` from a
// communicating run with p_spread processes. Message counts already match.
CostParams fit_cost_params(const LedgerRow& serial, const LedgerRow& spread, int r, int n, int d,
                           int p_spread, const CostParams& machine);

}  // namespace bfly

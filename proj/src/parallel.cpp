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
#include "bfly/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "bfly/error.hpp"
#include "bfly/parallel_for.hpp"

namespace bfly {

std::vector<Eigen::VectorXcd> sum_scatter(
    std::span<const int> team, const std::vector<std::vector<Eigen::VectorXcd>>& contributions,
    std::span<CostLedger> ledgers) {
  const std::size_t size = team.size();
  if (!is_pow2(size)) {
    throw Error(Errc::invalid_process_count, "team size " + std::to_string(size));
  }
  if (contributions.size() != size || ledgers.size() != size) {
    throw Error(Errc::ragged_blocks, "expected one contribution list per team member");
  }
  for (const auto& list : contributions) {
    if (list.size() != size) {
      throw Error(Errc::ragged_blocks, "every member must supply one block per member");
    }
  }
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return team[a] < team[b]; });

  std::vector<Eigen::VectorXcd> out(size);
  for (std::size_t i = 0; i < size; ++i) {
    const Eigen::Index len = contributions[0][i].size();
    for (std::size_t j = 0; j < size; ++j) {
      if (contributions[j][i].size() != len) {
        throw Error(Errc::ragged_blocks, "blocks for member " + std::to_string(team[i]) +
                                             " differ in length");
      }
    }
    out[i] = contributions[order[0]][i];
    for (std::size_t k = 1; k < size; ++k) out[i] += contributions[order[k]][i];
  }

  const auto bits = static_cast<std::uint64_t>(std::countr_zero(size));
  for (std::size_t j = 0; j < size; ++j) {
    ledgers[j].messages += bits;
    for (std::size_t i = 0; i < size; ++i) {
      if (i != j) ledgers[j].entries_sent += static_cast<std::uint64_t>(contributions[j][i].size());
    }
  }
  return out;
}

PotentialField SimulationResult::field(int rank) const {
  PotentialField f{backend, {}};
  for (const auto& [id, block] : processes.at(rank).blocks) f.blocks.emplace(id.first, block);
  return f;
}

PotentialField SimulationResult::gather() const {
  PotentialField f{backend, {}};
  for (const auto& proc : processes) {
    for (const auto& [id, block] : proc.blocks) f.blocks.emplace(id.first, block);
  }
  return f;
}

std::vector<SourceSet> scatter_sources(const SourceSet& sources, int log2n, int p) {
  const int d = sources.dim();
  const BisectionStacks stacks = init_bisection_stacks(d, p);
  std::vector<std::vector<int>> owned(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < sources.size(); ++j) {
    const DyadicKey leaf = locate(log2n, sources.points.col(j));
    owned[owner_bits(stacks.y, leaf)].push_back(static_cast<int>(j));
  }
  std::vector<SourceSet> out;
  out.reserve(owned.size());
  for (const auto& indices : owned) out.push_back(subset(sources, indices));
  return out;
}

namespace {

// Keys at `level` inside the region, in linear-index order.
std::vector<std::uint64_t> keys_in(const BoxRegion& region, int level) {
  const int d = region.dim();
  std::vector<std::uint32_t> lo(d);
  std::vector<std::uint32_t> count(d);
  std::uint64_t total = 1;
  for (int k = 0; k < d; ++k) {
    lo[k] = static_cast<std::uint32_t>(std::ldexp(region.lower[k], level));
    count[k] = static_cast<std::uint32_t>(std::ldexp(region.width[k], level));
    if (count[k] == 0) throw Error(Errc::unsupported, "region is finer than the tree level");
    total *= count[k];
  }
  std::vector<std::uint64_t> out;
  out.reserve(total);
  for (std::uint64_t i = 0; i < total; ++i) {
    DyadicKey key{level, std::vector<std::uint32_t>(d)};
    std::uint64_t rest = i;
    for (int k = 0; k < d; ++k) {
      key.coords[k] = lo[k] + static_cast<std::uint32_t>(rest % count[k]);
      rest /= count[k];
    }
    out.push_back(linear_index(key));
  }
  std::sort(out.begin(), out.end());
  return out;
}

int owner_of(const BisectionStacks& stacks, const BoxPair& pair) {
  return static_cast<int>(owner_bits(stacks.x, pair.target) | owner_bits(stacks.y, pair.source));
}

}  // namespace

SimulationResult simulate_parallel(const SourceSet& sources, BackendPtr backend, int p,
                                   const SimulationOptions& options) {
  const int d = backend->dim();
  const SourceSet all = sources.size() > 0 ? sources : SourceSet{PointSet(d, 0), {}};
  auto scattered = scatter_sources(all, backend->log2n(), p);
  return simulate_parallel(scattered, std::move(backend), p, options);
}

SimulationResult simulate_parallel(const std::vector<SourceSet>& scattered, BackendPtr backend,
                                   int p, const SimulationOptions& options) {
  const int d = backend->dim();
  const int levels = backend->log2n();
  const StageSplit split = stage_split(1 << levels, d, p);
  if (static_cast<int>(scattered.size()) != p) {
    throw Error(Errc::unscattered_sources, "expected one source list per process");
  }
  const int threads = std::max(1, options.threads);

  SimulationResult result;
  result.backend = backend;
  result.processes.resize(static_cast<std::size_t>(p));
  const BisectionStacks initial = init_bisection_stacks(d, p);
  for (int q = 0; q < p; ++q) {
    result.processes[q].rank = q;
    result.processes[q].stacks = initial;
    const SourceSet& own = scattered[q];
    if (own.size() > 0 && own.dim() != d) {
      throw Error(Errc::dimension_mismatch, "sources do not match the backend dimension");
    }
    const BoxRegion region = region_of(initial.y, q, d);
    for (Eigen::Index j = 0; j < own.size(); ++j) {
      if (!region.contains(own.points.col(j))) {
        throw Error(Errc::unscattered_sources, "source " + std::to_string(j) + " of rank " +
                                                   std::to_string(q) + " lies outside its region");
      }
    }
  }

  auto& procs = result.processes;
  parallel_for(procs.size(), threads, [&](std::size_t q, int) {
    VirtualProcess& proc = procs[q];
    const SourceSet& own = scattered[q];
    const SourceSet local = own.size() > 0 ? own : SourceSet{PointSet(d, 0), {}};
    const auto bins = bin_sources(local, levels);
    for (const std::uint64_t b : keys_in(region_of(proc.stacks.y, proc.rank, d), levels)) {
      WeightBlock block = backend->init(key_from_index(d, levels, b), local, bins[b], proc.ledger);
      backend->finish_stage(block, proc.ledger);
      proc.blocks.emplace(PairId{0, b}, std::move(block));
    }
  });
  if (options.observer) options.observer(0, procs);

  int moved = 0;
  for (int level = 0; level < levels; ++level) {
    // Local translations into partial sums over the children each rank holds.
    std::vector<std::map<PairId, WeightBlock>> partial(procs.size());
    parallel_for(procs.size(), threads, [&](std::size_t q, int) {
      VirtualProcess& proc = procs[q];
      std::map<PairId, std::vector<const WeightBlock*>> groups;
      for (const auto& [id, block] : proc.blocks) {
        const std::uint64_t b_parent = linear_index(parent(block.pair.source));
        for (const auto& kid : children(block.pair.target)) {
          groups[{linear_index(kid), b_parent}].push_back(&block);
        }
      }
      for (const auto& [id, kids] : groups) {
        const BoxPair out{key_from_index(d, level + 1, id.first),
                          key_from_index(d, levels - level - 1, id.second)};
        partial[q].emplace(id, backend->translate(out, kids, proc.ledger));
      }
    });

    if (level < split.local_stages) {
      for (std::size_t q = 0; q < procs.size(); ++q) procs[q].blocks = std::move(partial[q]);
    } else {
      const int bits = (level == split.local_stages && split.partial_bits != 0) ? split.partial_bits : d;
      for (auto& proc : procs) pop_push(proc.stacks, bits);
      const int lo = moved;
      moved += bits;
      const int team_size = 1 << bits;

      std::vector<std::map<PairId, WeightBlock>> next(procs.size());
      for (int leader = 0; leader < p; ++leader) {
        const std::vector<int> team = team_mask(leader, lo, moved, p);
        if (team.front() != leader) continue;

        // outgoing[j][i]: blocks member j sends to member i, in PairId order.
        std::vector<std::vector<std::vector<const WeightBlock*>>> outgoing(
            team_size, std::vector<std::vector<const WeightBlock*>>(team_size));
        for (int j = 0; j < team_size; ++j) {
          const VirtualProcess& proc = procs[team[j]];
          for (const auto& [id, block] : partial[team[j]]) {
            const int dest = owner_of(proc.stacks, block.pair);
            const auto it = std::find(team.begin(), team.end(), dest);
            if (it == team.end()) {
              throw std::logic_error("partial weights routed outside the bit-mask team");
            }
            outgoing[j][it - team.begin()].push_back(&block);
          }
        }
        std::vector<std::vector<Eigen::VectorXcd>> flat(team_size,
                                                        std::vector<Eigen::VectorXcd>(team_size));
        for (int j = 0; j < team_size; ++j) {
          for (int i = 0; i < team_size; ++i) {
            const auto& blocks = outgoing[j][i];
            const auto& reference = outgoing[0][i];
            if (blocks.size() != reference.size()) {
              throw Error(Errc::ragged_blocks, "team members hold different pair sets");
            }
            Eigen::Index len = 0;
            for (std::size_t k = 0; k < blocks.size(); ++k) {
              if (blocks[k]->pair != reference[k]->pair) {
                throw Error(Errc::ragged_blocks, "team members hold different pair sets");
              }
              len += blocks[k]->values.size();
            }
            Eigen::VectorXcd& buffer = flat[j][i];
            buffer.resize(len);
            Eigen::Index at = 0;
            for (const WeightBlock* block : blocks) {
              buffer.segment(at, block->values.size()) = block->values;
              at += block->values.size();
            }
          }
        }
        std::vector<CostLedger> ledgers(team_size);
        const auto summed = sum_scatter(team, flat, ledgers);
        for (int i = 0; i < team_size; ++i) {
          VirtualProcess& member = procs[team[i]];
          member.ledger += ledgers[i];
          if (options.trace) {
            result.trace.push_back({level, member.rank, bits, ledgers[i].entries_sent});
          }
          Eigen::Index at = 0;
          for (const WeightBlock* shape : outgoing[0][i]) {
            WeightBlock block{shape->pair, shape->side, summed[i].segment(at, shape->values.size())};
            at += shape->values.size();
            next[team[i]].emplace(PairId{linear_index(block.pair.target), linear_index(block.pair.source)},
                                  std::move(block));
          }
        }
      }
      for (std::size_t q = 0; q < procs.size(); ++q) procs[q].blocks = std::move(next[q]);
    }

    parallel_for(procs.size(), threads, [&](std::size_t q, int) {
      for (auto& [id, block] : procs[q].blocks) backend->finish_stage(block, procs[q].ledger);
    });
    if (options.observer) options.observer(level + 1, procs);
  }

  std::sort(result.trace.begin(), result.trace.end(), [](const TraceEvent& a, const TraceEvent& b) {
    return std::pair(a.stage, a.rank) < std::pair(b.stage, b.rank);
  });
  return result;
}

double modeled_time(int r, int n, int d, int p, const CostParams& params) {
  const double boxes = std::pow(static_cast<double>(n), d) / p;
  const double log_n = std::log2(static_cast<double>(n));
  const double log_p = std::log2(static_cast<double>(p));
  const double rr = static_cast<double>(r);
  return params.gamma * rr * rr * boxes * log_n + (params.beta * rr * boxes + params.alpha) * log_p;
}

std::vector<LedgerRow> ledger_report(const std::vector<VirtualProcess>& processes,
                                     const CostParams& params) {
  std::vector<LedgerRow> rows;
  rows.reserve(processes.size());
  for (const auto& proc : processes) {
    rows.push_back({proc.rank, proc.ledger.flops, proc.ledger.messages, proc.ledger.entries_sent,
                    modeled_seconds(proc.ledger, params)});
  }
  std::sort(rows.begin(), rows.end(), [](const LedgerRow& a, const LedgerRow& b) { return a.rank < b.rank; });
  return rows;
}

CostParams fit_cost_params(const LedgerRow& serial, const LedgerRow& spread, int r, int n, int d,
                           int p_spread, const CostParams& machine) {
  const double boxes = std::pow(static_cast<double>(n), d);
  const double rr = static_cast<double>(r);
  CostParams fitted = machine;
  fitted.gamma = machine.gamma * static_cast<double>(serial.flops) /
                 (rr * rr * boxes * std::log2(static_cast<double>(n)));
  fitted.beta = machine.beta * static_cast<double>(spread.entries_sent) /
                (rr * boxes / p_spread * std::log2(static_cast<double>(p_spread)));
  return fitted;
}

}  // namespace bfly

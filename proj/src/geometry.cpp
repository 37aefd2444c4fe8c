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
#include "bfly/geometry.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "bfly/error.hpp"

namespace bfly {

bool BoxRegion::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double hi = lower[k] + width[k];
    if (x[k] < lower[k]) return false;
    if (x[k] >= hi && !(hi == 1.0 && x[k] == 1.0)) return false;
  }
  return true;
}

bool BoxRegion::contains(const BoxRegion& other) const {
  if (other.dim() != dim()) return false;
  for (int k = 0; k < dim(); ++k) {
    if (other.lower[k] < lower[k]) return false;
    if (other.lower[k] + other.width[k] > lower[k] + width[k]) return false;
  }
  return true;
}

BoxRegion BoxRegion::unit(int d) {
  return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)};
}

BoxRegion DyadicKey::region() const {
  const double w = std::ldexp(1.0, -level);
  BoxRegion box{Eigen::VectorXd(dim()), Eigen::VectorXd::Constant(dim(), w)};
  for (int k = 0; k < dim(); ++k) box.lower[k] = coords[k] * w;
  return box;
}

DyadicKey root_key(int d) { return {0, std::vector<std::uint32_t>(d, 0)}; }

std::vector<DyadicKey> children(const DyadicKey& key) {
  const int d = key.dim();
  std::vector<DyadicKey> out;
  out.reserve(std::size_t{1} << d);
  for (int j = 0; j < (1 << d); ++j) {
    DyadicKey child{key.level + 1, key.coords};
    for (int k = 0; k < d; ++k) child.coords[k] = 2 * key.coords[k] + ((j >> k) & 1);
    out.push_back(std::move(child));
  }
  return out;
}

DyadicKey parent(const DyadicKey& key) {
  if (key.level == 0) throw Error(Errc::no_parent, "level-0 key is the whole domain");
  DyadicKey p{key.level - 1, key.coords};
  for (auto& c : p.coords) c /= 2;
  return p;
}

int child_slot(const DyadicKey& key) {
  int slot = 0;
  for (int k = 0; k < key.dim(); ++k) slot |= static_cast<int>(key.coords[k] & 1u) << k;
  return slot;
}

std::uint64_t linear_index(const DyadicKey& key) {
  std::uint64_t index = 0;
  for (int k = key.dim() - 1; k >= 0; --k) index = (index << key.level) | key.coords[k];
  return index;
}

DyadicKey key_from_index(int d, int level, std::uint64_t index) {
  DyadicKey key{level, std::vector<std::uint32_t>(d)};
  const std::uint64_t mask = (std::uint64_t{1} << level) - 1;
  for (int k = 0; k < d; ++k) {
    key.coords[k] = static_cast<std::uint32_t>(index & mask);
    index >>= level;
  }
  return key;
}

DyadicKey locate(int level, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const auto n = std::uint32_t{1} << level;
  DyadicKey key{level, std::vector<std::uint32_t>(y.size())};
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double scaled = std::ldexp(y[k], level);
    auto c = scaled <= 0.0 ? 0u : static_cast<std::uint32_t>(scaled);
    key.coords[k] = c >= n ? n - 1 : c;
  }
  return key;
}

Bisection BisectionStack::pop() {
  if (entries_.empty()) throw Error(Errc::stack_exhausted, "pop from empty bisection stack");
  Bisection b = entries_.back();
  entries_.pop_back();
  return b;
}

const Bisection& BisectionStack::top() const {
  if (entries_.empty()) throw Error(Errc::stack_exhausted, "top of empty bisection stack");
  return entries_.back();
}

int BisectionStack::depth(int dim) const {
  int count = 0;
  for (const auto& b : entries_) count += b.dim == dim;
  return count;
}

bool is_pow2(std::uint64_t n) { return std::has_single_bit(n); }

int log2_exact(std::uint64_t n) {
  if (!is_pow2(n)) {
    throw Error(Errc::invalid_process_count, std::to_string(n) + " is not a power of two");
  }
  return std::countr_zero(n);
}

BisectionStacks init_bisection_stacks(int d, int p) {
  const int bits = log2_exact(static_cast<std::uint64_t>(p));
  BisectionStacks stacks;
  for (int j = 0; j < bits; ++j) stacks.y.push({j % d, (bits - 1) - j});
  return stacks;
}

void pop_push(BisectionStacks& stacks, int count) {
  if (count > stacks.y.size()) {
    throw Error(Errc::stack_exhausted, "cannot move " + std::to_string(count) + " of " +
                                           std::to_string(stacks.y.size()) + " bisections");
  }
  for (int j = 0; j < count; ++j) stacks.x.push(stacks.y.pop());
}

BoxRegion region_of(const BisectionStack& stack, int rank, int d) {
  BoxRegion box = BoxRegion::unit(d);
  for (const auto& b : stack.entries()) {
    box.width[b.dim] *= 0.5;
    if ((rank >> b.bit) & 1) box.lower[b.dim] += box.width[b.dim];
  }
  return box;
}

std::uint32_t owner_bits(const BisectionStack& stack, const DyadicKey& key) {
  const int d = key.dim();
  std::vector<int> depth(d, 0);
  std::uint32_t bits = 0;
  for (const auto& b : stack.entries()) {
    const int k = b.dim;
    ++depth[k];
    if (depth[k] > key.level) {
      throw Error(Errc::unsupported, "key at level " + std::to_string(key.level) +
                                         " straddles a bisection in dimension " +
                                         std::to_string(k));
    }
    // Bit selecting the upper half at this depth is bit (level - depth) of the coordinate.
    if ((key.coords[k] >> (key.level - depth[k])) & 1u) bits |= 1u << b.bit;
  }
  return bits;
}

std::vector<int> team_mask(int q, int a, int b, int p) {
  const int free = ((1 << b) - 1) & ~((1 << a) - 1);
  const int fixed = q & ~free;
  std::vector<int> team;
  team.reserve(std::size_t{1} << (b - a));
  for (int n = 0; n < p; ++n) {
    if ((n & ~free) == fixed) team.push_back(n);
  }
  return team;
}

std::uint32_t bit_reverse(std::uint32_t q, int nbits) {
  std::uint32_t out = 0;
  for (int j = 0; j < nbits; ++j) out |= ((q >> j) & 1u) << (nbits - 1 - j);
  return out;
}

StageSplit stage_split(int n, int d, int p) {
  const int log_n = log2_exact(static_cast<std::uint64_t>(n));
  const int log_p = log2_exact(static_cast<std::uint64_t>(p));
  if (log_p > d * log_n) {
    throw Error(Errc::unsupported, "p = " + std::to_string(p) + " exceeds N^d");
  }
  const int local_bits = d * log_n - log_p;
  return {local_bits / d, (log_p + d - 1) / d, log_p % d};
}

}  // namespace bfly

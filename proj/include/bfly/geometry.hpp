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

// Dyadic geometry of the unit product space X = Y = [0,1]^d, plus the
// bisection-stack bookkeeping that assigns regions of X and Y to ranks.

#include <compare>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace bfly {

using Point = Eigen::VectorXd;
// d x n, one point per column.
using PointSet = Eigen::MatrixXd;

struct BoxRegion {
  Eigen::VectorXd lower;
  Eigen::VectorXd width;

  int dim() const { return static_cast<int>(lower.size()); }
  Point center() const { return lower + 0.5 * width; }
  // Half-open in every dimension, except that the upper face of the unit
  // cube is included so every point of [0,1]^d has a box.
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  bool contains(const BoxRegion& other) const;

  static BoxRegion unit(int d);
};

struct DyadicKey {
  int level = 0;
  std::vector<std::uint32_t> coords;

  int dim() const { return static_cast<int>(coords.size()); }
  BoxRegion region() const;

  friend bool operator==(const DyadicKey&, const DyadicKey&) = default;
  friend auto operator<=>(const DyadicKey&, const DyadicKey&) = default;
};

DyadicKey root_key(int d);

// 2^d children, child j has per-dimension bit (j >> k) & 1.
std::vector<DyadicKey> children(const DyadicKey& key);
DyadicKey parent(const DyadicKey& key);

// Dense numbering of the 2^{d*level} keys at one level, dimension 0 least
// significant.
std::uint64_t linear_index(const DyadicKey& key);
DyadicKey key_from_index(int d, int level, std::uint64_t index);

// Box at `level` holding y; boundary points go to the box with the larger
// coordinate, and the face at 1 to the last box.
DyadicKey locate(int level, const Eigen::Ref<const Eigen::VectorXd>& y);

// Index of `key` among children(parent(key)).
int child_slot(const DyadicKey& key);

struct Bisection {
  int dim = 0;
  int bit = 0;
  friend bool operator==(const Bisection&, const Bisection&) = default;
};

// Entries are ordered bottom to top.
class BisectionStack {
 public:
  BisectionStack() = default;
  explicit BisectionStack(std::vector<Bisection> entries) : entries_(std::move(entries)) {}

  void push(Bisection b) { entries_.push_back(b); }
  Bisection pop();
  const Bisection& top() const;
  bool empty() const { return entries_.empty(); }
  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<Bisection>& entries() const { return entries_; }

  // Number of bisections applied to dimension `dim`.
  int depth(int dim) const;

  friend bool operator==(const BisectionStack&, const BisectionStack&) = default;

 private:
  std::vector<Bisection> entries_;
};

struct BisectionStacks {
  BisectionStack x;
  BisectionStack y;
};

bool is_pow2(std::uint64_t n);
// Exact base-2 logarithm; throws invalid_process_count when n is not a
// power of two.
int log2_exact(std::uint64_t n);

BisectionStacks init_bisection_stacks(int d, int p);

// Moves `count` entries from the top of y to x.
void pop_push(BisectionStacks& stacks, int count);

BoxRegion region_of(const BisectionStack& stack, int rank, int d);

// Rank bits fixed by where `key` sits relative to each bisection in the stack.
// The key must be no coarser than the finest bisection in every dimension.
std::uint32_t owner_bits(const BisectionStack& stack, const DyadicKey& key);

// { n in [0,p) : bit_j(n) = bit_j(q) for all j outside [a,b) }, ascending.
std::vector<int> team_mask(int q, int a, int b, int p);

std::uint32_t bit_reverse(std::uint32_t q, int nbits);

struct StageSplit {
  int local_stages = 0;
  int comm_stages = 0;
  // Bits moved from the source stack to the target stack in the first
  // communicating stage when log2 p is not a multiple of d; zero otherwise.
  int partial_bits = 0;
};

StageSplit stage_split(int n, int d, int p);

}  // namespace bfly

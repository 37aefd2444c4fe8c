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
#include <span>
#include <string>

#include <Eigen/Core>

#include "bfly/types.hpp"

namespace bfly {

// A low-rank representation of the kernel blocks visited by the butterfly
// recursion. All blocks handled by one backend share its d and log2 N.
class LowRankBackend {
 public:
  virtual ~LowRankBackend() = default;

  virtual int dim() const = 0;
  virtual int log2n() const = 0;
  virtual std::string name() const = 0;

  // Weights for (X, source_box) from the sources at `indices`, all of which
  // lie in source_box.
  virtual WeightBlock init(const DyadicKey& source_box, const SourceSet& sources,
                           std::span<const int> indices, CostLedger& ledger) const = 0;

  // Contribution of the child blocks (A, B_n) to out = (A_c, B_p), where
  // A = parent(A_c) and B_p = parent(B_n). Any subset of the 2^d children
  // may be passed; the map is linear in them.
  virtual WeightBlock translate(const BoxPair& out, std::span<const WeightBlock* const> children,
                                CostLedger& ledger) const = 0;

  // Runs on every block once its stage is complete.
  virtual void finish_stage(WeightBlock& /*block*/, CostLedger& /*ledger*/) const {}

  // Potential of a final (leaf target, Y) block at x in the target box.
  virtual std::complex<double> evaluate(const WeightBlock& block,
                                        const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
};

}  // namespace bfly

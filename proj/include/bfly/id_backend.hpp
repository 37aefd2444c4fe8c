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

// General-purpose backend: equivalent sources selected by interpolative
// decompositions of sampled kernel blocks, with stage translations built by
// stacking the children's skeleton columns and recompressing.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "bfly/backend.hpp"
#include "bfly/lowrank_id.hpp"
#include "bfly/phase.hpp"

namespace bfly {

struct TranslationOperatorID {
  // r x (sum of child ranks); column block n acts on the weights of child n.
  Eigen::MatrixXcd matrix;
  std::vector<Eigen::Index> offsets;  // 2^d + 1 entries
  PointSet points;                    // d x r equivalent-source locations

  int rank() const { return static_cast<int>(matrix.rows()); }
  auto child_block(int slot) const {
    return matrix.middleCols(offsets[slot], offsets[slot + 1] - offsets[slot]);
  }
};

// child_points[n] holds the skeleton points of (A, B_n). Rows are the
// target samples of A_m. Throws RankOverflowError when rmax pivots do not
// reach tol.
TranslationOperatorID build_translation_id(std::span<const PointSet> child_points,
                                           const PointSet& rows, const PhaseEvaluator& phase,
                                           double tol, int rmax);

std::vector<std::vector<int>> bin_points(const PointSet& points, int level);

struct IdOptions {
  double tol = 1e-7;
  int rmax = 64;
};

class IdBackend final : public LowRankBackend {
 public:
  // Precomputes every ID for the given source positions, sampling kernel
  // rows at `target_rows`. The potential is accurate at those rows.
  IdBackend(PhasePtr phase, int log2n, const PointSet& source_points, const PointSet& target_rows,
            IdOptions options = {});

  int dim() const override { return phase_->dim(); }
  int log2n() const override { return log2n_; }
  std::string name() const override { return "id"; }

  WeightBlock init(const DyadicKey& source_box, const SourceSet& sources,
                   std::span<const int> indices, CostLedger& ledger) const override;
  WeightBlock translate(const BoxPair& out, std::span<const WeightBlock* const> children,
                        CostLedger& ledger) const override;
  std::complex<double> evaluate(const WeightBlock& block,
                                const Eigen::Ref<const Eigen::VectorXd>& x) const override;

  int max_rank() const { return max_rank_; }

 private:
  struct Initial {
    InterpolativeDecomposition<std::complex<double>> id;
    PointSet source_points;  // columns of the ID, in box order
    PointSet points;         // skeleton
  };

  const PointSet& points_of(int level, std::uint64_t pair_index) const;
  std::uint64_t pair_index(const BoxPair& pair) const;

  PhasePtr phase_;
  int log2n_;
  IdOptions options_;
  std::vector<Initial> initial_;
  // stages_[l - 1] holds the operators producing level-l pairs.
  std::vector<std::vector<TranslationOperatorID>> stages_;
  int max_rank_ = 0;
};

}  // namespace bfly

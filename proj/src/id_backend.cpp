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
#include "bfly/id_backend.hpp"

#include <string>

#include "bfly/error.hpp"

namespace bfly {

std::vector<std::vector<int>> bin_points(const PointSet& points, int level) {
  const int d = static_cast<int>(points.rows());
  std::vector<std::vector<int>> bins(std::size_t{1} << (d * level));
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    bins[linear_index(locate(level, points.col(j)))].push_back(static_cast<int>(j));
  }
  return bins;
}

namespace {

PointSet gather(const PointSet& points, const std::vector<int>& indices) {
  PointSet out(points.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = points.col(indices[j]);
  }
  return out;
}

PointSet skeleton(const PointSet& columns, const std::vector<int>& selected) {
  return gather(columns, selected);
}

}  // namespace

TranslationOperatorID build_translation_id(std::span<const PointSet> child_points,
                                           const PointSet& rows, const PhaseEvaluator& phase,
                                           double tol, int rmax) {
  const Eigen::Index d = rows.rows();
  TranslationOperatorID op;
  op.offsets.assign(child_points.size() + 1, 0);
  for (std::size_t n = 0; n < child_points.size(); ++n) {
    op.offsets[n + 1] = op.offsets[n] + child_points[n].cols();
  }
  const Eigen::Index width = op.offsets.back();
  PointSet stacked(d, width);
  for (std::size_t n = 0; n < child_points.size(); ++n) {
    stacked.middleCols(op.offsets[n], child_points[n].cols()) = child_points[n];
  }
  if (rows.cols() == 0 || width == 0) {
    op.matrix.resize(0, width);
    op.points.resize(d, 0);
    return op;
  }
  const Eigen::MatrixXcd k = phase.kernel_batch(rows, stacked);
  const auto qr = pivoted_qr(k, tol, rmax);
  if (qr.rank == rmax && qr.residual > tol) {
    throw RankOverflowError(qr.residual, "recompression needs more than " + std::to_string(rmax) +
                                             " columns; residual " +
                                             std::to_string(qr.residual));
  }
  const auto id = build_id(k, tol, rmax);
  op.matrix = id.interp_matrix;
  op.points = skeleton(stacked, id.column_indices);
  return op;
}

IdBackend::IdBackend(PhasePtr phase, int log2n, const PointSet& source_points,
                     const PointSet& target_rows, IdOptions options)
    : phase_(std::move(phase)), log2n_(log2n), options_(options) {
  const int d = phase_->dim();
  if (source_points.rows() != d || target_rows.rows() != d) {
    throw Error(Errc::dimension_mismatch, "point dimension does not match the phase");
  }
  const auto source_bins = bin_points(source_points, log2n);
  initial_.resize(source_bins.size());
  for (std::size_t b = 0; b < source_bins.size(); ++b) {
    Initial& init = initial_[b];
    init.source_points = gather(source_points, source_bins[b]);
    if (init.source_points.cols() == 0 || target_rows.cols() == 0) {
      init.id.interp_matrix.resize(0, init.source_points.cols());
      init.points.resize(d, 0);
      continue;
    }
    const Eigen::MatrixXcd k = phase_->kernel_batch(target_rows, init.source_points);
    init.id = build_id(k, options_.tol, options_.rmax);
    init.points = skeleton(init.source_points, init.id.column_indices);
    max_rank_ = std::max(max_rank_, init.id.rank());
  }

  const int fanout = 1 << d;
  stages_.resize(log2n);
  for (int level = 1; level <= log2n; ++level) {
    const auto row_bins = bin_points(target_rows, level);
    const std::uint64_t targets = std::uint64_t{1} << (d * level);
    const std::uint64_t sources = std::uint64_t{1} << (d * (log2n - level));
    auto& ops = stages_[level - 1];
    ops.resize(targets * sources);
    for (std::uint64_t a = 0; a < targets; ++a) {
      const DyadicKey target = key_from_index(d, level, a);
      const std::uint64_t a_parent = linear_index(parent(target));
      const PointSet rows = gather(target_rows, row_bins[a]);
      for (std::uint64_t b = 0; b < sources; ++b) {
        const auto kids = children(key_from_index(d, log2n - level, b));
        std::vector<PointSet> child_points;
        child_points.reserve(fanout);
        for (const auto& kid : kids) {
          const std::uint64_t child_sources = sources << d;
          child_points.push_back(points_of(level - 1, a_parent * child_sources + linear_index(kid)));
        }
        ops[a * sources + b] =
            build_translation_id(child_points, rows, *phase_, options_.tol, options_.rmax);
        max_rank_ = std::max(max_rank_, ops[a * sources + b].rank());
      }
    }
  }
}

const PointSet& IdBackend::points_of(int level, std::uint64_t pair_index) const {
  if (level == 0) return initial_[pair_index].points;
  return stages_[level - 1][pair_index].points;
}

std::uint64_t IdBackend::pair_index(const BoxPair& pair) const {
  const int d = dim();
  const std::uint64_t sources = std::uint64_t{1} << (d * (log2n_ - pair.target.level));
  return linear_index(pair.target) * sources + linear_index(pair.source);
}

WeightBlock IdBackend::init(const DyadicKey& source_box, const SourceSet& sources,
                            std::span<const int> indices, CostLedger& ledger) const {
  const Initial& init = initial_[linear_index(source_box)];
  if (static_cast<Eigen::Index>(indices.size()) != init.source_points.cols()) {
    throw Error(Errc::dimension_mismatch, "source box holds " + std::to_string(indices.size()) +
                                              " sources but the plan was built for " +
                                              std::to_string(init.source_points.cols()));
  }
  Eigen::VectorXcd g(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (sources.points.col(indices[j]) != init.source_points.col(static_cast<Eigen::Index>(j))) {
      throw Error(Errc::geometry_mismatch, "source positions differ from the precomputed plan");
    }
    g[static_cast<Eigen::Index>(j)] = sources.strengths[indices[j]];
  }
  ledger.flops += static_cast<std::uint64_t>(init.id.rank()) * indices.size();
  return {{root_key(dim()), source_box}, Side::column, equivalent_sources(init.id, g)};
}

WeightBlock IdBackend::translate(const BoxPair& out, std::span<const WeightBlock* const> children,
                                 CostLedger& ledger) const {
  const int level = out.target.level;
  if (level < 1 || level > log2n_) {
    throw Error(Errc::geometry_mismatch, "translation output level out of range");
  }
  const TranslationOperatorID& op = stages_[level - 1][pair_index(out)];
  const DyadicKey a = parent(out.target);
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(op.rank());
  for (const WeightBlock* child : children) {
    if (child->pair.target != a || parent(child->pair.source) != out.source) {
      throw Error(Errc::geometry_mismatch, "child block is not (parent(A_c), child(B_p))");
    }
    const int slot = child_slot(child->pair.source);
    const auto block = op.child_block(slot);
    if (block.cols() != child->values.size()) {
      throw Error(Errc::dimension_mismatch, "child weights do not match the translation operator");
    }
    acc.noalias() += block * child->values;
    ledger.flops += static_cast<std::uint64_t>(block.rows() * block.cols());
  }
  return {out, Side::column, std::move(acc)};
}

std::complex<double> IdBackend::evaluate(const WeightBlock& block,
                                         const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!block.pair.target.region().contains(x)) {
    throw Error(Errc::outside_box, "target point outside the block's box");
  }
  const PointSet& points = points_of(block.pair.target.level, pair_index(block.pair));
  const Eigen::MatrixXd xs = x;
  return phase_->kernel_batch(xs, points).row(0).transpose().cwiseProduct(block.values).sum();
}

}  // namespace bfly

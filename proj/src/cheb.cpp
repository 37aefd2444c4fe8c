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
#include "bfly/cheb.hpp"

#include <string>

#include "bfly/error.hpp"

namespace bfly {
namespace {

int ipow(int base, int exp) {
  int out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

// Row vector of exp(i sign Phi(x, points_j)).
Eigen::VectorXcd phase_factors(const PhaseEvaluator& phase, const Eigen::VectorXd& x,
                               const PointSet& points, double sign) {
  const Eigen::MatrixXd phi = phase.batch(x, points);
  return phi.row(0).transpose().unaryExpr([sign](double v) { return std::polar(1.0, sign * v); });
}

// exp(i sign Phi(points_j, y)) as a column.
Eigen::VectorXcd phase_factors_rows(const PhaseEvaluator& phase, const PointSet& points,
                                    const Eigen::VectorXd& y, double sign) {
  const Eigen::MatrixXd phi = phase.batch(points, y);
  return phi.col(0).unaryExpr([sign](double v) { return std::polar(1.0, sign * v); });
}

void check_children(const BoxPair& out, std::span<const WeightBlock* const> children, Side side,
                    int rank) {
  if (out.target.level == 0) {
    throw Error(Errc::geometry_mismatch, "translation output cannot target the root box");
  }
  const DyadicKey a = parent(out.target);
  for (const WeightBlock* child : children) {
    if (child->side != side) {
      throw Error(Errc::side_mismatch, "translation received a block of the wrong side");
    }
    if (child->pair.target != a || parent(child->pair.source) != out.source) {
      throw Error(Errc::geometry_mismatch, "child block is not (parent(A_c), child(B_p))");
    }
    if (child->values.size() != rank) {
      throw Error(Errc::dimension_mismatch, "child block has " +
                                                std::to_string(child->values.size()) +
                                                " weights, expected " + std::to_string(rank));
    }
  }
}

void count(CostLedger* ledger, std::uint64_t flops) {
  if (ledger != nullptr) ledger->flops += flops;
}

}  // namespace

ChebGrid cheb_grid(int q, const BoxRegion& box) {
  const int d = box.dim();
  const Eigen::VectorXd z = chebyshev_nodes(q);
  const int r = ipow(q, d);
  ChebGrid grid{q, box, PointSet(d, r)};
  for (int t = 0; t < r; ++t) {
    int rest = t;
    for (int k = 0; k < d; ++k) {
      const int tk = rest % q;
      rest /= q;
      grid.points(k, t) = box.lower[k] + 0.5 * box.width[k] * (1.0 + z[tk]);
    }
  }
  return grid;
}

Eigen::VectorXd lagrange_basis(const ChebGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const int d = grid.dim();
  const int q = grid.q;
  const Eigen::VectorXd z = chebyshev_nodes(q);
  const Eigen::VectorXd w = chebyshev_bary_weights(q);
  Eigen::VectorXd out = Eigen::VectorXd::Ones(1);
  for (int k = 0; k < d; ++k) {
    const double u = 2.0 * (y[k] - grid.box.lower[k]) / grid.box.width[k] - 1.0;
    // Nodes are stored mapped; compare in reference coordinates against the
    // mapped node to keep exact hits exact.
    Eigen::VectorXd basis;
    bool hit = false;
    for (int j = 0; j < q; ++j) {
      if (y[k] == grid.box.lower[k] + 0.5 * grid.box.width[k] * (1.0 + z[j])) {
        basis = Eigen::VectorXd::Unit(q, j);
        hit = true;
        break;
      }
    }
    if (!hit) basis = lagrange_basis_1d<double>(z, w, u);
    Eigen::VectorXd next(out.size() * q);
    for (int j = 0; j < q; ++j) next.segment(j * out.size(), out.size()) = out * basis[j];
    out = std::move(next);
  }
  return out;
}

double lagrange_eval(const ChebGrid& grid, int t, const Eigen::Ref<const Eigen::VectorXd>& y) {
  return lagrange_basis(grid, y)[t];
}

ChebContext::ChebContext(int d, int q)
    : d_(d), q_(q), r_(ipow(q, d)), nodes_(chebyshev_nodes(q)),
      weights_(chebyshev_bary_weights(q)) {
  for (int bit = 0; bit < 2; ++bit) {
    const double shift = bit == 0 ? -0.5 : 0.5;
    child_1d_[bit].resize(q, q);
    for (int t = 0; t < q; ++t) {
      child_1d_[bit].col(t) = lagrange_basis_1d<double>(nodes_, weights_, shift + 0.5 * nodes_[t]);
    }
  }
  const int slots = 1 << d;
  column_.resize(slots);
  row_.resize(slots);
  for (int slot = 0; slot < slots; ++slot) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
    for (int k = 0; k < d; ++k) {
      const Eigen::MatrixXd& c = child_1d_[(slot >> k) & 1];
      // Dimension k becomes the slower index.
      Eigen::MatrixXd next(m.rows() * q, m.cols() * q);
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
          next.block(i * m.rows(), j * m.cols(), m.rows(), m.cols()) = c(i, j) * m;
      m = std::move(next);
    }
    column_[slot] = m;
    row_[slot] = m.transpose();
  }
}

Eigen::VectorXcd ChebContext::apply_tensor(int slot, bool transpose,
                                           const Eigen::VectorXcd& in) const {
  Eigen::VectorXcd cur = in;
  Eigen::VectorXcd next(cur.size());
  Eigen::VectorXcd gathered(q_);
  int stride = 1;
  for (int k = 0; k < d_; ++k) {
    const Eigen::MatrixXd& c = child_1d_[(slot >> k) & 1];
    const int outer = r_ / (stride * q_);
    for (int hi = 0; hi < outer; ++hi) {
      for (int lo = 0; lo < stride; ++lo) {
        const int base = hi * stride * q_ + lo;
        for (int j = 0; j < q_; ++j) gathered[j] = cur[base + j * stride];
        const Eigen::VectorXcd mapped =
            transpose ? Eigen::VectorXcd(c.transpose() * gathered) : Eigen::VectorXcd(c * gathered);
        for (int i = 0; i < q_; ++i) next[base + i * stride] = mapped[i];
      }
    }
    std::swap(cur, next);
    stride *= q_;
  }
  return cur;
}

WeightBlock init_source_weights(const DyadicKey& target, const DyadicKey& source_box,
                                const SourceSet& sources, std::span<const int> indices,
                                const PhaseEvaluator& phase, const ChebContext& ctx,
                                CostLedger* ledger) {
  const BoxRegion box = source_box.region();
  const ChebGrid grid = cheb_grid(ctx.q(), box);
  const Eigen::VectorXd center = target.region().center();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(ctx.rank());
  for (const int j : indices) {
    const auto y = sources.points.col(j);
    if (!box.contains(y)) {
      throw Error(Errc::outside_box, "source " + std::to_string(j) + " lies outside its box");
    }
    const std::complex<double> g = std::polar(1.0, phase(center, y)) * sources.strengths[j];
    acc += lagrange_basis(grid, y).cast<std::complex<double>>() * g;
  }
  const Eigen::VectorXcd post = phase_factors(phase, center, grid.points, -1.0);
  count(ledger, static_cast<std::uint64_t>(indices.size()) * 2 * ctx.rank() + ctx.rank());
  return {{target, source_box}, Side::column, post.cwiseProduct(acc)};
}

WeightBlock translate_column(const BoxPair& out, std::span<const WeightBlock* const> children,
                             const PhaseEvaluator& phase, const ChebContext& ctx,
                             const ChebOptions& options, CostLedger* ledger) {
  check_children(out, children, Side::column, ctx.rank());
  const Eigen::VectorXd center = out.target.region().center();
  const std::uint64_t r = ctx.rank();
  const std::uint64_t apply_cost =
      options.tensor_translations ? static_cast<std::uint64_t>(ctx.dim()) * r * ctx.q() : r * r;
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(ctx.rank());
  for (const WeightBlock* child : children) {
    const ChebGrid grid = cheb_grid(ctx.q(), child->pair.source.region());
    const Eigen::VectorXcd pre =
        phase_factors(phase, center, grid.points, 1.0).cwiseProduct(child->values);
    const int slot = child_slot(child->pair.source);
    if (options.tensor_translations) {
      acc += ctx.apply_tensor(slot, false, pre);
    } else {
      acc.noalias() += ctx.column_matrix(slot) * pre;
    }
    count(ledger, apply_cost + r);
  }
  const ChebGrid parent_grid = cheb_grid(ctx.q(), out.source.region());
  count(ledger, r);
  return {out, Side::column, phase_factors(phase, center, parent_grid.points, -1.0).cwiseProduct(acc)};
}

WeightBlock middle_switch(const WeightBlock& block, const PhaseEvaluator& phase,
                          const ChebContext& ctx, CostLedger* ledger) {
  if (block.side != Side::column) {
    throw Error(Errc::side_mismatch, "middle switch expects a column-side block");
  }
  const ChebGrid targets = cheb_grid(ctx.q(), block.pair.target.region());
  const ChebGrid sources = cheb_grid(ctx.q(), block.pair.source.region());
  const Eigen::VectorXd source_center = block.pair.source.region().center();
  const Eigen::MatrixXcd kernel = phase.kernel_batch(targets.points, sources.points);
  const Eigen::VectorXcd samples = kernel * block.values;
  const std::uint64_t r = ctx.rank();
  count(ledger, 2 * r * r + r);
  return {block.pair, Side::row,
          phase_factors_rows(phase, targets.points, source_center, -1.0).cwiseProduct(samples)};
}

WeightBlock translate_row(const BoxPair& out, std::span<const WeightBlock* const> children,
                          const PhaseEvaluator& phase, const ChebContext& ctx,
                          const ChebOptions& options, CostLedger* ledger) {
  check_children(out, children, Side::row, ctx.rank());
  const ChebGrid grid = cheb_grid(ctx.q(), out.target.region());
  const int slot = child_slot(out.target);
  const std::uint64_t r = ctx.rank();
  const std::uint64_t apply_cost =
      options.tensor_translations ? static_cast<std::uint64_t>(ctx.dim()) * r * ctx.q() : r * r;
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(ctx.rank());
  for (const WeightBlock* child : children) {
    const Eigen::VectorXd child_center = child->pair.source.region().center();
    const Eigen::VectorXcd samples = options.tensor_translations
                                         ? ctx.apply_tensor(slot, true, child->values)
                                         : Eigen::VectorXcd(ctx.row_matrix(slot) * child->values);
    acc += phase_factors_rows(phase, grid.points, child_center, 1.0).cwiseProduct(samples);
    count(ledger, apply_cost + r);
  }
  const Eigen::VectorXd parent_center = out.source.region().center();
  count(ledger, r);
  return {out, Side::row,
          phase_factors_rows(phase, grid.points, parent_center, -1.0).cwiseProduct(acc)};
}

std::complex<double> evaluate_potential(const WeightBlock& block,
                                        const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const PhaseEvaluator& phase, const ChebContext& ctx) {
  if (block.side != Side::row) {
    throw Error(Errc::side_mismatch, "potential evaluation expects a row-side block");
  }
  const BoxRegion box = block.pair.target.region();
  if (!box.contains(x)) throw Error(Errc::outside_box, "target point outside the block's box");
  const ChebGrid grid = cheb_grid(ctx.q(), box);
  const Eigen::VectorXd center = block.pair.source.region().center();
  const std::complex<double> sum =
      lagrange_basis(grid, x).cast<std::complex<double>>().cwiseProduct(block.values).sum();
  return std::polar(1.0, phase(x, center)) * sum;
}

std::complex<double> evaluate_block(const WeightBlock& block,
                                    const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const PhaseEvaluator& phase, const ChebContext& ctx) {
  if (block.side == Side::row) return evaluate_potential(block, x, phase, ctx);
  const ChebGrid grid = cheb_grid(ctx.q(), block.pair.source.region());
  const Eigen::MatrixXd xs = x;
  return phase.kernel_batch(xs, grid.points).row(0).transpose().cwiseProduct(block.values).sum();
}

ChebBackend::ChebBackend(PhasePtr phase, int log2n, int q, ChebOptions options)
    : phase_(std::move(phase)),
      log2n_(log2n),
      switch_level_((log2n + 1) / 2),
      ctx_(phase_->dim(), q),
      options_(options) {
  if (q < 1) throw Error(Errc::usage, "q must be at least 1");
}

WeightBlock ChebBackend::init(const DyadicKey& source_box, const SourceSet& sources,
                              std::span<const int> indices, CostLedger& ledger) const {
  return init_source_weights(root_key(dim()), source_box, sources, indices, *phase_, ctx_,
                             &ledger);
}

WeightBlock ChebBackend::translate(const BoxPair& out, std::span<const WeightBlock* const> children,
                                   CostLedger& ledger) const {
  const int level = out.target.level - 1;
  if (level < switch_level_) {
    return translate_column(out, children, *phase_, ctx_, options_, &ledger);
  }
  return translate_row(out, children, *phase_, ctx_, options_, &ledger);
}

void ChebBackend::finish_stage(WeightBlock& block, CostLedger& ledger) const {
  if (block.side == Side::column && block.pair.target.level == switch_level_) {
    block = middle_switch(block, *phase_, ctx_, &ledger);
  }
}

std::complex<double> ChebBackend::evaluate(const WeightBlock& block,
                                           const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return evaluate_potential(block, x, *phase_, ctx_);
}

}  // namespace bfly

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

// Analytic low-rank backend for kernels exp(i Phi): tensor Chebyshev
// interpolation of the residual phase, in the source box (column side) for
// the first half of the stages and in the target box (row side) after the
// middle switch.

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bfly/backend.hpp"
#include "bfly/phase.hpp"
#include "bfly/types.hpp"

namespace bfly {

// First-kind Chebyshev points cos(pi (2k+1) / (2q)) on [-1, 1].
template <typename Real = double>
Eigen::Matrix<Real, Eigen::Dynamic, 1> chebyshev_nodes(int q) {
  Eigen::Matrix<Real, Eigen::Dynamic, 1> z(q);
  for (int k = 0; k < q; ++k) {
    z[k] = std::cos(std::numbers::pi_v<Real> * Real(2 * k + 1) / Real(2 * q));
  }
  return z;
}

// Barycentric weights for chebyshev_nodes(q), up to a common factor.
template <typename Real = double>
Eigen::Matrix<Real, Eigen::Dynamic, 1> chebyshev_bary_weights(int q) {
  Eigen::Matrix<Real, Eigen::Dynamic, 1> w(q);
  for (int k = 0; k < q; ++k) {
    const Real s = std::sin(std::numbers::pi_v<Real> * Real(2 * k + 1) / Real(2 * q));
    w[k] = (k % 2 == 0) ? s : -s;
  }
  return w;
}

// All q Lagrange polynomials for `nodes` evaluated at u.
template <typename Real>
Eigen::Matrix<Real, Eigen::Dynamic, 1> lagrange_basis_1d(
    const Eigen::Matrix<Real, Eigen::Dynamic, 1>& nodes,
    const Eigen::Matrix<Real, Eigen::Dynamic, 1>& weights, Real u) {
  const Eigen::Index q = nodes.size();
  Eigen::Matrix<Real, Eigen::Dynamic, 1> out(q);
  for (Eigen::Index k = 0; k < q; ++k) {
    if (u == nodes[k]) {
      out.setZero();
      out[k] = Real(1);
      return out;
    }
    out[k] = weights[k] / (u - nodes[k]);
  }
  return out / out.sum();
}

struct ChebGrid {
  int q = 1;
  BoxRegion box;
  PointSet points;  // d x q^d, dimension 0 fastest

  int dim() const { return box.dim(); }
  int size() const { return static_cast<int>(points.cols()); }
};

ChebGrid cheb_grid(int q, const BoxRegion& box);

// Tensor Lagrange basis function t of the grid at y.
double lagrange_eval(const ChebGrid& grid, int t, const Eigen::Ref<const Eigen::VectorXd>& y);
// All q^d basis functions at y.
Eigen::VectorXd lagrange_basis(const ChebGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& y);

// Interpolation matrices shared by every box of a (d, q) problem.
class ChebContext {
 public:
  ChebContext(int d, int q);

  int dim() const { return d_; }
  int q() const { return q_; }
  int rank() const { return r_; }

  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  // (t', t) -> l_{t'}(u_t) with u_t the child-`bit` nodes in parent coordinates.
  const Eigen::MatrixXd& child_interp_1d(int bit) const { return child_1d_[bit]; }
  // Dense q^d x q^d: parent basis evaluated at the nodes of child `slot`.
  const Eigen::MatrixXd& column_matrix(int slot) const { return column_[slot]; }
  // Dense q^d x q^d: child `slot` nodes interpolated from parent samples.
  const Eigen::MatrixXd& row_matrix(int slot) const { return row_[slot]; }

  // Applies column_matrix(slot) (or its transpose) one dimension at a time,
  // in O(d q^{d+1}).
  Eigen::VectorXcd apply_tensor(int slot, bool transpose, const Eigen::VectorXcd& in) const;

 private:
  int d_;
  int q_;
  int r_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  std::array<Eigen::MatrixXd, 2> child_1d_;
  std::vector<Eigen::MatrixXd> column_;
  std::vector<Eigen::MatrixXd> row_;
};

struct ChebOptions {
  bool tensor_translations = false;
};

// Column weights of (target, source_box): equivalent sources on the
// Chebyshev grid of source_box with the residual phase taken about the
// target center.
WeightBlock init_source_weights(const DyadicKey& target, const DyadicKey& source_box,
                                const SourceSet& sources, std::span<const int> indices,
                                const PhaseEvaluator& phase, const ChebContext& ctx,
                                CostLedger* ledger = nullptr);

WeightBlock translate_column(const BoxPair& out, std::span<const WeightBlock* const> children,
                             const PhaseEvaluator& phase, const ChebContext& ctx,
                             const ChebOptions& options = {}, CostLedger* ledger = nullptr);

WeightBlock middle_switch(const WeightBlock& block, const PhaseEvaluator& phase,
                          const ChebContext& ctx, CostLedger* ledger = nullptr);

WeightBlock translate_row(const BoxPair& out, std::span<const WeightBlock* const> children,
                          const PhaseEvaluator& phase, const ChebContext& ctx,
                          const ChebOptions& options = {}, CostLedger* ledger = nullptr);

// Row-side potential f(x) = exp(i Phi(x, y_B)) sum_t L_t(x) w_t.
std::complex<double> evaluate_potential(const WeightBlock& block,
                                        const Eigen::Ref<const Eigen::VectorXd>& x,
                                        const PhaseEvaluator& phase, const ChebContext& ctx);

// Either side; a column block is summed as point sources on its grid.
std::complex<double> evaluate_block(const WeightBlock& block,
                                    const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const PhaseEvaluator& phase, const ChebContext& ctx);

class ChebBackend final : public LowRankBackend {
 public:
  ChebBackend(PhasePtr phase, int log2n, int q, ChebOptions options = {});

  int dim() const override { return ctx_.dim(); }
  int log2n() const override { return log2n_; }
  std::string name() const override { return "cheb"; }
  int switch_level() const { return switch_level_; }
  const ChebContext& context() const { return ctx_; }
  const PhaseEvaluator& phase() const { return *phase_; }

  WeightBlock init(const DyadicKey& source_box, const SourceSet& sources,
                   std::span<const int> indices, CostLedger& ledger) const override;
  WeightBlock translate(const BoxPair& out, std::span<const WeightBlock* const> children,
                        CostLedger& ledger) const override;
  void finish_stage(WeightBlock& block, CostLedger& ledger) const override;
  std::complex<double> evaluate(const WeightBlock& block,
                                const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  PhasePtr phase_;
  int log2n_;
  int switch_level_;
  ChebContext ctx_;
  ChebOptions options_;
};

}  // namespace bfly

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
#include <doctest.h>

#include "bfly/butterfly.hpp"
#include "bfly/cheb.hpp"
#include "bfly/error.hpp"
#include "test_support.hpp"

using namespace bfly;
using bfly::testing::key;
using cplx = std::complex<double>;

namespace {

PhasePtr zero_phase(int d) {
  return std::make_shared<FunctionPhase>(
      "zero", d,
      [](const Eigen::Ref<const Eigen::VectorXd>&, const Eigen::Ref<const Eigen::VectorXd>&) {
        return 0.0;
      });
}

std::vector<int> all_indices(const SourceSet& s) {
  std::vector<int> out(static_cast<std::size_t>(s.size()));
  std::iota(out.begin(), out.end(), 0);
  return out;
}

// Sources placed uniformly inside `box`.
SourceSet sources_in(const BoxRegion& box, Eigen::Index count, std::uint64_t seed) {
  SourceSet s = bfly::testing::random_sources(box.dim(), count, seed);
  for (Eigen::Index j = 0; j < count; ++j) {
    s.points.col(j) = box.lower + box.width.cwiseProduct(s.points.col(j));
  }
  return s;
}

cplx direct(const SourceSet& s, const PhaseEvaluator& phase, const Eigen::VectorXd& x) {
  cplx acc = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) acc += phase.kernel(x, s.points.col(j)) * s.strengths[j];
  return acc;
}

}  // namespace

TEST_CASE("chebyshev grids") {
  const BoxRegion unit1 = BoxRegion::unit(1);
  const ChebGrid g1 = cheb_grid(1, unit1);
  CHECK(g1.size() == 1);
  CHECK(g1.points(0, 0) == doctest::Approx(0.5));

  const ChebGrid g2 = cheb_grid(2, unit1);
  const double lo = (1 - std::cos(std::numbers::pi / 4)) / 2;
  const double hi = (1 + std::cos(std::numbers::pi / 4)) / 2;
  CHECK(std::min(g2.points(0, 0), g2.points(0, 1)) == doctest::Approx(lo));
  CHECK(std::max(g2.points(0, 0), g2.points(0, 1)) == doctest::Approx(hi));
  CHECK(lo == doctest::Approx(0.14645).epsilon(1e-4));

  const ChebGrid g22 = cheb_grid(2, BoxRegion::unit(2));
  REQUIRE(g22.size() == 4);
  // Dimension 0 varies fastest.
  CHECK(g22.points(0, 0) == g2.points(0, 0));
  CHECK(g22.points(0, 1) == g2.points(0, 1));
  CHECK(g22.points(1, 0) == g22.points(1, 1));
  CHECK(g22.points(0, 2) == g2.points(0, 0));
  CHECK(g22.points(1, 2) == g2.points(0, 1));

  const ChebGrid g5 = cheb_grid(5, key(2, {1, 3}).region());
  for (int t = 0; t < g5.size(); ++t) {
    CHECK(key(2, {1, 3}).region().contains(g5.points.col(t)));
  }
}

TEST_CASE("lagrange basis is cardinal and reproduces polynomials") {
  const ChebGrid grid = cheb_grid(4, key(1, {1, 0}).region());
  for (int s = 0; s < grid.size(); ++s) {
    for (int t = 0; t < grid.size(); ++t) {
      CHECK(lagrange_eval(grid, t, grid.points.col(s)) == doctest::Approx(s == t ? 1.0 : 0.0));
    }
  }
  const ChebGrid one = cheb_grid(1, BoxRegion::unit(2));
  Eigen::Vector2d y(0.2, 0.9);
  CHECK(lagrange_eval(one, 0, y) == doctest::Approx(1.0));

  // Per-dimension degree 3 < q = 4.
  auto poly = [](const Eigen::VectorXd& v) {
    return 1.0 + v[0] - 2.0 * v[0] * v[0] * v[1] + std::pow(v[0], 3) * std::pow(v[1], 3);
  };
  const PointSet probes = bfly::testing::random_points(2, 20, 6);
  for (Eigen::Index i = 0; i < probes.cols(); ++i) {
    const Eigen::VectorXd yi = key(1, {1, 0}).region().lower +
                               0.5 * probes.col(i);
    const Eigen::VectorXd basis = lagrange_basis(grid, yi);
    double interp = 0.0;
    for (int t = 0; t < grid.size(); ++t) interp += basis[t] * poly(grid.points.col(t));
    CHECK(interp == doctest::Approx(poly(yi)).epsilon(1e-12));
  }
}

TEST_CASE("tensor translation path equals the dense matrices") {
  for (int d = 1; d <= 3; ++d) {
    const ChebContext ctx(d, 3);
    const Eigen::VectorXcd v = bfly::testing::random_sources(1, ctx.rank(), 12).strengths;
    for (int slot = 0; slot < (1 << d); ++slot) {
      const Eigen::VectorXcd dense = ctx.column_matrix(slot) * v;
      const Eigen::VectorXcd dense_t = ctx.row_matrix(slot) * v;
      CHECK((ctx.apply_tensor(slot, false, v) - dense).norm() < 1e-13);
      CHECK((ctx.apply_tensor(slot, true, v) - dense_t).norm() < 1e-13);
    }
  }
}

TEST_CASE("init_source_weights") {
  const ChebContext ctx(1, 8);
  const DyadicKey b = key(2, {1});
  const DyadicKey root = root_key(1);

  SUBCASE("no sources gives zero weights") {
    const SourceSet none{PointSet(1, 0), Eigen::VectorXcd(0)};
    const auto w = init_source_weights(root, b, none, {}, *zero_phase(1), ctx);
    CHECK(w.side == Side::column);
    CHECK(w.values.size() == ctx.rank());
    CHECK(w.values.isZero(0.0));
  }

  SUBCASE("a source on a node is cardinal") {
    const ChebGrid grid = cheb_grid(8, b.region());
    SourceSet one{grid.points.col(3), Eigen::VectorXcd::Constant(1, cplx(2, -1))};
    const std::vector<int> idx{0};
    const auto w = init_source_weights(root, b, one, idx, *zero_phase(1), ctx);
    for (int t = 0; t < ctx.rank(); ++t) {
      CHECK(std::abs(w.values[t] - (t == 3 ? cplx(2, -1) : cplx(0))) < 1e-14);
    }
  }

  SUBCASE("fourier point sources are reproduced") {
    // A leaf source box against the whole target domain is admissible.
    const auto phase = problem_phase(PhaseRegistry::with_builtins(), "fourier", 1, 16);
    const DyadicKey leaf = key(4, {5});
    const SourceSet s = sources_in(leaf.region(), 8, 3);
    const auto idx = all_indices(s);
    const auto w = init_source_weights(root, leaf, s, idx, *phase, ctx);
    const PointSet xs = bfly::testing::random_points(1, 10, 4);
    for (Eigen::Index i = 0; i < xs.cols(); ++i) {
      const Eigen::VectorXd x = xs.col(i);
      const cplx exact = direct(s, *phase, x);
      CHECK(std::abs(evaluate_block(w, x, *phase, ctx) - exact) <= 1e-6 * s.strengths.cwiseAbs().sum());
    }
  }

  SUBCASE("sources outside the box are rejected") {
    const SourceSet s = sources_in(key(2, {3}).region(), 2, 3);
    const auto idx = all_indices(s);
    try {
      init_source_weights(root, b, s, idx, *zero_phase(1), ctx);
      FAIL("expected outside_box");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::outside_box);
    }
  }
}

TEST_CASE("column translation conserves mass without phase") {
  const ChebContext ctx(1, 6);
  const auto phase = zero_phase(1);
  const DyadicKey a_c = key(1, {0});
  const DyadicKey b_p = key(1, {1});
  const auto kids = children(b_p);
  std::vector<WeightBlock> blocks;
  cplx mass = 0.0;
  for (std::size_t n = 0; n < kids.size(); ++n) {
    WeightBlock w{{root_key(1), kids[n]}, Side::column,
                  bfly::testing::random_sources(1, ctx.rank(), 20 + n).strengths};
    mass += w.values.sum();
    blocks.push_back(w);
  }
  const std::vector<const WeightBlock*> ptrs{&blocks[0], &blocks[1]};
  CostLedger ledger;
  const auto out = translate_column({a_c, b_p}, ptrs, *phase, ctx, {}, &ledger);
  CHECK(out.side == Side::column);
  CHECK(std::abs(out.values.sum() - mass) < 1e-12);

  const std::uint64_t r = static_cast<std::uint64_t>(ctx.rank());
  CHECK(ledger.flops > 0);
  CHECK(ledger.flops <= 2 * (2 * r * r + 2 * r));

  for (auto& b : blocks) b.values.setZero();
  CHECK(translate_column({a_c, b_p}, ptrs, *phase, ctx).values.isZero(0.0));

  CHECK_THROWS_AS(translate_row({a_c, b_p}, ptrs, *phase, ctx), Error);
}

TEST_CASE("row translation reproduces polynomial potentials without phase") {
  const int q = 4;
  const ChebContext ctx(2, q);
  const auto phase = zero_phase(2);
  const DyadicKey a = key(1, {0, 1});
  const DyadicKey a_c = children(a)[2];
  const DyadicKey b_p = key(1, {1, 1});
  const auto kids = children(b_p);
  const ChebGrid parent_grid = cheb_grid(q, a.region());
  auto poly = [](const Eigen::VectorXd& v, int n) {
    return cplx(1.0 + n * v[0] * v[1] * v[1], std::pow(v[0], 3) - n * v[1]);
  };
  std::vector<WeightBlock> blocks;
  for (std::size_t n = 0; n < kids.size(); ++n) {
    WeightBlock w{{a, kids[n]}, Side::row, Eigen::VectorXcd(ctx.rank())};
    for (int t = 0; t < ctx.rank(); ++t) w.values[t] = poly(parent_grid.points.col(t), static_cast<int>(n));
    blocks.push_back(w);
  }
  std::vector<const WeightBlock*> ptrs;
  for (const auto& b : blocks) ptrs.push_back(&b);

  for (bool tensor : {false, true}) {
    const auto out = translate_row({a_c, b_p}, ptrs, *phase, ctx, {tensor});
    CHECK(out.side == Side::row);
    const ChebGrid child_grid = cheb_grid(q, a_c.region());
    for (int t = 0; t < ctx.rank(); ++t) {
      cplx want = 0.0;
      for (int n = 0; n < 4; ++n) want += poly(child_grid.points.col(t), n);
      CHECK(std::abs(out.values[t] - want) < 1e-12);
    }
  }
  for (auto& b : blocks) b.values.setZero();
  CHECK(translate_row({a_c, b_p}, ptrs, *phase, ctx).values.isZero(0.0));
  CHECK_THROWS_AS(translate_column({a_c, b_p}, ptrs, *phase, ctx), Error);
}

TEST_CASE("middle switch preserves the potential") {
  const int n = 16;
  const auto phase = problem_phase(PhaseRegistry::with_builtins(), "fourier", 1, n);
  const ChebContext ctx(1, 8);
  const DyadicKey a = key(2, {2});
  const DyadicKey b = key(2, {1});
  const SourceSet s = sources_in(b.region(), 12, 5);
  const auto idx = all_indices(s);
  const auto column = init_source_weights(a, b, s, idx, *phase, ctx);
  CostLedger ledger;
  const auto row = middle_switch(column, *phase, ctx, &ledger);
  CHECK(row.side == Side::row);
  CHECK(ledger.flops >= static_cast<std::uint64_t>(ctx.rank() * ctx.rank()));

  const PointSet u = bfly::testing::random_points(1, 10, 6);
  const double scale = s.strengths.cwiseAbs().sum();
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    const Eigen::VectorXd x = a.region().lower + a.region().width.cwiseProduct(u.col(i));
    const cplx from_row = evaluate_potential(row, x, *phase, ctx);
    const cplx from_col = evaluate_block(column, x, *phase, ctx);
    CHECK(std::abs(from_row - from_col) <= 1e-6 * scale);
    CHECK(std::abs(from_row - direct(s, *phase, x)) <= 1e-5 * scale);
  }

  CHECK_THROWS_AS(middle_switch(row, *phase, ctx), Error);
  WeightBlock zero = column;
  zero.values.setZero();
  CHECK(middle_switch(zero, *phase, ctx).values.isZero(0.0));
}

TEST_CASE("middle switch with one node is a single multiplication") {
  const auto phase = problem_phase(PhaseRegistry::with_builtins(), "fourier", 1, 4);
  const ChebContext ctx(1, 1);
  const DyadicKey a = key(1, {1});
  const DyadicKey b = key(1, {0});
  WeightBlock column{{a, b}, Side::column, Eigen::VectorXcd::Constant(1, cplx(0.5, 2))};
  const auto row = middle_switch(column, *phase, ctx);
  const Eigen::VectorXd a0 = a.region().center();
  const Eigen::VectorXd b0 = b.region().center();
  const cplx want = phase->kernel(a0, b0) * std::polar(1.0, -(*phase)(a0, b0)) * cplx(0.5, 2);
  CHECK(std::abs(row.values[0] - want) < 1e-14);
}

TEST_CASE("evaluate_potential") {
  const auto phase = problem_phase(PhaseRegistry::with_builtins(), "fourier", 1, 8);
  const ChebContext ctx(1, 5);
  const DyadicKey a = key(3, {5});
  WeightBlock row{{a, root_key(1)}, Side::row,
                  bfly::testing::random_sources(1, ctx.rank(), 30).strengths};
  const ChebGrid grid = cheb_grid(5, a.region());
  const Eigen::VectorXd yc = root_key(1).region().center();
  for (int s = 0; s < ctx.rank(); ++s) {
    const Eigen::VectorXd x = grid.points.col(s);
    const cplx want = phase->kernel(x, yc) * row.values[s];
    CHECK(std::abs(evaluate_potential(row, x, *phase, ctx) - want) < 1e-13);
  }
  Eigen::VectorXd outside(1);
  outside << 0.1;
  try {
    evaluate_potential(row, outside, *phase, ctx);
    FAIL("expected outside_box");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::outside_box);
  }
  row.values.setZero();
  CHECK(evaluate_potential(row, grid.points.col(0), *phase, ctx) == cplx(0.0));
}

TEST_CASE("error decreases as the order grows") {
  const int n = 16;
  const auto phase = problem_phase(PhaseRegistry::with_builtins(), "fourier", 1, n);
  const SourceSet s = bfly::testing::random_sources(1, 128, 17);
  const PointSet targets = bfly::testing::random_points(1, 100, 18);
  const Eigen::VectorXcd exact = direct_apply(s, *phase, targets);
  std::vector<double> errors;
  for (int q : {4, 6, 8, 10}) {
    auto backend = std::make_shared<ChebBackend>(phase, 4, q);
    const auto result = butterfly_apply(s, backend);
    errors.push_back(rel_sup_error(result.field.evaluate(targets), exact));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    CAPTURE(i);
    CHECK(errors[i] <= 10.0 * errors[i - 1]);
  }
  CHECK(errors.back() < errors.front() / 100.0);
}

TEST_CASE("backend uses column translations before the switch and rows after") {
  const auto phase = problem_phase(PhaseRegistry::with_builtins(), "fourier", 1, 32);
  const ChebBackend odd(phase, 5, 4);
  CHECK(odd.switch_level() == 3);
  const ChebBackend even(phase, 4, 4);
  CHECK(even.switch_level() == 2);
}

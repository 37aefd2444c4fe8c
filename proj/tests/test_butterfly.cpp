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

#include <fftw3.h>

#include "bfly/butterfly.hpp"
#include "bfly/cheb.hpp"
#include "bfly/error.hpp"
#include "bfly/id_backend.hpp"
#include "test_support.hpp"

using namespace bfly;
using cplx = std::complex<double>;

namespace {

const PhaseRegistry& registry() {
  static const PhaseRegistry r = PhaseRegistry::with_builtins();
  return r;
}

// Unnormalized inverse DFT, sum_k exp(+2 pi i jk/n) g_k, by FFTW.
Eigen::VectorXcd fftw_backward(const Eigen::VectorXcd& g) {
  const int n = static_cast<int>(g.size());
  Eigen::VectorXcd in = g;
  Eigen::VectorXcd out(n);
  fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

double field_error(const SourceSet& s, PhasePtr phase, int n, const BackendConfig& config,
                   const PointSet& targets) {
  const auto result = butterfly_apply(s, phase, n, config);
  return rel_sup_error(result.field.evaluate(targets), direct_apply(s, *phase, targets));
}

}  // namespace

TEST_CASE("direct summation matches the FFT on uniform grids") {
  const int n = 16;
  const FourierPhase phase(1);
  SourceSet s{PointSet(1, n), bfly::testing::random_sources(1, n, 1).strengths};
  PointSet targets(1, n);
  for (int k = 0; k < n; ++k) {
    s.points(0, k) = k;
    targets(0, k) = static_cast<double>(k) / n;
  }
  const Eigen::VectorXcd direct = direct_apply(s, phase, targets);
  const Eigen::VectorXcd fft = fftw_backward(s.strengths);
  CHECK((direct - fft).cwiseAbs().maxCoeff() <= 1e-12 * fft.cwiseAbs().maxCoeff());
}

TEST_CASE("direct summation edge cases") {
  const PointSet targets = bfly::testing::random_points(2, 5, 2);
  const SourceSet none{PointSet(2, 0), Eigen::VectorXcd(0)};
  CHECK(direct_apply(none, FourierPhase(2), targets).isZero(0.0));

  const FunctionPhase zero("zero", 2, [](const auto&, const auto&) { return 0.0; });
  const SourceSet s = bfly::testing::random_sources(2, 30, 3);
  const Eigen::VectorXcd f = direct_apply(s, zero, targets);
  for (Eigen::Index i = 0; i < f.size(); ++i) CHECK(std::abs(f[i] - s.strengths.sum()) < 1e-13);
}

TEST_CASE("rel_sup_error") {
  Eigen::VectorXcd exact(3), approx(3);
  exact << cplx(1, 1), cplx(0, -2), 0.5;
  CHECK(rel_sup_error(exact, exact) == 0.0);
  CHECK(rel_sup_error(Eigen::VectorXcd::Zero(3), exact) == doctest::Approx(1.0));
  Eigen::VectorXcd a(2), b(2);
  a << 1.0 + 1e-3, 1.0;
  b << 1.0, 1.0;
  CHECK(rel_sup_error(a, b) == doctest::Approx(1e-3));
  try {
    rel_sup_error(a, Eigen::VectorXcd::Zero(2));
    FAIL("expected undefined_error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined_error);
  }
  CHECK_THROWS_AS(rel_sup_error(a, exact), Error);
}

TEST_CASE("fourier accuracy against direct summation") {
  const auto phase = problem_phase(registry(), "fourier", 1, 64);
  const SourceSet s = bfly::testing::random_sources(1, 256, 7);
  const PointSet targets = bfly::testing::random_points(1, 100, 8);
  BackendConfig config;
  config.q = 8;
  CHECK(field_error(s, phase, 64, config, targets) <= 1e-5);
  config.cheb.tensor_translations = true;
  CHECK(field_error(s, phase, 64, config, targets) <= 1e-5);
}

TEST_CASE("fourier accuracy in two and three dimensions") {
  const PointSet t2 = bfly::testing::random_points(2, 60, 9);
  CHECK(field_error(bfly::testing::random_sources(2, 400, 10),
                    problem_phase(registry(), "fourier", 2, 16), 16, BackendConfig{}, t2) <= 1e-5);
  const PointSet t3 = bfly::testing::random_points(3, 40, 11);
  BackendConfig c3;
  c3.q = 6;
  c3.cheb.tensor_translations = true;
  CHECK(field_error(bfly::testing::random_sources(3, 200, 12),
                    problem_phase(registry(), "fourier", 3, 4), 4, c3, t3) <= 1e-3);
}

TEST_CASE("zero strengths give a zero field") {
  SourceSet s = bfly::testing::random_sources(2, 50, 13);
  s.strengths.setZero();
  const auto result = butterfly_apply(s, problem_phase(registry(), "hyp-radon", 2, 8), 8, BackendConfig{});
  CHECK(result.field.blocks.size() == 64);
  CHECK(result.field.evaluate(bfly::testing::random_points(2, 20, 14)).isZero(0.0));
}

TEST_CASE("empty source sets are allowed") {
  const SourceSet none{PointSet(1, 0), Eigen::VectorXcd(0)};
  const auto result = butterfly_apply(none, problem_phase(registry(), "fourier", 1, 8), 8, BackendConfig{});
  CHECK(result.field.blocks.size() == 8);
  CHECK(result.field.evaluate(bfly::testing::random_points(1, 10, 15)).isZero(0.0));
}

TEST_CASE("a single unit source gives the kernel") {
  const auto phase = problem_phase(registry(), "gen-radon", 3, 4);
  SourceSet s{PointSet(3, 1), Eigen::VectorXcd::Ones(1)};
  s.points.col(0) << 0.3, 0.71, 0.05;
  const PointSet xs = bfly::testing::random_points(3, 20, 16);
  const auto result = butterfly_apply(s, phase, 4, BackendConfig{});
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    CHECK(std::abs(result.field(xs.col(i)) - phase->kernel(xs.col(i), s.points.col(0))) <= 1e-3);
  }
}

TEST_CASE("one box runs init and evaluation only") {
  const auto phase = problem_phase(registry(), "fourier", 1, 1);
  const SourceSet s = bfly::testing::random_sources(1, 10, 19);
  const PointSet xs = bfly::testing::random_points(1, 10, 20);
  BackendConfig config;
  config.q = 12;
  CHECK(field_error(s, phase, 1, config, xs) <= 1e-8);
}

TEST_CASE("the engine is linear in the strengths") {
  const auto phase = problem_phase(registry(), "hyp-radon", 2, 8);
  SourceSet s1 = bfly::testing::random_sources(2, 100, 21);
  SourceSet s2 = s1;
  s2.strengths = bfly::testing::random_sources(2, 100, 22).strengths;
  SourceSet sum = s1;
  sum.strengths = s1.strengths + s2.strengths;
  BackendConfig config;
  config.q = 5;
  const PointSet xs = bfly::testing::random_points(2, 30, 23);
  const auto f1 = butterfly_apply(s1, phase, 8, config).field.evaluate(xs);
  const auto f2 = butterfly_apply(s2, phase, 8, config).field.evaluate(xs);
  const auto f12 = butterfly_apply(sum, phase, 8, config).field.evaluate(xs);
  CHECK((f12 - f1 - f2).cwiseAbs().maxCoeff() <= 1e-12 * f12.cwiseAbs().maxCoeff());
}

TEST_CASE("cheb and id backends agree in one dimension") {
  for (int n : {8, 16, 32}) {
    const auto phase = problem_phase(registry(), "fourier", 1, n);
    const SourceSet s = bfly::testing::random_sources(1, 4 * n, 24);
    const PointSet xs = bfly::testing::random_points(1, 50, 25);
    BackendConfig cheb;
    BackendConfig id;
    id.kind = BackendKind::id;
    id.target_rows = xs;
    const auto fc = butterfly_apply(s, phase, n, cheb).field.evaluate(xs);
    const auto fi = butterfly_apply(s, phase, n, id).field.evaluate(xs);
    const auto exact = direct_apply(s, *phase, xs);
    CAPTURE(n);
    CHECK(rel_sup_error(fi, exact) <= 1e-5);
    CHECK(rel_sup_error(fc, fi) <= 1e-5);
  }
}

TEST_CASE("id backend reaches its tolerance on the hyperbolic Radon phase") {
  const auto phase = problem_phase(registry(), "hyp-radon", 2, 8);
  const SourceSet s = bfly::testing::random_sources(2, 256, 26);
  const PointSet xs = bfly::testing::random_points(2, 100, 27);
  BackendConfig config;
  config.kind = BackendKind::id;
  config.target_rows = xs;
  config.id.tol = 1e-8;
  CHECK(field_error(s, phase, 8, config, xs) <= 1e-6);
}

TEST_CASE("id backend rejects sources it was not planned for") {
  const auto phase = problem_phase(registry(), "fourier", 1, 8);
  const SourceSet s = bfly::testing::random_sources(1, 20, 28);
  BackendConfig config;
  config.kind = BackendKind::id;
  config.target_rows = bfly::testing::random_points(1, 10, 29);
  const BackendPtr backend = make_backend(phase, 8, s, config);
  CHECK_THROWS_AS(butterfly_apply(bfly::testing::random_sources(1, 20, 30), backend), Error);
}

TEST_CASE("cheb flop ledger follows r^2 N log N") {
  std::vector<double> ratios;
  const int q = 8;
  for (int log2n : {4, 5, 6}) {
    const int n = 1 << log2n;
    const auto phase = problem_phase(registry(), "fourier", 1, n);
    const auto result = butterfly_apply(bfly::testing::random_sources(1, n, 31), phase, n, BackendConfig{});
    ratios.push_back(static_cast<double>(result.ledger.flops) / (q * q * n * log2n));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo <= 4.0);
}

TEST_CASE("threaded engine runs are bit-identical to serial ones") {
  const auto phase = problem_phase(registry(), "fourier", 2, 16);
  const SourceSet s = bfly::testing::random_sources(2, 256, 32);
  const BackendPtr backend = make_backend(phase, 16, s, BackendConfig{});
  const auto serial = butterfly_apply(s, backend, {1});
  const auto threaded = butterfly_apply(s, backend, {4});
  CHECK(serial.ledger.flops == threaded.ledger.flops);
  REQUIRE(serial.field.blocks.size() == threaded.field.blocks.size());
  for (const auto& [k, block] : serial.field.blocks) {
    CHECK(block.values == threaded.field.blocks.at(k).values);
  }
}

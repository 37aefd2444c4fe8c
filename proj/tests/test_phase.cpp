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

#include "bfly/error.hpp"
#include "bfly/phase.hpp"
#include "test_support.hpp"

using namespace bfly;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("fourier phase") {
  CHECK(phase_fourier(vec({0.0}), vec({0.7})) == 0.0);
  CHECK(phase_fourier(vec({0.5}), vec({0.5})) == doctest::Approx(std::numbers::pi / 2));
  const Eigen::VectorXd x = vec({0.2, 0.9, 0.4});
  const Eigen::VectorXd y = vec({0.6, 0.1, 0.3});
  CHECK(phase_fourier(x, y) == phase_fourier(y, x));
}

TEST_CASE("hyperbolic Radon phase") {
  CHECK(phase_hyp_radon(vec({0.4, 0.8}), vec({0.3, 0.0})) == 0.0);
  for (double h : {0.0, 0.3, 1.0}) {
    CHECK(phase_hyp_radon(vec({1.0, 0.0}), vec({h, 1.0})) == doctest::Approx(2 * std::numbers::pi));
  }
  CHECK(phase_hyp_radon(vec({0.3, 0.4}), vec({1.0, 1.0})) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("generalized Radon analogue phase") {
  CHECK(phase_gen_radon(vec({0.1, 0.2, 0.3}), vec({0.0, 0.0, 0.0})) == 0.0);
  CHECK(phase_gen_radon(vec({0.0, 0.0, 0.0}), vec({3.0, 4.0, 0.0})) ==
        doctest::Approx(std::numbers::pi * std::sqrt(20.0)));
  // x0 = x1 = 0: gamma = 2 p0 / 3 and kappa = p1.
  const Eigen::VectorXd x = vec({0.0, 0.0, 0.7});
  const Eigen::VectorXd p = vec({1.5, -2.0, 0.25});
  const double gamma = 2.0 * p[0] / 3.0;
  const double kappa = p[1];
  CHECK(phase_gen_radon(x, p) ==
        doctest::Approx(std::numbers::pi * (x.dot(p) + std::hypot(gamma, kappa))));
}

TEST_CASE("batch evaluation equals pointwise evaluation exactly") {
  const auto registry = PhaseRegistry::with_builtins();
  for (const auto& [name, d] : std::vector<std::pair<std::string, int>>{
           {"fourier", 1}, {"fourier", 2}, {"fourier", 3}, {"hyp-radon", 2}, {"gen-radon", 3}}) {
    for (const PhasePtr& phase : {registry.make(name, d), problem_phase(registry, name, d, 16)}) {
      const PointSet x = bfly::testing::random_points(d, 7, 1);
      const PointSet y = bfly::testing::random_points(d, 9, 2);
      const Eigen::MatrixXd b = phase->batch(x, y);
      const Eigen::MatrixXcd k = phase->kernel_batch(x, y);
      for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
          CHECK(b(i, j) == (*phase)(x.col(i), y.col(j)));
          CHECK(k(i, j) == phase->kernel(x.col(i), y.col(j)));
          CHECK(std::isfinite(b(i, j)));
        }
      }
    }
  }
}

TEST_CASE("built-in phases are finite on the unit product domain") {
  const auto registry = PhaseRegistry::with_builtins();
  for (const auto& [name, d] : std::vector<std::pair<std::string, int>>{
           {"fourier", 2}, {"hyp-radon", 2}, {"gen-radon", 3}}) {
    const PhasePtr phase = problem_phase(registry, name, d, 64);
    // Corners included.
    PointSet corners(d, 1 << d);
    for (int c = 0; c < (1 << d); ++c)
      for (int k = 0; k < d; ++k) corners(k, c) = (c >> k) & 1;
    CHECK(phase->batch(corners, corners).allFinite());
    CHECK(phase->batch(bfly::testing::random_points(d, 50, 3), bfly::testing::random_points(d, 50, 4))
              .allFinite());
  }
}

TEST_CASE("scaled phase maps unit coordinates affinely") {
  auto inner = std::make_shared<FourierPhase>(1);
  BoxRegion targets = BoxRegion::unit(1);
  BoxRegion sources = BoxRegion::unit(1);
  targets.lower[0] = 1.0;
  targets.width[0] = 2.0;
  sources.width[0] = 8.0;
  const ScaledPhase scaled(inner, targets, sources);
  CHECK(scaled(vec({0.5}), vec({0.25})) == doctest::Approx(phase_fourier(vec({2.0}), vec({2.0}))));
  CHECK(scaled.name() == "fourier");
  CHECK(scaled.dim() == 1);
}

TEST_CASE("registry") {
  auto registry = PhaseRegistry::with_builtins();
  CHECK(registry.names() == std::vector<std::string>{"fourier", "gen-radon", "hyp-radon"});
  CHECK(registry.make("fourier", 3)->dim() == 3);
  CHECK(registry.make("hyp-radon", 2)->name() == "hyp-radon");
  try {
    registry.make("hyp-radon", 3);
    FAIL("expected dimension_mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::dimension_mismatch);
  }
  try {
    registry.make("chirp", 1);
    FAIL("expected usage");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::usage);
  }

  registry.add("chirp", 1, [](int) -> PhasePtr {
    return std::make_shared<FunctionPhase>(
        "chirp", 1,
        [](const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
          return x[0] * x[0] * y[0];
        });
  });
  CHECK(registry.contains("chirp"));
  CHECK((*registry.make("chirp", 1))(vec({2.0}), vec({3.0})) == 12.0);
}

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
#include "bfly/phase.hpp"

#include <cmath>
#include <numbers>

#include "bfly/error.hpp"

namespace bfly {

using std::numbers::pi;

Eigen::MatrixXd PhaseEvaluator::batch(const PointSet& x, const PointSet& y) const {
  Eigen::MatrixXd out(x.cols(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < x.cols(); ++i) out(i, j) = (*this)(x.col(i), y.col(j));
  return out;
}

Eigen::MatrixXcd PhaseEvaluator::kernel_batch(const PointSet& x, const PointSet& y) const {
  return batch(x, y).unaryExpr([](double phi) { return std::polar(1.0, phi); });
}

double phase_fourier(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
  return 2.0 * pi * x.dot(y);
}

double phase_hyp_radon(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y) {
  const double h = y[0];
  const double p = y[1];
  return 2.0 * pi * p * std::sqrt(x[0] * x[0] + x[1] * x[1] * h * h);
}

double phase_gen_radon(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& p) {
  const double s0 = std::sin(2.0 * pi * x[0]);
  const double s1 = std::sin(2.0 * pi * x[1]);
  const double c0 = std::cos(2.0 * pi * x[0]);
  const double c1 = std::cos(2.0 * pi * x[1]);
  const double gamma = p[0] * (2.0 + s0 * s1) / 3.0;
  const double kappa = p[1] * (2.0 + c0 * c1) / 3.0;
  return pi * (x.dot(p) + std::sqrt(gamma * gamma + kappa * kappa));
}

Eigen::MatrixXd FourierPhase::batch(const PointSet& x, const PointSet& y) const {
  // Same reduction order as x.dot(y) per entry.
  Eigen::MatrixXd out(x.cols(), y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < x.cols(); ++i) out(i, j) = phase_fourier(x.col(i), y.col(j));
  return out;
}

ScaledPhase::ScaledPhase(PhasePtr inner, BoxRegion targets, BoxRegion sources)
    : inner_(std::move(inner)), targets_(std::move(targets)), sources_(std::move(sources)) {
  if (targets_.dim() != inner_->dim() || sources_.dim() != inner_->dim()) {
    throw Error(Errc::dimension_mismatch, "scaled phase boxes must match the phase dimension");
  }
}

double ScaledPhase::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const Eigen::VectorXd xs = targets_.lower + targets_.width.cwiseProduct(x);
  const Eigen::VectorXd ys = sources_.lower + sources_.width.cwiseProduct(y);
  return (*inner_)(xs, ys);
}

Eigen::MatrixXd ScaledPhase::batch(const PointSet& x, const PointSet& y) const {
  const PointSet xs = (targets_.width.asDiagonal() * x).colwise() + targets_.lower;
  const PointSet ys = (sources_.width.asDiagonal() * y).colwise() + sources_.lower;
  return inner_->batch(xs, ys);
}

PhaseRegistry PhaseRegistry::with_builtins() {
  PhaseRegistry registry;
  registry.add("fourier", 0, [](int d) { return std::make_shared<FourierPhase>(d); });
  registry.add("hyp-radon", 2, [](int) {
    return std::make_shared<FunctionPhase>("hyp-radon", 2, phase_hyp_radon);
  });
  registry.add("gen-radon", 3, [](int) {
    return std::make_shared<FunctionPhase>("gen-radon", 3, phase_gen_radon);
  });
  return registry;
}

void PhaseRegistry::add(const std::string& name, int dim, Factory factory) {
  entries_[name] = Entry{dim, std::move(factory)};
}

PhasePtr PhaseRegistry::make(const std::string& name, int dim) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) throw Error(Errc::usage, "unknown phase '" + name + "'");
  if (it->second.dim != 0 && it->second.dim != dim) {
    throw Error(Errc::dimension_mismatch, "phase '" + name + "' is defined for d = " +
                                              std::to_string(it->second.dim));
  }
  return it->second.factory(dim);
}

std::vector<std::string> PhaseRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

PhasePtr problem_phase(const PhaseRegistry& registry, const std::string& name, int dim, int n) {
  PhasePtr inner = registry.make(name, dim);
  BoxRegion targets = BoxRegion::unit(dim);
  BoxRegion sources = BoxRegion::unit(dim);
  if (name == "fourier" || name == "gen-radon") {
    sources.width.setConstant(n);
  } else if (name == "hyp-radon") {
    targets.lower[0] = 1.0;
    sources.width[1] = 0.5 * n;
  } else {
    return inner;
  }
  return std::make_shared<ScaledPhase>(std::move(inner), std::move(targets), std::move(sources));
}

}  // namespace bfly

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

// Real-valued phase functions Phi(x, y) defining the kernel exp(i Phi).

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bfly/geometry.hpp"

namespace bfly {

class PhaseEvaluator {
 public:
  virtual ~PhaseEvaluator() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;

  virtual double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y) const = 0;

  // Entry (i, j) is Phi(x.col(i), y.col(j)). Implementations may vectorize
  // but must agree with the pointwise call exactly.
  virtual Eigen::MatrixXd batch(const PointSet& x, const PointSet& y) const;

  std::complex<double> kernel(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y) const {
    return std::polar(1.0, (*this)(x, y));
  }
  Eigen::MatrixXcd kernel_batch(const PointSet& x, const PointSet& y) const;
};

using PhasePtr = std::shared_ptr<const PhaseEvaluator>;

double phase_fourier(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y);
// y = (h, p).
double phase_hyp_radon(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y);
double phase_gen_radon(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& p);

// Wraps a scalar function of fixed dimension.
class FunctionPhase final : public PhaseEvaluator {
 public:
  using Fn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&,
                                  const Eigen::Ref<const Eigen::VectorXd>&)>;

  FunctionPhase(std::string name, int dim, Fn fn)
      : name_(std::move(name)), dim_(dim), fn_(std::move(fn)) {}

  int dim() const override { return dim_; }
  std::string name() const override { return name_; }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) const override {
    return fn_(x, y);
  }

 private:
  std::string name_;
  int dim_;
  Fn fn_;
};

class FourierPhase final : public PhaseEvaluator {
 public:
  explicit FourierPhase(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  std::string name() const override { return "fourier"; }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) const override {
    return phase_fourier(x, y);
  }
  Eigen::MatrixXd batch(const PointSet& x, const PointSet& y) const override;

 private:
  int dim_;
};

// Evaluates an inner phase on physical boxes: unit-cube coordinates are
// mapped affinely onto `targets` and `sources` before the call.
class ScaledPhase final : public PhaseEvaluator {
 public:
  ScaledPhase(PhasePtr inner, BoxRegion targets, BoxRegion sources);

  int dim() const override { return inner_->dim(); }
  std::string name() const override { return inner_->name(); }
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) const override;
  Eigen::MatrixXd batch(const PointSet& x, const PointSet& y) const override;

  const BoxRegion& targets() const { return targets_; }
  const BoxRegion& sources() const { return sources_; }

 private:
  PhasePtr inner_;
  BoxRegion targets_;
  BoxRegion sources_;
};

class PhaseRegistry {
 public:
  using Factory = std::function<PhasePtr(int dim)>;

  // Holds "fourier", "hyp-radon" and "gen-radon".
  static PhaseRegistry with_builtins();

  // `dim` of 0 accepts any dimension.
  void add(const std::string& name, int dim, Factory factory);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  PhasePtr make(const std::string& name, int dim) const;
  std::vector<std::string> names() const;

 private:
  struct Entry {
    int dim;
    Factory factory;
  };
  std::map<std::string, Entry> entries_;
};

// The built-in phase on the physical domain used for an N-box problem,
// stretched so each admissible box pair sees O(1) oscillations.
// Fourier: x in [0,1]^d, y in [0,N]^d. gen-radon: x in [0,1]^3, p in [0,N]^3.
// hyp-radon: x0 in [1,2] keeps the square root away from its branch point,
// x1 and h in [0,1], p in [0,N/2] to match the gen-radon bandwidth.
PhasePtr problem_phase(const PhaseRegistry& registry, const std::string& name, int dim, int n);

}  // namespace bfly

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

// Sequential butterfly engine, the direct-summation oracle and error metrics.

#include <complex>
#include <map>
#include <memory>

#include <Eigen/Core>

#include "bfly/backend.hpp"
#include "bfly/cheb.hpp"
#include "bfly/id_backend.hpp"
#include "bfly/phase.hpp"
#include "bfly/types.hpp"

namespace bfly {

using BackendPtr = std::shared_ptr<const LowRankBackend>;

// Final (A, Y) blocks keyed by linear_index(A) at level log2 N. A field
// produced by one virtual process holds only that process's boxes.
struct PotentialField {
  BackendPtr backend;
  std::map<std::uint64_t, WeightBlock> blocks;

  std::complex<double> operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXcd evaluate(const PointSet& targets) const;
};

struct ButterflyResult {
  PotentialField field;
  CostLedger ledger;
};

struct EngineOptions {
  int threads = 1;
};

ButterflyResult butterfly_apply(const SourceSet& sources, BackendPtr backend,
                                const EngineOptions& options = {});

enum class BackendKind { cheb, id };

struct BackendConfig {
  BackendKind kind = BackendKind::cheb;
  int q = 8;
  ChebOptions cheb;
  IdOptions id;
  // Kernel rows sampled by the ID backend; the result is accurate there.
  PointSet target_rows;
};

BackendPtr make_backend(PhasePtr phase, int n, const SourceSet& sources,
                        const BackendConfig& config);

ButterflyResult butterfly_apply(const SourceSet& sources, PhasePtr phase, int n,
                                const BackendConfig& config, const EngineOptions& options = {});

// f(x) = sum_y exp(i Phi(x, y)) g(y), by direct summation.
Eigen::VectorXcd direct_apply(const SourceSet& sources, const PhaseEvaluator& phase,
                              const PointSet& targets);

// max |approx - exact| / max |exact|.
double rel_sup_error(const Eigen::Ref<const Eigen::VectorXcd>& approx,
                     const Eigen::Ref<const Eigen::VectorXcd>& exact);

}  // namespace bfly

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
#include "bfly/butterfly.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "bfly/error.hpp"
#include "bfly/parallel_for.hpp"

namespace bfly {

std::complex<double> PotentialField::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto it = blocks.find(linear_index(locate(backend->log2n(), x)));
  if (it == blocks.end()) {
    throw Error(Errc::outside_box, "no block of this field covers the target point");
  }
  return backend->evaluate(it->second, x);
}

Eigen::VectorXcd PotentialField::evaluate(const PointSet& targets) const {
  Eigen::VectorXcd out(targets.cols());
  for (Eigen::Index i = 0; i < targets.cols(); ++i) out[i] = (*this)(targets.col(i));
  return out;
}

ButterflyResult butterfly_apply(const SourceSet& sources, BackendPtr backend,
                                const EngineOptions& options) {
  const int d = backend->dim();
  const int levels = backend->log2n();
  if (sources.size() > 0 && sources.dim() != d) {
    throw Error(Errc::dimension_mismatch, "sources do not match the backend dimension");
  }
  const int threads = std::max(1, options.threads);
  std::vector<CostLedger> ledgers(static_cast<std::size_t>(threads));

  const auto bins = bin_sources(sources.size() > 0 ? sources : SourceSet{PointSet(d, 0), {}},
                                levels);
  std::vector<WeightBlock> blocks(bins.size());
  parallel_for(bins.size(), threads, [&](std::size_t b, int worker) {
    const DyadicKey box = key_from_index(d, levels, b);
    blocks[b] = backend->init(box, sources, bins[b], ledgers[worker]);
    backend->finish_stage(blocks[b], ledgers[worker]);
  });

  for (int level = 0; level < levels; ++level) {
    const std::uint64_t out_targets = std::uint64_t{1} << (d * (level + 1));
    const std::uint64_t out_sources = std::uint64_t{1} << (d * (levels - level - 1));
    const std::uint64_t in_sources = out_sources << d;
    std::vector<WeightBlock> next(out_targets * out_sources);
    parallel_for(next.size(), threads, [&](std::size_t o, int worker) {
      const DyadicKey target = key_from_index(d, level + 1, o / out_sources);
      const DyadicKey source = key_from_index(d, levels - level - 1, o % out_sources);
      const std::uint64_t a = linear_index(parent(target));
      std::vector<const WeightBlock*> kids;
      for (const auto& kid : children(source)) kids.push_back(&blocks[a * in_sources + linear_index(kid)]);
      next[o] = backend->translate({target, source}, kids, ledgers[worker]);
      backend->finish_stage(next[o], ledgers[worker]);
    });
    blocks = std::move(next);
  }

  ButterflyResult result{{backend, {}}, {}};
  for (std::size_t a = 0; a < blocks.size(); ++a) result.field.blocks.emplace(a, std::move(blocks[a]));
  for (const auto& l : ledgers) result.ledger += l;
  return result;
}

BackendPtr make_backend(PhasePtr phase, int n, const SourceSet& sources,
                        const BackendConfig& config) {
  const int levels = log2_exact(static_cast<std::uint64_t>(n));
  if (config.kind == BackendKind::cheb) {
    return std::make_shared<ChebBackend>(std::move(phase), levels, config.q, config.cheb);
  }
  const PointSet points = sources.size() > 0 ? sources.points : PointSet(phase->dim(), 0);
  return std::make_shared<IdBackend>(std::move(phase), levels, points, config.target_rows,
                                     config.id);
}

ButterflyResult butterfly_apply(const SourceSet& sources, PhasePtr phase, int n,
                                const BackendConfig& config, const EngineOptions& options) {
  return butterfly_apply(sources, make_backend(std::move(phase), n, sources, config), options);
}

Eigen::VectorXcd direct_apply(const SourceSet& sources, const PhaseEvaluator& phase,
                              const PointSet& targets) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(targets.cols());
  if (sources.size() == 0) return out;
  constexpr Eigen::Index chunk = 256;
  for (Eigen::Index begin = 0; begin < targets.cols(); begin += chunk) {
    const Eigen::Index len = std::min(chunk, targets.cols() - begin);
    out.segment(begin, len) =
        phase.kernel_batch(targets.middleCols(begin, len), sources.points) * sources.strengths;
  }
  return out;
}

double rel_sup_error(const Eigen::Ref<const Eigen::VectorXcd>& approx,
                     const Eigen::Ref<const Eigen::VectorXcd>& exact) {
  if (approx.size() != exact.size()) {
    throw Error(Errc::dimension_mismatch, "error vectors differ in length");
  }
  const double scale = exact.size() == 0 ? 0.0 : exact.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw Error(Errc::undefined_error, "exact values are all zero");
  return (approx - exact).cwiseAbs().maxCoeff() / scale;
}

}  // namespace bfly

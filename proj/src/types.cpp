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
#include "bfly/types.hpp"

namespace bfly {

std::vector<std::vector<int>> bin_sources(const SourceSet& sources, int level) {
  const int d = sources.dim();
  std::vector<std::vector<int>> bins(std::size_t{1} << (d * level));
  for (Eigen::Index j = 0; j < sources.size(); ++j) {
    bins[linear_index(locate(level, sources.points.col(j)))].push_back(static_cast<int>(j));
  }
  return bins;
}

SourceSet subset(const SourceSet& sources, const std::vector<int>& indices) {
  SourceSet out{PointSet(sources.dim(), static_cast<Eigen::Index>(indices.size())),
                Eigen::VectorXcd(static_cast<Eigen::Index>(indices.size()))};
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out.points.col(static_cast<Eigen::Index>(j)) = sources.points.col(indices[j]);
    out.strengths[static_cast<Eigen::Index>(j)] = sources.strengths[indices[j]];
  }
  return out;
}

}  // namespace bfly

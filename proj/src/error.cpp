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
#include "bfly/error.hpp"

namespace bfly {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::no_parent: return "domain-has-no-parent";
    case Errc::invalid_process_count: return "invalid-process-count";
    case Errc::stack_exhausted: return "stack-exhausted";
    case Errc::unsupported: return "unsupported";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::side_mismatch: return "side-mismatch";
    case Errc::geometry_mismatch: return "geometry-mismatch";
    case Errc::outside_box: return "outside-box";
    case Errc::rank_overflow: return "rank-overflow";
    case Errc::ragged_blocks: return "ragged-blocks";
    case Errc::unscattered_sources: return "unscattered-sources";
    case Errc::undefined_error: return "undefined-error";
    case Errc::usage: return "usage";
  }
  return "unknown";
}

}  // namespace bfly

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

#include <stdexcept>
#include <string>

namespace bfly {

enum class Errc {
  no_parent,
  invalid_process_count,
  stack_exhausted,
  unsupported,
  dimension_mismatch,
  side_mismatch,
  geometry_mismatch,
  outside_box,
  rank_overflow,
  ragged_blocks,
  unscattered_sources,
  undefined_error,
  usage,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Recompression needed more than the permitted rank; residual is the
// relative size of the first discarded pivot.
class RankOverflowError : public Error {
 public:
  RankOverflowError(double residual, const std::string& what)
      : Error(Errc::rank_overflow, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace bfly

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

// Front-end plumbing for the `bfly` tool: configuration, experiment
// drivers and CSV/JSON emission.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bfly/butterfly.hpp"
#include "bfly/types.hpp"

namespace bfly::cli {

struct RunConfig {
  int dim = 0;
  int log2n = -1;
  int q = 8;
  double tol = 1e-7;
  int rmax = 64;
  std::string phase;
  std::string backend = "cheb";
  std::vector<int> procs{1};
  CostParams cost;
  std::uint64_t seed = 0;
  std::string sources;  // count, or path of a source file; empty means N^d
  int targets = 100;
  std::string output;   // empty writes to stdout
  std::string format = "csv";
  double threshold = 1e-2;
  std::string trace;    // optional communication trace path
  int threads = 1;      // from BFLY_THREADS

  int n() const { return 1 << log2n; }
};

enum class Command { verify, scale };

// Thrown by the parsers for --help; what() is the formatted help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Invocation {
  Command command = Command::verify;
  RunConfig config;
};

// argv excludes the program name; args[0] is the subcommand. Option values
// given on the command line override those read from --config. Throws
// Error(Errc::usage) naming the offending key.
Invocation parse_command_line(const std::vector<std::string>& args);

// Options only (no subcommand); `scale` permits a list of process counts.
RunConfig parse_config(const std::vector<std::string>& args, bool allow_proc_list = false);

void validate(const RunConfig& config, bool allow_proc_list);

// Versioned generator used for all random inputs.
class InputGenerator {
 public:
  static constexpr const char* kName = "mt19937_64/v1";

  explicit InputGenerator(std::uint64_t seed);
  double uniform();
  // Positions uniform in [0,1)^d, strengths uniform on the complex unit disk.
  SourceSet sources(int d, Eigen::Index count);
  PointSet points(int d, Eigen::Index count);

 private:
  std::mt19937_64 engine_;
};

SourceSet load_sources(const std::string& path, int d);
SourceSet make_sources(const RunConfig& config);

std::string format_double(double value);

// Exit codes: 0 success, 1 accuracy threshold exceeded.
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_scale(const RunConfig& config, std::ostream& out, std::ostream& log);

// Runs a full invocation, including usage errors (exit 2).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& log);

}  // namespace bfly::cli

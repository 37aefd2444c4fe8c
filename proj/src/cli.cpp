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
#include "bfly/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bfly/error.hpp"
#include "bfly/parallel.hpp"
#include "bfly/parallel_for.hpp"

namespace bfly::cli {
namespace {

std::vector<int> parse_proc_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (...) {
      throw Error(Errc::usage, "procs: malformed value '" + text + "'");
    }
    if (used != item.size()) throw Error(Errc::usage, "procs: malformed value '" + text + "'");
    out.push_back(value);
  }
  if (out.empty()) throw Error(Errc::usage, "procs: empty list");
  return out;
}

bool is_count(const std::string& text) {
  return !text.empty() && text.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args, bool allow_proc_list) {
  RunConfig config;
  std::string procs = "1";
  CLI::App app{"bfly"};
  app.option_defaults()->always_capture_default();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "key=value configuration file");
  app.add_option("--dim", config.dim, "dimension d")->required();
  app.add_option("--log2n", config.log2n, "log2 of boxes per dimension")->required();
  app.add_option("--phase", config.phase, "fourier | hyp-radon | gen-radon")->required();
  app.add_option("--q", config.q, "Chebyshev points per dimension");
  app.add_option("--tol", config.tol, "ID relative tolerance");
  app.add_option("--rmax", config.rmax, "ID rank cap");
  app.add_option("--backend", config.backend, "cheb | id");
  app.add_option("--procs", procs, allow_proc_list ? "comma-separated process counts" : "process count");
  app.add_option("--alpha", config.cost.alpha, "seconds per message");
  app.add_option("--beta", config.cost.beta, "seconds per entry");
  app.add_option("--gamma", config.cost.gamma, "seconds per flop");
  app.add_option("--seed", config.seed, "PRNG seed");
  app.add_option("--sources", config.sources, "source count or source file");
  app.add_option("--targets", config.targets, "random target count");
  app.add_option("--output", config.output, "output path");
  app.add_option("--format", config.format, "csv | json");
  app.add_option("--threshold", config.threshold, "accepted relative sup error");
  app.add_option("--trace", config.trace, "communication trace path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw Error(Errc::usage, e.what());
  }
  config.procs = parse_proc_list(procs);
  config.threads = harness_threads();
  validate(config, allow_proc_list);
  return config;
}

void validate(const RunConfig& config, bool allow_proc_list) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw Error(Errc::usage, key + ": " + why);
  };
  if (config.dim < 1 || config.dim > 3) fail("dim", "must be 1, 2 or 3");
  if (config.log2n < 0 || config.dim * config.log2n > 24) fail("log2n", "N^d must stay below 2^24");
  if (config.q < 1) fail("q", "must be positive");
  if (!(config.tol > 0.0 && config.tol < 1.0)) fail("tol", "must lie in (0, 1)");
  if (config.rmax < 1) fail("rmax", "must be positive");
  if (config.backend != "cheb" && config.backend != "id") fail("backend", "must be cheb or id");
  if (config.format != "csv" && config.format != "json") fail("format", "must be csv or json");
  if (config.targets < 1) fail("targets", "must be positive");
  if (config.cost.alpha < 0 || config.cost.beta < 0 || config.cost.gamma < 0) {
    fail("alpha/beta/gamma", "must be nonnegative");
  }
  const auto registry = PhaseRegistry::with_builtins();
  if (!registry.contains(config.phase)) fail("phase", "unknown phase '" + config.phase + "'");
  try {
    registry.make(config.phase, config.dim);
  } catch (const Error& e) {
    fail("phase", e.what());
  }
  if (!allow_proc_list && config.procs.size() != 1) fail("procs", "expects a single value");
  const std::uint64_t boxes = std::uint64_t{1} << (config.dim * config.log2n);
  for (const int p : config.procs) {
    if (p < 1 || !is_pow2(static_cast<std::uint64_t>(p))) {
      fail("procs", std::to_string(p) + " is not a power of two");
    }
    if (static_cast<std::uint64_t>(p) > boxes) fail("procs", std::to_string(p) + " exceeds N^d");
  }
  if (config.backend == "id" && boxes > 4096) fail("backend", "id is limited to N^d <= 4096");
  if (!config.sources.empty() && !is_count(config.sources)) {
    std::ifstream probe(config.sources);
    if (!probe) fail("sources", "neither a count nor a readable file: " + config.sources);
  }
}

Invocation parse_command_line(const std::vector<std::string>& args) {
  if (args.empty()) throw Error(Errc::usage, "missing subcommand (verify | scale)");
  if (args[0] == "--help" || args[0] == "-h") {
    throw HelpRequested("subcommands:\n  verify  check accuracy against direct evaluation\n"
                        "  scale   modeled cost across process counts\n");
  }
  Invocation inv;
  if (args[0] == "verify") {
    inv.command = Command::verify;
  } else if (args[0] == "scale") {
    inv.command = Command::scale;
  } else {
    throw Error(Errc::usage, "unknown subcommand '" + args[0] + "'");
  }
  inv.config = parse_config({args.begin() + 1, args.end()}, inv.command == Command::scale);
  return inv;
}

InputGenerator::InputGenerator(std::uint64_t seed) : engine_(seed) {}

double InputGenerator::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

SourceSet InputGenerator::sources(int d, Eigen::Index count) {
  SourceSet out{PointSet(d, count), Eigen::VectorXcd(count)};
  for (Eigen::Index j = 0; j < count; ++j) {
    for (int k = 0; k < d; ++k) out.points(k, j) = uniform();
    const double radius = std::sqrt(uniform());
    const double angle = 2.0 * std::numbers::pi * uniform();
    out.strengths[j] = std::polar(radius, angle);
  }
  return out;
}

PointSet InputGenerator::points(int d, Eigen::Index count) {
  PointSet out(d, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (int k = 0; k < d; ++k) out(k, j) = uniform();
  return out;
}

SourceSet load_sources(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::usage, "sources: cannot open " + path);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  Eigen::Index count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> row;
    double v;
    while (fields >> v) row.push_back(v);
    if (!fields.eof()) {
      throw Error(Errc::usage, "sources: malformed number on line " + std::to_string(line_no));
    }
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != d + 2) {
      throw Error(Errc::usage, "sources: line " + std::to_string(line_no) + " needs " +
                                   std::to_string(d + 2) + " values");
    }
    for (int k = 0; k < d; ++k) {
      if (row[k] < 0.0 || row[k] > 1.0) {
        throw Error(Errc::usage, "sources: line " + std::to_string(line_no) + " is outside [0,1]^d");
      }
    }
    values.insert(values.end(), row.begin(), row.end());
    ++count;
  }
  SourceSet out{PointSet(d, count), Eigen::VectorXcd(count)};
  for (Eigen::Index j = 0; j < count; ++j) {
    const double* row = values.data() + j * (d + 2);
    for (int k = 0; k < d; ++k) out.points(k, j) = row[k];
    out.strengths[j] = {row[d], row[d + 1]};
  }
  return out;
}

SourceSet make_sources(const RunConfig& config) {
  if (!config.sources.empty() && !is_count(config.sources)) {
    return load_sources(config.sources, config.dim);
  }
  const Eigen::Index count = config.sources.empty()
                                 ? (Eigen::Index{1} << (config.dim * config.log2n))
                                 : static_cast<Eigen::Index>(std::stoll(config.sources));
  InputGenerator gen(config.seed);
  return gen.sources(config.dim, count);
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

namespace {

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["dim"] = c.dim;
  j["log2n"] = c.log2n;
  j["q"] = c.q;
  j["tol"] = c.tol;
  j["rmax"] = c.rmax;
  j["phase"] = c.phase;
  j["backend"] = c.backend;
  j["procs"] = c.procs;
  j["alpha"] = c.cost.alpha;
  j["beta"] = c.cost.beta;
  j["gamma"] = c.cost.gamma;
  j["seed"] = c.seed;
  j["sources"] = c.sources;
  j["targets"] = c.targets;
  j["threshold"] = c.threshold;
  j["generator"] = InputGenerator::kName;
  return j;
}

nlohmann::ordered_json ledger_json(const std::vector<LedgerRow>& rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    out.push_back({{"rank", row.rank},
                   {"flops", row.flops},
                   {"messages", row.messages},
                   {"entries_sent", row.entries_sent},
                   {"modeled_seconds", row.modeled_seconds}});
  }
  return out;
}

struct Totals {
  std::uint64_t flops_total = 0;
  std::uint64_t flops_max = 0;
  std::uint64_t messages_max = 0;
  std::uint64_t entries_max = 0;
  double modeled_seconds = 0.0;
};

Totals totals(const std::vector<LedgerRow>& rows) {
  Totals t;
  for (const auto& row : rows) {
    t.flops_total += row.flops;
    t.flops_max = std::max(t.flops_max, row.flops);
    t.messages_max = std::max(t.messages_max, row.messages);
    t.entries_max = std::max(t.entries_max, row.entries_sent);
    t.modeled_seconds = std::max(t.modeled_seconds, row.modeled_seconds);
  }
  return t;
}

BackendConfig backend_config(const RunConfig& config, const PointSet& targets) {
  BackendConfig bc;
  bc.kind = config.backend == "id" ? BackendKind::id : BackendKind::cheb;
  bc.q = config.q;
  bc.id.tol = config.tol;
  bc.id.rmax = config.rmax;
  bc.target_rows = targets;
  return bc;
}

void write_trace(const RunConfig& config, const std::vector<TraceEvent>& trace) {
  if (config.trace.empty()) return;
  std::ofstream out(config.trace);
  if (!out) throw Error(Errc::usage, "trace: cannot write " + config.trace);
  out << "stage,rank,team_bits,entries\n";
  for (const auto& e : trace) {
    out << e.stage << ',' << e.rank << ',' << e.team_bits << ',' << e.entries << '\n';
  }
}

// Largest blockwise relative difference between two fields over the same boxes.
double field_difference(const PotentialField& a, const PotentialField& b) {
  double worst = 0.0;
  for (const auto& [key, block] : a.blocks) {
    const auto it = b.blocks.find(key);
    if (it == b.blocks.end() || it->second.values.size() != block.values.size()) {
      return std::numeric_limits<double>::infinity();
    }
    if (block.values.size() == 0) continue;
    const double scale = std::max(block.values.cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, (block.values - it->second.values).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const auto registry = PhaseRegistry::with_builtins();
  const PhasePtr phase = problem_phase(registry, config.phase, config.dim, config.n());
  const SourceSet sources = make_sources(config);
  InputGenerator target_gen(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const PointSet targets = target_gen.points(config.dim, config.targets);

  const BackendPtr backend = make_backend(phase, config.n(), sources, backend_config(config, targets));
  const EngineOptions engine{config.threads};
  const ButterflyResult sequential = butterfly_apply(sources, backend, engine);

  const int p = config.procs.front();
  std::vector<LedgerRow> rows;
  PotentialField field = sequential.field;
  double parallel_diff = 0.0;
  if (p > 1) {
    SimulationOptions sim;
    sim.threads = config.threads;
    sim.trace = !config.trace.empty();
    const SimulationResult result = simulate_parallel(sources, backend, p, sim);
    rows = ledger_report(result.processes, config.cost);
    field = result.gather();
    parallel_diff = field_difference(sequential.field, field);
    write_trace(config, result.trace);
  } else {
    rows.push_back({0, sequential.ledger.flops, 0, 0, modeled_seconds(sequential.ledger, config.cost)});
  }

  const Eigen::VectorXcd approx = field.evaluate(targets);
  const Eigen::VectorXcd exact = direct_apply(sources, *phase, targets);
  std::vector<std::string> warnings;
  double error = 0.0;
  try {
    error = rel_sup_error(approx, exact);
  } catch (const Error& e) {
    if (e.code() != Errc::undefined_error) throw;
    warnings.push_back("exact potential is identically zero; error reported as 0");
    log << "warning: " << warnings.back() << '\n';
  }
  const Totals t = totals(rows);

  if (config.format == "json") {
    nlohmann::ordered_json j;
    j["config"] = config_json(config);
    j["error"] = error;
    j["parallel_max_rel_diff"] = parallel_diff;
    j["warnings"] = warnings;
    j["ledger"] = ledger_json(rows);
    j["modeled_seconds"] = t.modeled_seconds;
    out << j.dump(2) << '\n';
  } else {
    out << "phase,dim,log2n,backend,q,procs,sources,targets,rel_sup_error,parallel_max_rel_diff,"
           "flops_total,flops_max,messages_max,entries_max,modeled_seconds\n";
    out << config.phase << ',' << config.dim << ',' << config.log2n << ',' << config.backend << ','
        << config.q << ',' << p << ',' << sources.size() << ',' << config.targets << ','
        << format_double(error) << ',' << format_double(parallel_diff) << ',' << t.flops_total
        << ',' << t.flops_max << ',' << t.messages_max << ',' << t.entries_max << ','
        << format_double(t.modeled_seconds) << '\n';
  }
  return error <= config.threshold ? 0 : 1;
}

int cmd_scale(const RunConfig& config, std::ostream& out, std::ostream& /*log*/) {
  const auto registry = PhaseRegistry::with_builtins();
  const PhasePtr phase = problem_phase(registry, config.phase, config.dim, config.n());
  const SourceSet sources = make_sources(config);
  InputGenerator target_gen(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const PointSet targets = target_gen.points(config.dim, config.targets);
  const BackendPtr backend = make_backend(phase, config.n(), sources, backend_config(config, targets));

  nlohmann::ordered_json rows_json = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "p,flops_max,messages_max,entries_max,modeled_seconds\n";
  for (const int p : config.procs) {
    SimulationOptions sim;
    sim.threads = config.threads;
    const SimulationResult result = simulate_parallel(sources, backend, p, sim);
    const auto rows = ledger_report(result.processes, config.cost);
    const Totals t = totals(rows);
    csv << p << ',' << t.flops_max << ',' << t.messages_max << ',' << t.entries_max << ','
        << format_double(t.modeled_seconds) << '\n';
    rows_json.push_back({{"p", p},
                         {"flops_max", t.flops_max},
                         {"messages_max", t.messages_max},
                         {"entries_max", t.entries_max},
                         {"modeled_seconds", t.modeled_seconds}});
  }
  if (config.format == "json") {
    nlohmann::ordered_json j;
    j["config"] = config_json(config);
    j["rows"] = rows_json;
    out << j.dump(2) << '\n';
  } else {
    out << csv.str();
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& log) {
  Invocation inv;
  try {
    inv = parse_command_line(args);
  } catch (const HelpRequested& help) {
    out << "usage: bfly (verify|scale) [options]\n" << help.what();
    return 0;
  } catch (const Error& e) {
    log << "usage error: " << e.what() << '\n'
        << "usage: bfly (verify|scale) --dim D --log2n L --phase NAME [options]\n";
    return 2;
  }
  std::ofstream file;
  std::ostream* sink = &out;
  if (!inv.config.output.empty()) {
    file.open(inv.config.output);
    if (!file) {
      log << "usage error: output: cannot write " << inv.config.output << '\n';
      return 2;
    }
    sink = &file;
  }
  try {
    return inv.command == Command::verify ? cmd_verify(inv.config, *sink, log)
                                          : cmd_scale(inv.config, *sink, log);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return e.code() == Errc::usage ? 2 : 1;
  }
}

}  // namespace bfly::cli

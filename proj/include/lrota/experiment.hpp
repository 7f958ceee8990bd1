#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrota/generators.hpp"
#include "lrota/solver.hpp"

namespace lrota {

std::string mode_name(ProximalMode mode);
ProximalMode parse_mode(const std::string& name);

// One benchmark campaign: a generator family, a target rank, solver
// settings, and a list of stabilization modes to compare. Repeat j of every
// mode shares its tensor and its solver seed, so mode comparisons see
// identical instances.
struct ExperimentConfig {
  GeneratorSpec generator;  // per-repeat seeds are derived from `seed` below
  std::size_t target_rank = 1;
  SolverConfig solver;  // proximal mode and seed are overwritten per run
  std::vector<ProximalMode> modes{ProximalMode::classic, ProximalMode::revised,
                                  ProximalMode::none};
  int repeats = 1;
  std::uint64_t seed = 0;
  std::string output_dir;  // empty: no trace files are written
};

// Strict JSON: unknown keys anywhere are rejected with ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct RunRecord {
  ProximalMode mode = ProximalMode::classic;
  int repeat = 0;
  double f = 0.0;
  double residual = 0.0;
  std::size_t final_rank = 0;
  int sweeps = 0;
  Termination termination = Termination::max_sweeps;
  double rho = 0.0;  // fitted linear factor; NaN when no fit was possible
  bool rate_superlinear = false;
  bool truncated = false;
  int correction_sweeps = 0;  // sweeps containing any stabilization
  bool decrease_ok = false;   // guaranteed-gain audit verdict
  bool truncation_ok = false; // truncation-budget audit verdict
  double wall_seconds = 0.0;
  std::string trace_csv;  // written path, empty when no output_dir was set
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;  // ordered by (mode position, repeat)
};

// Fixed trace schema, one row per sweep:
// sweep,f,delta_f,step_norm,kkt_residual,sigma_min_mode_1..k,proximal_flags,
// truncated_indices. proximal_flags is a bitmask with bit i-1 set when mode
// i was stabilized; truncated_indices is a semicolon list of dropped
// columns. Byte-identical for identical traces.
void write_trace_csv(std::ostream& os, const SolveTrace& trace, std::size_t order);

// Runs repeats x modes, in parallel across worker threads (0 = hardware
// default), results in deterministic order and trace files written from
// the main thread afterwards.
ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 0);

// Aggregate JSON: per-mode median sweep counts, fitted rho values,
// truncation and stabilization frequencies, audit verdict counts.
std::string aggregate_report(const ExperimentResult& result);

}  // namespace lrota

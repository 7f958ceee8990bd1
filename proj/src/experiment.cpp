#include "lrota/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lrota/diagnostics.hpp"
#include "lrota/errors.hpp"
#include "lrota/io.hpp"
#include "lrota/rng.hpp"

namespace lrota {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Substream tags of the master seed; repeat j of every mode shares both.
constexpr std::uint64_t kTensorStream = 100;
constexpr std::uint64_t kSolverStream = 200;

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end()) {
      throw ConfigError(std::string("config: unknown key \"") + key + "\" in " + where);
    }
  }
}

GeneratorSpec parse_generator(const json& j) {
  if (!j.is_object()) throw ConfigError("config: generator must be an object");
  require_keys(j, "generator", {"kind", "dims", "rank", "sigma"});
  if (!j.contains("kind") || !j.contains("dims"))
    throw ConfigError("config: generator needs kind and dims");
  GeneratorSpec g;
  g.kind = parse_kind(j.at("kind").get<std::string>());
  g.dims = j.at("dims").get<std::vector<std::size_t>>();
  if (j.contains("rank")) g.rank = j.at("rank").get<std::size_t>();
  if (j.contains("sigma")) g.sigma = j.at("sigma").get<double>();
  return g;
}

SolverConfig parse_solver(const json& j) {
  if (!j.is_object()) throw ConfigError("config: solver must be an object");
  require_keys(j, "solver", {"epsilon", "kappa", "tau", "max_sweeps", "step_tol", "kkt_tol",
                             "init", "truncation"});
  SolverConfig cfg;
  if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
  if (j.contains("kappa")) cfg.kappa = j.at("kappa").get<double>();
  if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
  if (j.contains("max_sweeps")) cfg.max_sweeps = j.at("max_sweeps").get<int>();
  if (j.contains("step_tol")) cfg.step_tol = j.at("step_tol").get<double>();
  if (j.contains("kkt_tol")) cfg.kkt_tol = j.at("kkt_tol").get<double>();
  if (j.contains("truncation")) cfg.truncation = j.at("truncation").get<bool>();
  if (j.contains("init")) {
    const std::string s = j.at("init").get<std::string>();
    if (s == "hosvd") cfg.init = InitStrategy::hosvd;
    else if (s == "random") cfg.init = InitStrategy::random;
    else throw ConfigError("config: unknown init strategy: " + s);
  }
  return cfg;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string mode_name(ProximalMode mode) {
  switch (mode) {
    case ProximalMode::classic: return "classic";
    case ProximalMode::revised: return "revised";
    case ProximalMode::none: return "none";
  }
  throw ConfigError("unknown proximal mode");
}

ProximalMode parse_mode(const std::string& name) {
  if (name == "classic") return ProximalMode::classic;
  if (name == "revised") return ProximalMode::revised;
  if (name == "none") return ProximalMode::none;
  throw ConfigError("unknown proximal mode: " + name);
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    require_keys(j, "config",
                 {"generator", "target_rank", "solver", "modes", "repeats", "seed",
                  "output_dir"});
    if (!j.contains("generator") || !j.contains("target_rank"))
      throw ConfigError("config: generator and target_rank are required");
    ExperimentConfig cfg;
    cfg.generator = parse_generator(j.at("generator"));
    cfg.target_rank = j.at("target_rank").get<std::size_t>();
    if (j.contains("solver")) cfg.solver = parse_solver(j.at("solver"));
    if (j.contains("modes")) {
      cfg.modes.clear();
      for (const auto& m : j.at("modes")) cfg.modes.push_back(parse_mode(m.get<std::string>()));
      if (cfg.modes.empty()) throw ConfigError("config: modes must be nonempty");
    }
    if (j.contains("repeats")) cfg.repeats = j.at("repeats").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    if (cfg.repeats < 1) throw ConfigError("config: repeats must be >= 1");
    if (cfg.target_rank < 1) throw ConfigError("config: target_rank must be >= 1");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_experiment_config(buf.str());
}

void write_trace_csv(std::ostream& os, const SolveTrace& trace, std::size_t order) {
  os << "sweep,f,delta_f,step_norm,kkt_residual";
  for (std::size_t i = 1; i <= order; ++i) os << ",sigma_min_mode_" << i;
  os << ",proximal_flags,truncated_indices\n";
  for (const SweepRecord& rec : trace.sweeps) {
    os << rec.sweep << ',' << format_double(rec.f) << ',' << format_double(rec.delta_f) << ','
       << format_double(rec.step_norm) << ',' << format_double(rec.kkt_residual);
    for (std::size_t i = 0; i < order; ++i) os << ',' << format_double(rec.sigma_min[i]);
    unsigned long flags = 0;
    for (std::size_t i = 0; i < rec.corrections.size(); ++i)
      if (rec.corrections[i] != kCorrectionNone) flags |= 1ul << i;
    os << ',' << flags << ',';
    for (std::size_t i = 0; i < rec.truncated.size(); ++i) {
      if (i > 0) os << ';';
      os << rec.truncated[i];
    }
    os << '\n';
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  if (cfg.repeats < 1) throw ConfigError("run_experiment: repeats must be >= 1");
  if (cfg.modes.empty()) throw ConfigError("run_experiment: no modes selected");

  struct Task {
    ProximalMode mode;
    int repeat;
  };
  std::vector<Task> tasks;
  for (ProximalMode mode : cfg.modes)
    for (int rep = 0; rep < cfg.repeats; ++rep) tasks.push_back({mode, rep});

  ExperimentResult result;
  result.config = cfg;
  result.runs.resize(tasks.size());
  std::vector<SolveTrace> traces(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= tasks.size()) return;
      const Task& task = tasks[slot];
      try {
        GeneratorSpec gspec = cfg.generator;
        gspec.seed = derive_seed(cfg.seed, kTensorStream, static_cast<std::uint64_t>(task.repeat));
        GeneratedTensor inst = generate_tensor(gspec);

        SolverConfig scfg = cfg.solver;
        scfg.proximal = task.mode;
        scfg.seed = derive_seed(cfg.seed, kSolverStream, static_cast<std::uint64_t>(task.repeat));
        scfg.record_snapshots = false;

        const auto t0 = std::chrono::steady_clock::now();
        Solution sol = solve(inst.tensor, cfg.target_rank, scfg);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        RunRecord rec;
        rec.mode = task.mode;
        rec.repeat = task.repeat;
        rec.f = sol.f;
        rec.residual = sol.residual;
        rec.final_rank = sol.factors.rank();
        rec.sweeps = sol.sweeps;
        rec.termination = sol.termination;
        rec.wall_seconds = wall;
        rec.decrease_ok = sufficient_decrease_audit(sol.trace).pass();
        rec.truncation_ok = truncation_audit(sol.trace, cfg.target_rank).pass();
        for (const SweepRecord& sr : sol.trace.sweeps) {
          if (!sr.truncated.empty()) rec.truncated = true;
          for (std::uint8_t c : sr.corrections)
            if (c != kCorrectionNone) {
              ++rec.correction_sweeps;
              break;
            }
        }
        try {
          RateReport rr = fit_linear_rate(sol.trace);
          rec.rho = rr.superlinear ? 0.0 : rr.rho;
          rec.rate_superlinear = rr.superlinear;
        } catch (const NumericalError&) {
          rec.rho = std::numeric_limits<double>::quiet_NaN();
        }
        result.runs[slot] = std::move(rec);
        traces[slot] = std::move(sol.trace);
      } catch (...) {
        errors[slot] = std::current_exception();
      }
    }
  };

  unsigned n_workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    for (std::size_t slot = 0; slot < tasks.size(); ++slot) {
      const std::string path = cfg.output_dir + "/trace_" + mode_name(tasks[slot].mode) +
                               "_rep" + std::to_string(tasks[slot].repeat) + ".csv";
      std::ofstream os(path, std::ios::binary);
      if (!os) throw IoError("cannot write trace file: " + path);
      write_trace_csv(os, traces[slot], cfg.generator.dims.size());
      result.runs[slot].trace_csv = path;
    }
  }
  return result;
}

std::string aggregate_report(const ExperimentResult& result) {
  ordered_json out;
  out["generator"] = {{"kind", kind_name(result.config.generator.kind)},
                      {"dims", result.config.generator.dims},
                      {"rank", result.config.generator.rank},
                      {"sigma", result.config.generator.sigma}};
  out["target_rank"] = result.config.target_rank;
  out["repeats"] = result.config.repeats;
  out["seed"] = result.config.seed;

  ordered_json modes = ordered_json::object();
  for (ProximalMode mode : result.config.modes) {
    std::vector<double> sweeps, walls, rhos;
    int superlinear = 0, truncated = 0, tol_term = 0, decrease_ok = 0, truncation_ok = 0;
    long total_sweeps = 0, correction_sweeps = 0;
    ordered_json rho_list = ordered_json::array();
    for (const RunRecord& rec : result.runs) {
      if (rec.mode != mode) continue;
      sweeps.push_back(static_cast<double>(rec.sweeps));
      walls.push_back(rec.wall_seconds);
      if (std::isnan(rec.rho)) rho_list.push_back(nullptr);
      else {
        rho_list.push_back(rec.rho);
        if (!rec.rate_superlinear) rhos.push_back(rec.rho);
      }
      if (rec.rate_superlinear) ++superlinear;
      if (rec.truncated) ++truncated;
      if (rec.termination == Termination::tolerance) ++tol_term;
      if (rec.decrease_ok) ++decrease_ok;
      if (rec.truncation_ok) ++truncation_ok;
      total_sweeps += rec.sweeps;
      correction_sweeps += rec.correction_sweeps;
    }
    const double n = static_cast<double>(sweeps.size());
    ordered_json m;
    m["runs"] = sweeps.size();
    m["median_sweeps"] = median(sweeps);
    m["median_wall_seconds"] = median(walls);
    m["tolerance_terminated"] = tol_term;
    m["rho"] = rho_list;
    m["median_rho"] = rhos.empty() ? ordered_json(nullptr) : ordered_json(median(rhos));
    m["superlinear"] = superlinear;
    m["truncation_frequency"] = n > 0 ? truncated / n : 0.0;
    m["correction_sweep_frequency"] =
        total_sweeps > 0 ? static_cast<double>(correction_sweeps) /
                               static_cast<double>(total_sweeps)
                         : 0.0;
    m["decrease_audit_pass"] = decrease_ok;
    m["truncation_audit_pass"] = truncation_ok;
    modes[mode_name(mode)] = std::move(m);
  }
  out["modes"] = std::move(modes);
  return out.dump(2) + "\n";
}

}  // namespace lrota

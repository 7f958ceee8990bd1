#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrota/diagnostics.hpp"
#include "lrota/errors.hpp"
#include "lrota/experiment.hpp"
#include "lrota/io.hpp"
#include "lrota/solver.hpp"
#include "lrota/verify.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("LROTA_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : ".";
}

struct DecomposeArgs {
  std::string input;
  std::size_t rank = 1;
  double epsilon = 0.0;
  double kappa = -1.0;
  double tau = 0.0;
  std::string mode = "classic";
  int max_sweeps = 2000;
  double step_tol = 1e-10;
  double kkt_tol = 1e-8;
  std::uint64_t seed = 0;
  std::string init = "hosvd";
  bool no_truncation = false;
  std::string out;
  std::string json_report;
};

int run_decompose(const DecomposeArgs& args) {
  lrota::DenseTensor a = lrota::read_tensor_file(args.input);

  lrota::SolverConfig cfg;
  cfg.epsilon = args.epsilon;
  cfg.kappa = args.kappa;
  cfg.tau = args.tau;
  cfg.proximal = lrota::parse_mode(args.mode);
  cfg.truncation = !args.no_truncation;
  cfg.max_sweeps = args.max_sweeps;
  cfg.step_tol = args.step_tol;
  cfg.kkt_tol = args.kkt_tol;
  cfg.seed = args.seed;
  cfg.record_snapshots = false;
  if (args.init == "hosvd") cfg.init = lrota::InitStrategy::hosvd;
  else if (args.init == "random") cfg.init = lrota::InitStrategy::random;
  else throw lrota::ConfigError("unknown init strategy: " + args.init);

  lrota::Solution sol = lrota::solve(a, args.rank, cfg);

  std::filesystem::create_directories(args.out);
  lrota::Matrix lambda_col(sol.lambda.size(), 1);
  for (std::size_t j = 0; j < sol.lambda.size(); ++j) lambda_col(j, 0) = sol.lambda[j];
  lrota::write_matrix_file(args.out + "/lambda.txt", lambda_col);
  const std::vector<lrota::Matrix> mats = sol.factors.matrices();
  for (std::size_t i = 0; i < mats.size(); ++i)
    lrota::write_matrix_file(args.out + "/factor_" + std::to_string(i + 1) + ".txt", mats[i]);

  const std::string term =
      sol.termination == lrota::Termination::tolerance ? "tolerance" : "max_sweeps";
  std::cout << "f " << lrota::format_double(sol.f) << "\n"
            << "residual " << lrota::format_double(sol.residual) << "\n"
            << "rank " << sol.factors.rank() << "\n"
            << "sweeps " << sol.sweeps << "\n"
            << "termination " << term << "\n";

  if (!args.json_report.empty()) {
    nlohmann::ordered_json rep;
    rep["input"] = args.input;
    rep["rank"] = sol.factors.rank();
    rep["f"] = sol.f;
    rep["residual"] = sol.residual;
    rep["sweeps"] = sol.sweeps;
    rep["termination"] = term;
    rep["lambda"] = sol.lambda;
    rep["epsilon"] = sol.trace.resolved.epsilon;
    rep["kappa"] = sol.trace.resolved.kappa;
    rep["tau"] = sol.trace.resolved.tau;
    std::ofstream os(args.json_report, std::ios::binary);
    if (!os) throw lrota::IoError("cannot write report: " + args.json_report);
    os << rep.dump(2) << "\n";
  }
  return sol.termination == lrota::Termination::tolerance ? 0 : 2;
}

struct VerifyArgs {
  std::uint64_t seed = 7;
  std::vector<std::string> only;
  bool negative_control = false;
  std::string json_report;
};

int run_verify(const VerifyArgs& args) {
  lrota::BatteryOptions opts;
  opts.seed = args.seed;
  opts.only = args.only;
  opts.inject_violation = args.negative_control;
  const std::vector<lrota::CheckResult> results = lrota::run_battery(opts);

  bool all_pass = true;
  for (const lrota::CheckResult& r : results) {
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.details << " ("
              << std::fixed << std::setprecision(2) << r.seconds << "s)\n";
    std::cout.unsetf(std::ios::floatfield);
  }
  if (!args.json_report.empty()) {
    nlohmann::ordered_json rep;
    rep["pass"] = all_pass;
    rep["seed"] = args.seed;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const lrota::CheckResult& r : results)
      checks.push_back({{"name", r.name},
                        {"pass", r.pass},
                        {"details", r.details},
                        {"seconds", r.seconds}});
    rep["checks"] = std::move(checks);
    std::ofstream os(args.json_report, std::ios::binary);
    if (!os) throw lrota::IoError("cannot write report: " + args.json_report);
    os << rep.dump(2) << "\n";
  }
  return all_pass ? 0 : 1;
}

struct BenchmarkArgs {
  std::string config;
  std::string out;
  std::string json_report;
  unsigned threads = 0;
};

int run_benchmark(const BenchmarkArgs& args) {
  lrota::ExperimentConfig cfg = lrota::load_experiment_config(args.config);
  if (!args.out.empty()) cfg.output_dir = args.out;
  if (cfg.output_dir.empty()) cfg.output_dir = default_out_dir();

  lrota::ExperimentResult result = lrota::run_experiment(cfg, args.threads);
  const std::string report = lrota::aggregate_report(result);
  const std::string report_path =
      args.json_report.empty() ? cfg.output_dir + "/aggregate.json" : args.json_report;
  std::ofstream os(report_path, std::ios::binary);
  if (!os) throw lrota::IoError("cannot write report: " + report_path);
  os << report;

  for (const lrota::RunRecord& rec : result.runs)
    std::cout << lrota::mode_name(rec.mode) << " rep " << rec.repeat << ": sweeps "
              << rec.sweeps << ", f " << lrota::format_double(rec.f) << ", residual "
              << lrota::format_double(rec.residual) << ", rank " << rec.final_rank << "\n";
  std::cout << "aggregate " << report_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank orthogonally decomposable tensor approximation"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  dec.out = default_out_dir();
  CLI::App* cmd_dec = app.add_subcommand("decompose", "approximate a tensor read from a file");
  cmd_dec->add_option("--input", dec.input, "tensor file")->required();
  cmd_dec->add_option("--rank", dec.rank, "target rank")->required();
  cmd_dec->add_option("--epsilon", dec.epsilon, "stabilization threshold, <= 0 for automatic");
  cmd_dec->add_option("--kappa", dec.kappa, "truncation threshold, < 0 for automatic");
  cmd_dec->add_option("--tau", dec.tau, "revised-mode gate, <= 0 for automatic");
  cmd_dec->add_option("--mode", dec.mode, "stabilization rule")
      ->check(CLI::IsMember({"classic", "revised", "none"}));
  cmd_dec->add_option("--max-sweeps", dec.max_sweeps, "sweep cap")->check(CLI::PositiveNumber);
  cmd_dec->add_option("--step-tol", dec.step_tol, "step-norm stopping tolerance");
  cmd_dec->add_option("--kkt-tol", dec.kkt_tol, "stationarity stopping tolerance");
  cmd_dec->add_option("--seed", dec.seed, "random-initialization seed");
  cmd_dec->add_option("--init", dec.init, "initialization strategy")
      ->check(CLI::IsMember({"hosvd", "random"}));
  cmd_dec->add_flag("--no-truncation", dec.no_truncation, "keep small diagonal values");
  cmd_dec->add_option("--out", dec.out, "output directory (default: LROTA_OUT_DIR or .)");
  cmd_dec->add_option("--json-report", dec.json_report, "write a JSON summary here");

  VerifyArgs ver;
  CLI::App* cmd_ver = app.add_subcommand("verify", "run the seeded invariant battery");
  cmd_ver->add_option("--seed", ver.seed, "base seed for every suite");
  cmd_ver->add_option("--only", ver.only, "run only the named checks")->delimiter(',');
  cmd_ver->add_flag("--negative-control", ver.negative_control,
                    "corrupt one trace first; the battery must then fail");
  cmd_ver->add_option("--json-report", ver.json_report, "write the verdict as JSON here");

  BenchmarkArgs ben;
  CLI::App* cmd_ben = app.add_subcommand("benchmark", "run a campaign from a JSON config");
  cmd_ben->add_option("--config", ben.config, "experiment config file")->required();
  cmd_ben->add_option("--out", ben.out, "output directory override");
  cmd_ben->add_option("--json-report", ben.json_report, "aggregate report path");
  cmd_ben->add_option("--threads", ben.threads, "worker threads, 0 for hardware default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_dec->parsed()) return run_decompose(dec);
    if (cmd_ver->parsed()) return run_verify(ver);
    return run_benchmark(ben);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "smkl/cli.hpp"
#include "smkl/oracle.hpp"
#include "smkl/strata.hpp"
#include "smkl/support.hpp"

namespace smkl::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ContractViolation(msg); }

class PhaseTimer {
 public:
  void start(const std::string& phase) {
    stop();
    phase_ = phase;
    begin_ = std::chrono::steady_clock::now();
  }
  void stop() {
    if (phase_.empty()) return;
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin_).count();
    timings_[phase_] = ms;
    phase_.clear();
  }
  const json& timings() {
    stop();
    return timings_;
  }

 private:
  std::string phase_;
  std::chrono::steady_clock::time_point begin_;
  json timings_ = json::object();
};

json to_json(const SolverConfig& c) {
  return {{"tau_factor", c.tau_factor},
          {"max_iters", c.max_iters},
          {"stop_tol", c.stop_tol},
          {"record_trace", c.record_trace},
          {"trace_stride", c.trace_stride}};
}

json one_based(const GroupSet& s) {
  json a = json::array();
  for (Index g : s.indices()) a.push_back(g + 1);
  return a;
}

void write_manifest(const fs::path& dir, const std::string& command, json config, std::uint64_t seed,
                    const std::vector<fs::path>& outputs, PhaseTimer& timer) {
  json m;
  m["command"] = command;
  m["version"] = kVersion;
  m["master_seed"] = seed;
  m["config"] = std::move(config);
  json outs = json::array();
  for (const auto& p : outputs) outs.push_back(p.string());
  m["outputs"] = outs;
  m["timings_ms"] = timer.timings();
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
  std::string config;
  std::string example;
  std::string preset;
  std::optional<int> index;
  std::optional<std::uint64_t> seed;
  std::optional<int> iters;
  std::optional<double> lambda;
  std::optional<double> tau_factor;
  std::optional<double> stop_tol;
  int trace_stride = 1;
  bool trace = false;
  std::string reference = "long-run";
  std::string out_dir = "smkl-out";
  bool dry_run = false;
  int jobs = 0;
};

// G = 1, X_1 = 1, y = 1, lambda = 1: unique solution 0, yet IKTA started
// at alpha0 > 0 with tau in (0, 1) keeps a nonzero iterate forever.
ProblemInstance paper_1d_problem() {
  Matrix x(1, 1);
  x(0, 0) = 1.0;
  Vector y(1);
  y[0] = 1.0;
  // lambda_max(K) = 1 exactly; no safety factor so tau_factor = tau.
  GramBlocks gram({Matrix::Ones(1, 1)}, 1.0, {1});
  return ProblemInstance(Dataset(x, y), std::move(gram), 1.0);
}

int cmd_solve(const SolveOptions& o, std::ostream& out) {
  PhaseTimer timer;
  timer.start("setup");

  std::optional<ProblemInstance> problem;
  SolverConfig solver;
  DualCoefficients alpha0;
  json config_echo;
  std::uint64_t seed = 0;
  int reference_factor = 10;
  std::string reference = o.reference;

  if (!o.example.empty()) {
    if (o.example != "paper-1d") fail("unknown --example '" + o.example + "' (expected paper-1d)");
    problem.emplace(paper_1d_problem());
    solver.tau_factor = 0.5;
    solver.max_iters = 50;
    alpha0 = DualCoefficients{Matrix::Ones(1, 1)};
    reference = "oracle";
    config_echo["example"] = o.example;
  } else {
    ExperimentConfig base;
    if (!o.preset.empty()) {
      auto p = preset(o.preset);
      if (!p) fail("unknown --preset '" + o.preset + "'");
      base = *p;
    } else if (o.config.empty()) {
      fail("missing --config (or --example / --preset)");
    }
    FileConfig cfg;
    cfg.experiment = base;
    if (!o.config.empty()) cfg = load_config(o.config, base);
    if (o.seed) cfg.experiment.master_seed = *o.seed;
    if (o.lambda) cfg.experiment.lambda = *o.lambda;
    reference_factor = cfg.experiment.reference_factor;
    seed = cfg.experiment.master_seed;

    if (cfg.problem) {
      DataProblem dp = *cfg.problem;
      if (o.lambda) dp.lambda = *o.lambda;
      Dataset data = read_dataset_csv(dp.data);
      GramBlocks gram = assemble_gram_blocks(data, dp.kernel);
      problem.emplace(std::move(data), std::move(gram), dp.lambda, dp.convention);
      config_echo["problem"] = {{"data", dp.data.string()}, {"lambda", dp.lambda},
                                {"lambda_convention", to_string(dp.convention)}};
    } else {
      const int index = o.index.value_or(cfg.instance_index);
      cfg.experiment.validate();
      if (index < 0 || index >= cfg.experiment.n_instances)
        fail("problem.index must lie in [0, n_instances)");
      problem.emplace(generate_instance(cfg.experiment, index).problem);
      config_echo["experiment"] = smkl::to_json(cfg.experiment);
      config_echo["index"] = index;
    }
    if (cfg.has_solver_section) {
      solver = cfg.solver;
    } else {
      solver.tau_factor = cfg.experiment.tau_factor;
      solver.max_iters = cfg.experiment.iters;
    }
    alpha0 = DualCoefficients::zeros(problem->num_samples(), problem->num_groups());
  }
  if (o.iters) solver.max_iters = *o.iters;
  if (o.tau_factor) solver.tau_factor = *o.tau_factor;
  if (o.stop_tol) solver.stop_tol = *o.stop_tol;
  solver.record_trace = true;
  solver.trace_stride = o.trace_stride;
  solver.validate();
  if (reference != "long-run" && reference != "oracle")
    fail("--reference must be long-run or oracle");
  config_echo["solver"] = to_json(solver);
  config_echo["reference"] = reference;

  if (o.dry_run) {
    out << config_echo.dump(2) << '\n';
    return kOk;
  }

  timer.start("solve");
  const SolveResult run = solve(*problem, solver, alpha0);

  timer.start("reference");
  DualCoefficients ref_alpha;
  if (reference == "oracle") {
    ref_alpha = enumerate_solve(*problem).alpha;
  } else {
    ref_alpha = solve(*problem, reference_config(solver, reference_factor), alpha0).alpha;
  }
  const SupportReport report = qualification_check(ref_alpha, *problem);
  const int burn_in = last_support_change(run.trace);
  const SandwichVerdict verdict = sandwich_check(run.trace, report, burn_in);

  timer.start("write");
  std::ostringstream text;
  text << std::setprecision(17);
  text << "iters_run=" << run.trace.iters_run << '\n';
  text << "final_step_norm=" << run.trace.final_step_norm << '\n';
  text << "objective=" << objective(run.alpha, *problem) << '\n';
  text << "supp=" << support_of(run.alpha).to_string() << '\n';
  text << "reference=" << reference << '\n';
  text << "reference_supp=" << report.support.to_string() << '\n';
  text << "reference_objective=" << objective(ref_alpha, *problem) << '\n';
  text << "esupp=" << report.extended_support.to_string() << '\n';
  text << "qc_holds=" << (report.qc_holds ? "true" : "false") << '\n';
  text << "qc_margin=" << report.qc_margin << '\n';
  text << "certificate_norms=";
  for (Index g = 0; g < report.certificate_norms.size(); ++g)
    text << (g ? "," : "") << report.certificate_norms[g];
  text << '\n';
  text << "last_support_change=" << burn_in << '\n';
  text << "sandwich=" << (verdict.pass ? "pass" : "fail") << '\n';
  if (verdict.failing_iteration) text << "sandwich_failure_iter=" << *verdict.failing_iteration << '\n';
  out << text.str();

  const fs::path dir(o.out_dir);
  ensure_dir(dir);
  std::vector<fs::path> outputs{dir / "report.txt"};
  write_file_atomic(outputs.back(), text.str());
  if (o.trace) {
    std::ostringstream lines;
    for (std::size_t k = 0; k < run.trace.size(); ++k) {
      json rec{{"run", 0},
               {"iter", run.trace.iterations[k]},
               {"support", one_based(run.trace.supports[k])},
               {"objective", run.trace.objectives[k]}};
      lines << rec.dump() << '\n';
    }
    outputs.push_back(dir / "trace.jsonl");
    write_file_atomic(outputs.back(), lines.str());
  }
  outputs.push_back(dir / "manifest.json");
  write_manifest(dir, "solve", config_echo, seed, outputs, timer);
  return kOk;
}

// ---------------------------------------------------------------- batch

struct BatchCliOptions {
  std::string config;
  std::string preset;
  std::optional<int> instances;
  std::optional<int> iters;
  std::optional<double> lambda;
  std::optional<double> tau_factor;
  std::optional<std::uint64_t> seed;
  std::optional<int> reference_factor;
  std::vector<std::size_t> trace_sizes;
  bool traces = false;
  int jobs = 0;
  std::string out_dir = "smkl-out";
  bool dry_run = false;
};

int cmd_batch(const BatchCliOptions& o, std::ostream& out) {
  PhaseTimer timer;
  timer.start("setup");
  ExperimentConfig config;
  if (!o.preset.empty()) {
    auto p = preset(o.preset);
    if (!p) fail("unknown --preset '" + o.preset + "' (expected group-lasso-paper|gaussian-kernel-paper)");
    config = *p;
  } else if (o.config.empty()) {
    fail("missing --config (or --preset)");
  }
  if (!o.config.empty()) {
    FileConfig cfg = load_config(o.config, config);
    if (cfg.problem) fail("[problem] data files are only used by `solve`");
    config = cfg.experiment;
  }
  if (o.instances) config.n_instances = *o.instances;
  if (o.iters) config.iters = *o.iters;
  if (o.lambda) config.lambda = *o.lambda;
  if (o.tau_factor) config.tau_factor = *o.tau_factor;
  if (o.seed) config.master_seed = *o.seed;
  if (o.reference_factor) config.reference_factor = *o.reference_factor;
  if (o.jobs < 0) fail("--jobs must be >= 0");
  config.validate();

  json echo = smkl::to_json(config);
  if (o.dry_run) {
    out << echo.dump(2) << '\n';
    return kOk;
  }

  timer.start("batch");
  BatchOptions bo;
  bo.jobs = o.jobs;
  bo.keep_traces = o.traces || !o.trace_sizes.empty();
  const BatchResult result = run_batch(config, bo);

  timer.start("write");
  const fs::path dir(o.out_dir);
  ensure_dir(dir);
  std::vector<fs::path> outputs{dir / "histogram.csv", dir / "summary.json"};
  emit_histogram(result, outputs[0]);
  write_file_atomic(outputs[1], batch_summary(config, result).dump(2) + "\n");
  if (bo.keep_traces) {
    outputs.push_back(dir / "traces.jsonl");
    std::optional<std::vector<std::size_t>> filter;
    if (!o.trace_sizes.empty()) filter = o.trace_sizes;
    emit_traces(result, outputs.back(), filter);
  }

  int sandwich_pass = 0;
  int qc = 0;
  for (const auto& r : result.per_run) {
    sandwich_pass += r.sandwich_pass ? 1 : 0;
    qc += r.qc_holds ? 1 : 0;
  }
  out << "family=" << to_string(config.family) << " instances=" << config.n_instances
      << " iters=" << config.iters << '\n';
  out << histogram_csv(result.histogram);
  out << "sandwich_pass=" << sandwich_pass << '/' << result.per_run.size() << '\n';
  out << "qc_holds=" << qc << '/' << result.per_run.size() << '\n';

  outputs.push_back(dir / "manifest.json");
  write_manifest(dir, "batch", echo, config.master_seed, outputs, timer);
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  int lattice_groups = 8;
  std::string oracle_suite = "small";
  std::uint64_t seed = 7;
};

bool oracle_suite_small(std::uint64_t seed, std::ostream& out) {
  constexpr int kInstances = 20;
  int agree_enum = 0;
  int agree_bcd = 0;
  int skipped = 0;
  for (int i = 0; i < kInstances; ++i) {
    const ProblemInstance problem = random_small_group_lasso(instance_seed(seed, i));
    SolverConfig cfg;
    cfg.max_iters = 1000000;
    cfg.stop_tol = 1e-12;
    const double f_ikta = objective(solve(problem, cfg).alpha, problem);
    try {
      const double f_enum = enumerate_solve(problem).objective;
      const double f_bcd = bcd_solve(problem).objective;
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
      agree_enum += rel(f_ikta, f_enum) <= 1e-6 ? 1 : 0;
      agree_bcd += rel(f_bcd, f_enum) <= 1e-8 ? 1 : 0;
    } catch (const OracleFailure& e) {
      ++skipped;
      out << "  instance " << i << ": oracle skipped (" << e.what() << ")\n";
    }
  }
  const int ran = kInstances - skipped;
  const bool ok_enum = agree_enum == ran && ran > 0;
  const bool ok_bcd = agree_bcd == ran && ran > 0;
  out << "oracle ikta-vs-enumerate: " << (ok_enum ? "pass" : "fail") << " (" << agree_enum << '/' << ran << ")\n";
  out << "oracle bcd-vs-enumerate: " << (ok_bcd ? "pass" : "fail") << " (" << agree_bcd << '/' << ran << ")\n";
  return ok_enum && ok_bcd;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  if (o.lattice_groups < 1 || o.lattice_groups > kMaxLatticeGroups)
    fail("--lattice-G must lie in [1, 16]");
  if (o.oracle_suite != "small" && o.oracle_suite != "none")
    fail("--oracle-suite must be small or none");
  bool all = true;
  const LatticeVerdict v = verify_lattice(o.lattice_groups);
  out << "lattice G=" << o.lattice_groups << ": " << v.describe() << '\n';
  all = all && v.pass;
  if (o.oracle_suite == "small") all = oracle_suite_small(o.seed, out) && all;
  return all ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"smkl: sparse multiple kernel learning with iterative kernel thresholding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SolveOptions so;
  auto* solve_cmd = app.add_subcommand("solve", "Run IKTA on one problem and report supports");
  solve_cmd->add_option("--config", so.config, "Config file");
  solve_cmd->add_option("--example", so.example, "Built-in example (paper-1d)");
  solve_cmd->add_option("--preset", so.preset, "Experiment preset used to generate the instance");
  solve_cmd->add_option("--index", so.index, "Instance index for generated problems");
  solve_cmd->add_option("--seed", so.seed, "Override master_seed");
  solve_cmd->add_option("--iters", so.iters, "Override max_iters");
  solve_cmd->add_option("--lambda", so.lambda, "Override lambda");
  solve_cmd->add_option("--tau-factor", so.tau_factor, "Override tau_factor");
  solve_cmd->add_option("--stop-tol", so.stop_tol, "Stop once ||w^{n+1}-w^n||_H <= tol");
  solve_cmd->add_option("--trace-stride", so.trace_stride, "Record every k-th iterate");
  solve_cmd->add_flag("--trace", so.trace, "Write trace.jsonl");
  solve_cmd->add_option("--reference", so.reference, "Reference solution: long-run|oracle");
  solve_cmd->add_option("--out-dir", so.out_dir, "Output directory");
  solve_cmd->add_option("--jobs", so.jobs, "Worker threads (unused by solve)");
  solve_cmd->add_flag("--dry-run", so.dry_run, "Print the resolved config and exit");

  BatchCliOptions bo;
  auto* batch_cmd = app.add_subcommand("batch", "Run a synthetic experiment batch");
  batch_cmd->add_option("--config", bo.config, "Config file");
  batch_cmd->add_option("--preset", bo.preset, "group-lasso-paper|gaussian-kernel-paper");
  batch_cmd->add_option("--instances", bo.instances, "Override n_instances");
  batch_cmd->add_option("--iters", bo.iters, "Override iters");
  batch_cmd->add_option("--lambda", bo.lambda, "Override lambda");
  batch_cmd->add_option("--tau-factor", bo.tau_factor, "Override tau_factor");
  batch_cmd->add_option("--seed", bo.seed, "Override master_seed");
  batch_cmd->add_option("--reference-factor", bo.reference_factor, "Reference budget multiplier");
  batch_cmd->add_option("--trace-sizes", bo.trace_sizes, "Write traces of runs ending with these support sizes")
      ->delimiter(',');
  batch_cmd->add_flag("--traces", bo.traces, "Write traces of every run");
  batch_cmd->add_option("--jobs", bo.jobs, "Worker threads (0: default)");
  batch_cmd->add_option("--out-dir", bo.out_dir, "Output directory");
  batch_cmd->add_flag("--dry-run", bo.dry_run, "Print the resolved config and exit");

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify", "Strata lattice and oracle self-checks");
  verify_cmd->add_option("--lattice-G", vo.lattice_groups, "Number of groups for the lattice check");
  verify_cmd->add_option("--oracle-suite", vo.oracle_suite, "small|none");
  verify_cmd->add_option("--seed", vo.seed, "Seed for the oracle suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (*solve_cmd) return cmd_solve(so, out);
    if (*batch_cmd) return cmd_batch(bo, out);
    return cmd_verify(vo, out);
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const SolverDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const BatchAborted& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const PowerIterationError& e) {
    err << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const OracleFailure& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace smkl::cli

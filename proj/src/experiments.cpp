#include "smkl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <sstream>

#include "smkl/strata.hpp"

namespace smkl {

using detail::require;

std::string to_string(Family f) { return f == Family::group_lasso ? "group-lasso" : "gaussian-kernel"; }

Family family_from_string(const std::string& s) {
  if (s == "group-lasso" || s == "group_lasso" || s == "GroupLasso") return Family::group_lasso;
  if (s == "gaussian-kernel" || s == "gaussian_kernel" || s == "GaussianKernel") return Family::gaussian_kernel;
  throw ContractViolation("unknown experiment family '" + s + "' (expected group-lasso|gaussian-kernel)");
}

void ExperimentConfig::validate() const {
  require(m >= 1, "experiment.m must be >= 1");
  require(groups >= 1, "experiment.G must be >= 1");
  require(s >= 0 && s <= groups, "experiment.s must lie in [0, G]");
  require(std::isfinite(lambda) && lambda > 0.0, "experiment.lambda must be positive");
  require(p >= 1, "experiment.p must be >= 1");
  require(noise_std >= 0.0 && std::isfinite(noise_std), "experiment.noise_std must be >= 0");
  require(n_instances >= 1, "experiment.n_instances must be >= 1");
  require(iters >= 1, "experiment.iters must be >= 1");
  require(tau_factor > 0.0 && tau_factor < 2.0, "experiment.tau_factor must lie in (0, 2)");
  require(reference_factor >= 1, "experiment.reference_factor must be >= 1");
  if (family == Family::group_lasso) {
    const auto dims = resolved_group_dims();
    int total = 0;
    for (int d : dims) {
      require(d >= 1, "experiment.group_dims entries must be >= 1");
      total += d;
    }
    require(total == p, "experiment.group_dims must sum to p");
  } else {
    require(sigma_lo > 0.0 && sigma_hi >= sigma_lo && std::isfinite(sigma_hi),
            "experiment.sigma_range must satisfy 0 < lo <= hi");
  }
}

std::vector<int> ExperimentConfig::resolved_group_dims() const {
  if (!group_dims.empty()) {
    require(static_cast<int>(group_dims.size()) == groups, "experiment.group_dims must have G entries");
    return group_dims;
  }
  require(groups >= 1 && p % groups == 0, "experiment.p must be divisible by G when group_dims is omitted");
  return std::vector<int>(static_cast<std::size_t>(groups), p / groups);
}

SolverConfig ExperimentConfig::solver_config() const {
  SolverConfig c;
  c.tau_factor = tau_factor;
  c.max_iters = iters;
  c.stop_tol = 0.0;
  c.record_trace = true;
  c.trace_stride = 1;
  return c;
}

ExperimentConfig ExperimentConfig::group_lasso_paper() { return {}; }

ExperimentConfig ExperimentConfig::gaussian_kernel_paper() {
  ExperimentConfig c;
  c.family = Family::gaussian_kernel;
  c.p = 2;
  c.iters = 50000;
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["family"] = to_string(c.family);
  j["m"] = c.m;
  j["G"] = c.groups;
  j["s"] = c.s;
  j["lambda"] = c.lambda;
  j["lambda_convention"] = to_string(c.lambda_convention);
  j["p"] = c.p;
  if (c.family == Family::group_lasso) j["group_dims"] = c.resolved_group_dims();
  else j["sigma_range"] = {c.sigma_lo, c.sigma_hi};
  j["noise_std"] = c.noise_std;
  j["n_instances"] = c.n_instances;
  j["iters"] = c.iters;
  j["tau_factor"] = c.tau_factor;
  j["master_seed"] = c.master_seed;
  j["reference_factor"] = c.reference_factor;
  return j;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t instance_seed(std::uint64_t master_seed, int index) {
  return splitmix64(splitmix64(master_seed) + static_cast<std::uint64_t>(index));
}

GeneratedInstance generate_instance(const ExperimentConfig& config, int index) {
  config.validate();
  require(index >= 0 && index < config.n_instances, "instance index out of range");
  const std::uint64_t seed = instance_seed(config.master_seed, index);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix points(config.m, config.p);
  for (Index i = 0; i < points.rows(); ++i)
    for (Index j = 0; j < points.cols(); ++j) points(i, j) = normal(rng);

  std::vector<double> sigmas;
  KernelSpec spec;
  if (config.family == Family::gaussian_kernel) {
    std::uniform_real_distribution<double> log_sigma(std::log(config.sigma_lo), std::log(config.sigma_hi));
    for (int g = 0; g < config.groups; ++g) sigmas.push_back(std::exp(log_sigma(rng)));
    spec = GaussianFamily{sigmas};
  } else {
    spec = LinearGroupProjection{config.resolved_group_dims()};
  }

  // Partial Fisher-Yates for s distinct groups.
  std::vector<Index> order(static_cast<std::size_t>(config.groups));
  for (std::size_t g = 0; g < order.size(); ++g) order[g] = static_cast<Index>(g);
  for (int k = 0; k < config.s; ++k) {
    std::uniform_int_distribution<int> pick(k, config.groups - 1);
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
  }
  GroupSet support(std::vector<Index>(order.begin(), order.begin() + config.s));

  DualCoefficients alpha_star = DualCoefficients::zeros(config.m, config.groups);
  for (Index g : support.indices())
    for (Index i = 0; i < config.m; ++i) alpha_star.alpha(i, g) = normal(rng);

  Vector noise(config.m);
  for (Index i = 0; i < config.m; ++i) noise[i] = config.noise_std * normal(rng);

  // The kernel only depends on the points, so a placeholder response is fine
  // while assembling.
  GramBlocks gram = assemble_gram_blocks(Dataset(points, Vector::Zero(config.m)), spec);
  const Vector clean = residual(alpha_star, gram, Vector::Zero(config.m));
  Vector y = clean + noise;

  ProblemInstance problem(Dataset(std::move(points), std::move(y)), std::move(gram), config.lambda,
                          config.lambda_convention);
  return {std::move(problem), std::move(alpha_star), std::move(support), std::move(sigmas), seed};
}

namespace {

// lambda = f * max_g ||X_g^* y|| with f log-uniform on [0.05, 2].
ProblemInstance planted_problem(std::mt19937_64& rng, Matrix points, const KernelSpec& spec) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution keep(0.5);
  std::uniform_real_distribution<double> log_fraction(std::log(0.05), std::log(2.0));
  const Index m = points.rows();
  GramBlocks gram = assemble_gram_blocks(Dataset(points, Vector::Zero(m)), spec);
  DualCoefficients planted = DualCoefficients::zeros(m, gram.num_groups());
  for (Index g = 0; g < gram.num_groups(); ++g)
    if (keep(rng))
      for (Index i = 0; i < m; ++i) planted.alpha(i, g) = normal(rng);
  Vector y = residual(planted, gram, Vector::Zero(m));
  for (Index i = 0; i < m; ++i) y[i] += 1e-2 * normal(rng);
  double top = 0.0;
  for (Index g = 0; g < gram.num_groups(); ++g) top = std::max(top, group_dual_norm(y, gram.block(g)));
  if (top == 0.0) top = 1.0;
  const double lambda = std::exp(log_fraction(rng)) * top;
  return ProblemInstance(Dataset(std::move(points), std::move(y)), std::move(gram), lambda);
}

}  // namespace

ProblemInstance random_small_group_lasso(std::uint64_t seed) {
  std::mt19937_64 rng(instance_seed(seed, 0));
  std::uniform_int_distribution<int> pick_m(4, 10), pick_groups(2, 5), pick_dim(1, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int m = pick_m(rng);
  const int groups = pick_groups(rng);
  std::vector<int> dims;
  int p = 0;
  for (int g = 0; g < groups; ++g) {
    dims.push_back(pick_dim(rng));
    p += dims.back();
  }
  Matrix points(m, p);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < p; ++j) points(i, j) = normal(rng);
  return planted_problem(rng, std::move(points), LinearGroupProjection{dims});
}

ProblemInstance random_small_gaussian(std::uint64_t seed, int m, int groups) {
  require(m >= 1 && groups >= 1, "random_small_gaussian: bad sizes");
  std::mt19937_64 rng(instance_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_sigma(std::log(0.1), std::log(10.0));
  Matrix points(m, 2);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < 2; ++j) points(i, j) = normal(rng);
  std::vector<double> sigmas;
  for (int g = 0; g < groups; ++g) sigmas.push_back(std::exp(log_sigma(rng)));
  return planted_problem(rng, std::move(points), GaussianFamily{sigmas});
}

BatchAborted::BatchAborted(int index, const std::string& reason)
    : std::runtime_error("batch aborted at instance " + std::to_string(index) + ": " + reason),
      index_(index) {}

RunRecord run_instance(const GeneratedInstance& instance, const ExperimentConfig& config, int index,
                       SolveTrace* trace_out) {
  const ProblemInstance& problem = instance.problem;
  const SolverConfig solver = config.solver_config();
  // Inner kernels stay serial; instances are the unit of parallelism.
  SolveResult run = solve(problem, solver, Execution::serial);
  const SolveResult ref = solve(problem, reference_config(solver, config.reference_factor), Execution::serial);
  const SupportReport report = qualification_check(ref.alpha, problem);

  RunRecord rec;
  rec.index = index;
  rec.seed = instance.seed;
  rec.final_support = support_of(run.alpha);
  rec.final_objective = objective(run.alpha, problem);
  rec.final_step_norm = run.trace.final_step_norm;
  rec.true_support = instance.true_support;
  rec.reference_support = report.support;
  rec.reference_esupp = report.extended_support;
  rec.qc_margin = report.qc_margin;
  rec.qc_holds = report.qc_holds;
  rec.last_support_change = last_support_change(run.trace);
  const SandwichVerdict verdict = sandwich_check(run.trace, report, rec.last_support_change);
  rec.sandwich_pass = verdict.pass;
  rec.sandwich_failure = verdict.failing_iteration;

  // Same statement on the strata lattice; the dual stratum clamps tiny
  // overshoots of the unit ball from the approximate reference.
  Vector clamped = report.certificate_norms.cwiseMin(1.0);
  const SandwichVerdict lattice = stratum_sandwich(
      run.trace, primal_stratum_of(report.support, problem.num_groups()), dual_stratum_of(clamped),
      rec.last_support_change);
  rec.stratum_sandwich_pass = lattice.pass;

  if (trace_out) *trace_out = std::move(run.trace);
  return rec;
}

BatchResult run_batch(const ExperimentConfig& config, const BatchOptions& options) {
  config.validate();
  const int n = config.n_instances;
  std::vector<RunRecord> records(static_cast<std::size_t>(n));
  std::vector<SolveTrace> traces(options.keep_traces ? static_cast<std::size_t>(n) : 0);
  std::vector<std::string> errors(static_cast<std::size_t>(n));
  std::vector<char> failed(static_cast<std::size_t>(n), 0);

  const bool parallel = options.exec == Execution::parallel;
  const int jobs = options.jobs > 0 ? options.jobs : 0;
  auto body = [&](int i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const GeneratedInstance inst = generate_instance(config, i);
      records[k] = run_instance(inst, config, i, options.keep_traces ? &traces[k] : nullptr);
    } catch (const std::exception& e) {
      failed[k] = 1;
      errors[k] = e.what();
    }
  };
  if (parallel && jobs > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (int i = 0; i < n; ++i) body(i);
  } else if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) body(i);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
  for (int i = 0; i < n; ++i)
    if (failed[static_cast<std::size_t>(i)]) throw BatchAborted(i, errors[static_cast<std::size_t>(i)]);

  BatchResult result;
  for (const RunRecord& r : records) ++result.histogram[r.final_support.size()];
  result.per_run = std::move(records);
  result.traces = std::move(traces);
  return result;
}

std::string histogram_csv(const std::map<std::size_t, int>& histogram) {
  std::ostringstream out;
  out << "support_size,count\n";
  for (const auto& [size, count] : histogram) out << size << ',' << count << '\n';
  return out.str();
}

std::map<std::size_t, int> parse_histogram_csv(std::istream& in) {
  std::map<std::size_t, int> h;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line == "support_size,count") continue;
    }
    const auto comma = line.find(',');
    require(comma != std::string::npos, "histogram csv: malformed line '" + line + "'");
    h[std::stoul(line.substr(0, comma))] += std::stoi(line.substr(comma + 1));
  }
  return h;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void emit_histogram(const BatchResult& result, const std::filesystem::path& path) {
  write_file_atomic(path, histogram_csv(result.histogram));
}

namespace {
nlohmann::json one_based(const GroupSet& s) {
  nlohmann::json a = nlohmann::json::array();
  for (Index g : s.indices()) a.push_back(g + 1);
  return a;
}
}  // namespace

void emit_traces(const BatchResult& result, const std::filesystem::path& path,
                 const std::optional<std::vector<std::size_t>>& final_sizes) {
  require(result.traces.size() == result.per_run.size(), "emit_traces: batch was run without traces");
  std::ostringstream out;
  for (std::size_t k = 0; k < result.per_run.size(); ++k) {
    const RunRecord& run = result.per_run[k];
    if (final_sizes && std::find(final_sizes->begin(), final_sizes->end(), run.final_support.size()) ==
                           final_sizes->end())
      continue;
    const SolveTrace& t = result.traces[k];
    for (std::size_t r = 0; r < t.size(); ++r) {
      nlohmann::json rec;
      rec["run"] = run.index;
      rec["iter"] = t.iterations[r];
      rec["support"] = one_based(t.supports[r]);
      rec["objective"] = t.objectives[r];
      out << rec.dump() << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

nlohmann::json batch_summary(const ExperimentConfig& config, const BatchResult& result) {
  nlohmann::json j;
  j["config"] = to_json(config);
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [size, count] : result.histogram) hist[std::to_string(size)] = count;
  j["histogram"] = hist;
  nlohmann::json runs = nlohmann::json::array();
  for (const RunRecord& r : result.per_run) {
    nlohmann::json x;
    x["index"] = r.index;
    x["seed"] = r.seed;
    x["final_support"] = one_based(r.final_support);
    x["final_objective"] = r.final_objective;
    x["final_step_norm"] = r.final_step_norm;
    x["true_support"] = one_based(r.true_support);
    x["reference_support"] = one_based(r.reference_support);
    x["reference_esupp"] = one_based(r.reference_esupp);
    x["qc_margin"] = r.qc_margin;
    x["qc_holds"] = r.qc_holds;
    x["last_support_change"] = r.last_support_change;
    x["sandwich"] = r.sandwich_pass ? "pass" : "fail";
    if (r.sandwich_failure) x["sandwich_failure_iter"] = *r.sandwich_failure;
    runs.push_back(std::move(x));
  }
  j["per_run"] = std::move(runs);
  return j;
}

}  // namespace smkl

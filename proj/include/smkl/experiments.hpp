#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "smkl/core.hpp"
#include "smkl/group_set.hpp"
#include "smkl/kernels.hpp"
#include "smkl/solver.hpp"
#include "smkl/support.hpp"

namespace smkl {

enum class Family { group_lasso, gaussian_kernel };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Synthetic sparse-MKL experiment.  Defaults are the group-lasso setting:
/// (m, G, s, lambda) = (50, 20, 5, 0.2), p = 100 in groups of 5, noise
/// 1e-2, tau = 0.8 / L, 5000 iterations, 200 instances.
struct ExperimentConfig {
  Family family = Family::group_lasso;
  int m = 50;
  int groups = 20;
  int s = 5;
  double lambda = 0.2;
  LambdaConvention lambda_convention = LambdaConvention::raw;
  int p = 100;
  std::vector<int> group_dims;  ///< group lasso; empty means p / G each
  double sigma_lo = 0.1;        ///< gaussian kernel bandwidth range
  double sigma_hi = 10.0;
  double noise_std = 1e-2;
  int n_instances = 200;
  int iters = 5000;
  double tau_factor = 0.8;
  std::uint64_t master_seed = 0x5EED'2018'0001ULL;
  int reference_factor = 10;  ///< reference run uses this many times `iters`

  void validate() const;
  /// group_dims with the p / G default filled in.
  std::vector<int> resolved_group_dims() const;
  SolverConfig solver_config() const;

  static ExperimentConfig group_lasso_paper();
  static ExperimentConfig gaussian_kernel_paper();
};

nlohmann::json to_json(const ExperimentConfig& c);

/// Per-instance seed: splitmix64(splitmix64(master_seed) + index).
std::uint64_t instance_seed(std::uint64_t master_seed, int index);

struct GeneratedInstance {
  ProblemInstance problem;
  DualCoefficients alpha_star;
  GroupSet true_support;
  std::vector<double> sigmas;  ///< gaussian kernel only
  std::uint64_t seed;
};

/// Draws one instance from its own generator, seeded from (master_seed,
/// index).  Draw order: points (row-major), sigmas, support groups, alpha_*
/// entries group by group, noise.
GeneratedInstance generate_instance(const ExperimentConfig& config, int index);

/// Random desk-scale group-lasso problem for oracle comparisons: m in
/// [4, 10], G in [2, 5], d_g in [1, 3], a planted signal on a random subset
/// of groups plus 1e-2 noise, and lambda = f * max_g ||X_g^T y|| with f
/// log-uniform on [0.05, 2].
ProblemInstance random_small_group_lasso(std::uint64_t seed);

/// Same construction with Gaussian kernels (p = 2, sigma log-uniform on
/// [0.1, 10]) and fixed m, G.
ProblemInstance random_small_gaussian(std::uint64_t seed, int m, int groups);

struct RunRecord {
  int index = 0;
  std::uint64_t seed = 0;
  GroupSet final_support;
  double final_objective = 0.0;
  double final_step_norm = 0.0;
  GroupSet true_support;
  GroupSet reference_support;
  GroupSet reference_esupp;
  double qc_margin = 0.0;
  bool qc_holds = false;
  int last_support_change = 0;
  bool sandwich_pass = false;
  std::optional<int> sandwich_failure;
  bool stratum_sandwich_pass = false;
};

struct BatchResult {
  std::map<std::size_t, int> histogram;  ///< support size -> count
  std::vector<RunRecord> per_run;        ///< ordered by index
  std::vector<SolveTrace> traces;        ///< empty unless kept
};

struct BatchOptions {
  int jobs = 0;             ///< 0: OpenMP default
  bool keep_traces = false;
  Execution exec = Execution::parallel;
};

class BatchAborted : public std::runtime_error {
 public:
  BatchAborted(int index, const std::string& reason);
  int index() const { return index_; }

 private:
  int index_;
};

/// Generates, solves and analyses every instance.  Results do not depend on
/// the number of workers.
BatchResult run_batch(const ExperimentConfig& config, const BatchOptions& options = {});

/// Analysis of one already-generated instance (what run_batch does per index).
RunRecord run_instance(const GeneratedInstance& instance, const ExperimentConfig& config,
                       int index, SolveTrace* trace_out = nullptr);

/// CSV `support_size,count`, ascending.
std::string histogram_csv(const std::map<std::size_t, int>& histogram);
std::map<std::size_t, int> parse_histogram_csv(std::istream& in);
void emit_histogram(const BatchResult& result, const std::filesystem::path& path);

/// JSON lines {run, iter, support, objective}, support 1-based.  When
/// `final_sizes` is given only runs whose final support size is listed are
/// written.
void emit_traces(const BatchResult& result, const std::filesystem::path& path,
                 const std::optional<std::vector<std::size_t>>& final_sizes = std::nullopt);

nlohmann::json batch_summary(const ExperimentConfig& config, const BatchResult& result);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `contents` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace smkl

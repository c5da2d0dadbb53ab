#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smkl/experiments.hpp"
#include "smkl/kernels.hpp"
#include "smkl/solver.hpp"

namespace smkl::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kDiverged = 2,
  kIo = 3,
  kCheckFailed = 4,
};

/// User-supplied dataset for `solve`: CSV rows x_1..x_p,y.
struct DataProblem {
  std::filesystem::path data;
  KernelSpec kernel;
  double lambda = 0.0;
  LambdaConvention convention = LambdaConvention::raw;
};

/// Everything a config file can set.  Absent sections keep defaults.
struct FileConfig {
  ExperimentConfig experiment;
  SolverConfig solver;
  bool has_solver_section = false;
  std::optional<DataProblem> problem;  ///< [problem] with a data file
  int instance_index = 0;              ///< [problem] index for generated instances
};

/// Parses the sectioned key=value format:
///
///   [experiment]  family, m, G, s, lambda, lambda_convention, p, group_dims,
///                 sigma_lo, sigma_hi, noise_std, n_instances, iters,
///                 tau_factor, master_seed, reference_factor
///   [solver]      tau_factor, max_iters, stop_tol, record_trace, trace_stride
///   [problem]     data, kernel (linear|gaussian), group_dims, sigmas, lambda,
///                 lambda_convention, index
///
/// Unknown sections or keys are rejected.  `base` supplies defaults for
/// [experiment] (e.g. a preset).
FileConfig parse_config(std::istream& in, const ExperimentConfig& base = {});
FileConfig load_config(const std::filesystem::path& path, const ExperimentConfig& base = {});

/// Reads a CSV of x_1..x_p,y rows (an optional non-numeric header is skipped).
Dataset read_dataset_csv(const std::filesystem::path& path);

std::optional<ExperimentConfig> preset(const std::string& name);

/// Entry point behind the `smkl` executable.  args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smkl::cli

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "smkl/core.hpp"
#include "smkl/group_set.hpp"

namespace smkl {

struct SolverConfig {
  double tau_factor = 0.8;  ///< step tau = tau_factor / L, in (0, 2)
  int max_iters = 5000;
  double stop_tol = 0.0;    ///< stop once ||w^{n+1} - w^n||_H <= stop_tol; 0 disables
  bool record_trace = false;
  int trace_stride = 1;

  void validate() const;
};

/// Observables of the iterates w^n.  Record k describes iterate
/// n = iterations[k] >= 1; step_norms[k] is ||w^n - w^{n-1}||_H.
struct SolveTrace {
  std::vector<int> iterations;
  std::vector<GroupSet> supports;
  std::vector<double> objectives;
  std::vector<double> step_norms;
  int iters_run = 0;
  double final_step_norm = 0.0;

  std::size_t size() const { return iterations.size(); }
};

struct SolveResult {
  DualCoefficients alpha;
  SolveTrace trace;
};

class SolverDiverged : public std::runtime_error {
 public:
  explicit SolverDiverged(int iteration);
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

enum class Execution { parallel, serial };

/// Group thresholding in representer coordinates: zero when
/// ||X_g^* a|| <= threshold, otherwise (1 - threshold / ||X_g^* a||) a.
Vector group_threshold(const Eigen::Ref<const Vector>& a, const Matrix& block, double threshold);

/// One IKTA step: alpha_g' = threshold_{lambda tau}(alpha_g - tau (K alpha - y)).
/// The parallel version splits the per-group work across threads and is
/// bit-identical to ikta_step_serial().
DualCoefficients ikta_step(const DualCoefficients& alpha, const ProblemInstance& problem, double tau);
/// Straight transcription of the update, kept as the reference.
DualCoefficients ikta_step_serial(const DualCoefficients& alpha, const ProblemInstance& problem,
                                  double tau);

/// Runs IKTA from alpha0 (zero when omitted).  Throws SolverDiverged if a
/// non-finite value appears.
SolveResult solve(const ProblemInstance& problem, const SolverConfig& config,
                  const DualCoefficients& alpha0, Execution exec = Execution::parallel);
SolveResult solve(const ProblemInstance& problem, const SolverConfig& config,
                  Execution exec = Execution::parallel);

/// Same config with `factor` times the iteration budget, stop_tol 1e-12 and
/// no trace: the long-run reference used for support comparisons.
SolverConfig reference_config(const SolverConfig& config, int factor = 10);

/// First recorded iteration from which the support never changes again
/// (0 for an empty trace).
int last_support_change(const SolveTrace& trace);

}  // namespace smkl

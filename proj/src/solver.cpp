#include "smkl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smkl {

using detail::require;

void SolverConfig::validate() const {
  require(tau_factor > 0.0 && tau_factor < 2.0, "solver.tau_factor must lie in (0, 2)");
  require(max_iters >= 1, "solver.max_iters must be >= 1");
  require(stop_tol >= 0.0 && std::isfinite(stop_tol), "solver.stop_tol must be >= 0");
  require(trace_stride >= 1, "solver.trace_stride must be >= 1");
}

SolverDiverged::SolverDiverged(int iteration)
    : std::runtime_error("solver diverged at iteration " + std::to_string(iteration) +
                         " (non-finite iterate; step size too large?)"),
      iteration_(iteration) {}

Vector group_threshold(const Eigen::Ref<const Vector>& a, const Matrix& block, double threshold) {
  require(threshold > 0.0, "group_threshold: threshold must be positive");
  const double nu = group_dual_norm(a, block);
  if (nu <= threshold) return Vector::Zero(a.size());
  return (1.0 - threshold / nu) * a;
}

namespace {

void check_tau(const ProblemInstance& problem, double tau) {
  require(std::isfinite(tau) && tau > 0.0 && tau < 2.0 / problem.gram().lipschitz(),
          "tau must lie in (0, 2/L)");
}

void check_alpha(const DualCoefficients& alpha, const ProblemInstance& problem) {
  require(alpha.num_samples() == problem.num_samples() &&
              alpha.num_groups() == problem.num_groups(),
          "alpha shape does not match the problem");
}

// Workspace-backed IKTA step.  Per-group products are stored so the step
// norm in H and the new group norms come out without extra matvecs.
class Stepper {
 public:
  Stepper(const ProblemInstance& problem, double tau, Execution exec)
      : problem_(problem),
        tau_(tau),
        threshold_(problem.effective_lambda() * tau),
        parallel_(exec == Execution::parallel) {
    const Index m = problem.num_samples();
    const auto groups = static_cast<std::size_t>(problem.num_groups());
    k_alpha_.assign(groups, Vector::Zero(m));
    shifted_.assign(groups, Vector::Zero(m));
    k_shifted_.assign(groups, Vector::Zero(m));
    nonzero_.assign(groups, 0);
    new_norms_.assign(groups, 0.0);
    step_sq_.assign(groups, 0.0);
    residual_ = Vector::Zero(m);
    // Below this size the fork/join overhead dominates.
    parallel_ = parallel_ && m * m * problem.num_groups() >= 20000;
  }

  /// alpha^n -> alpha^{n+1} in place; returns ||w^{n+1} - w^n||_H.
  /// Afterwards residual() is r(alpha^n).
  double advance(DualCoefficients& alpha) {
    const GramBlocks& gram = problem_.gram();
    const Index groups = gram.num_groups();

    for (Index g = 0; g < groups; ++g) nonzero_[idx(g)] = alpha.group_is_zero(g) ? 0 : 1;

#pragma omp parallel for schedule(static) if (parallel_)
    for (Index g = 0; g < groups; ++g) {
      if (nonzero_[idx(g)]) k_alpha_[idx(g)].noalias() = gram.block(g) * alpha.group(g);
    }
    residual_ = -problem_.y();
    for (Index g = 0; g < groups; ++g)
      if (nonzero_[idx(g)]) residual_ += k_alpha_[idx(g)];

#pragma omp parallel for schedule(static) if (parallel_)
    for (Index g = 0; g < groups; ++g) update_group(alpha, g);

    double total = 0.0;
    for (double s : step_sq_) total += s;
    return std::sqrt(total);
  }

  const Vector& residual() const { return residual_; }

  /// sum_g ||w_g^{n+1}|| from the last advance.
  double penalty() const {
    double s = 0.0;
    for (double v : new_norms_) s += v;
    return s;
  }

 private:
  static std::size_t idx(Index g) { return static_cast<std::size_t>(g); }

  void update_group(DualCoefficients& alpha, Index g) {
    const std::size_t i = idx(g);
    const Matrix& block = problem_.gram().block(g);
    Vector& a = shifted_[i];
    Vector& ka = k_shifted_[i];
    a = alpha.group(g) - tau_ * residual_;
    ka.noalias() = block * a;
    const double nu = std::sqrt(std::max(0.0, a.dot(ka)));

    // d = alpha_g' - alpha_g and K d, from cached products.
    double step_sq = 0.0;
    if (nu <= threshold_) {
      new_norms_[i] = 0.0;
      if (nonzero_[i]) step_sq = alpha.group(g).dot(k_alpha_[i]);
      alpha.group(g).setZero();
    } else {
      const double c = 1.0 - threshold_ / nu;
      new_norms_[i] = c * nu;
      if (nonzero_[i]) {
        step_sq = (c * a - alpha.group(g)).dot(c * ka - k_alpha_[i]);
      } else {
        step_sq = c * c * nu * nu;
      }
      alpha.group(g) = c * a;
    }
    step_sq_[i] = std::max(0.0, step_sq);
  }

  const ProblemInstance& problem_;
  double tau_;
  double threshold_;
  bool parallel_;
  std::vector<Vector> k_alpha_;
  std::vector<Vector> shifted_;
  std::vector<Vector> k_shifted_;
  std::vector<char> nonzero_;
  std::vector<double> new_norms_;
  std::vector<double> step_sq_;
  Vector residual_;
};

}  // namespace

DualCoefficients ikta_step(const DualCoefficients& alpha, const ProblemInstance& problem, double tau) {
  check_alpha(alpha, problem);
  check_tau(problem, tau);
  DualCoefficients next = alpha;
  Stepper stepper(problem, tau, Execution::parallel);
  stepper.advance(next);
  return next;
}

DualCoefficients ikta_step_serial(const DualCoefficients& alpha, const ProblemInstance& problem,
                                  double tau) {
  check_alpha(alpha, problem);
  check_tau(problem, tau);
  const GramBlocks& gram = problem.gram();
  const double threshold = problem.effective_lambda() * tau;
  const Vector r = residual(alpha, gram, problem.y());
  DualCoefficients next = DualCoefficients::zeros(alpha.num_samples(), alpha.num_groups());
  for (Index g = 0; g < gram.num_groups(); ++g) {
    const Vector a = alpha.group(g) - tau * r;
    next.group(g) = group_threshold(a, gram.block(g), threshold);
  }
  return next;
}

SolveResult solve(const ProblemInstance& problem, const SolverConfig& config,
                  const DualCoefficients& alpha0, Execution exec) {
  config.validate();
  check_alpha(alpha0, problem);
  require(alpha0.all_finite(), "alpha0 must be finite");

  const double tau = config.tau_factor / problem.gram().lipschitz();
  const double lambda = problem.effective_lambda();
  SolveResult out{alpha0, {}};
  SolveTrace& trace = out.trace;
  Stepper stepper(problem, tau, exec);

  // The objective of iterate n needs r(alpha^n), which the following
  // advance() computes; records are completed one step late.
  bool pending = false;
  double pending_penalty = 0.0;
  auto complete_pending = [&](const Vector& r) {
    if (!pending) return;
    trace.objectives.push_back(lambda * pending_penalty + 0.5 * r.squaredNorm());
    pending = false;
  };

  for (int n = 1; n <= config.max_iters; ++n) {
    const double step = stepper.advance(out.alpha);
    complete_pending(stepper.residual());
    if (!std::isfinite(step) || !stepper.residual().allFinite() || !out.alpha.all_finite())
      throw SolverDiverged(n);

    trace.iters_run = n;
    trace.final_step_norm = step;
    const bool stop = config.stop_tol > 0.0 && step <= config.stop_tol;
    const bool last = stop || n == config.max_iters;
    if (config.record_trace && (n % config.trace_stride == 0 || last)) {
      trace.iterations.push_back(n);
      trace.supports.push_back(nonzero_groups(out.alpha));
      trace.step_norms.push_back(step);
      pending = true;
      pending_penalty = stepper.penalty();
    }
    if (stop) break;
  }
  if (pending) {
    const Vector r = residual(out.alpha, problem.gram(), problem.y());
    if (!r.allFinite()) throw SolverDiverged(trace.iters_run);
    complete_pending(r);
  }
  return out;
}

SolveResult solve(const ProblemInstance& problem, const SolverConfig& config, Execution exec) {
  return solve(problem, config,
               DualCoefficients::zeros(problem.num_samples(), problem.num_groups()), exec);
}

SolverConfig reference_config(const SolverConfig& config, int factor) {
  require(factor >= 1, "reference factor must be >= 1");
  require(config.max_iters <= std::numeric_limits<int>::max() / factor,
          "reference iteration budget overflows");
  SolverConfig ref = config;
  ref.max_iters = config.max_iters * factor;
  ref.stop_tol = 1e-12;
  ref.record_trace = false;
  return ref;
}

int last_support_change(const SolveTrace& trace) {
  if (trace.supports.empty()) return 0;
  std::size_t k = trace.supports.size() - 1;
  while (k > 0 && trace.supports[k - 1] == trace.supports.back()) --k;
  return trace.iterations[k];
}

}  // namespace smkl

#pragma once

#include <stdexcept>

#include "smkl/core.hpp"
#include "smkl/group_set.hpp"
#include "smkl/solver.hpp"

// Reference solvers for small instances.  Neither uses forward-backward
// splitting, so agreement with the IKTA solver is a genuine cross-check.

namespace smkl {

struct OracleResult {
  DualCoefficients alpha;  ///< representer coordinates (enumerate_solve)
  Vector w;                ///< explicit features in R^p (bcd_solve), else empty
  double objective = 0.0;
  GroupSet support;
  double kkt_residual = 0.0;  ///< max relative certificate violation
};

class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxEnumerationGroups = 10;

/// Tries every candidate support S.  For each, solves the stationarity
/// system X_g^*(Xw - y) + lambda w_g/||w_g|| = 0 (g in S), w_g = 0 (g not in
/// S) by damped fixed-point iteration on the block norms, then accepts the
/// candidate iff every block in S is nonzero and stationary and every other
/// certificate is <= lambda (1 + tol).  The accepted candidate with the
/// smallest objective wins (ties broken by lexicographic support).
OracleResult enumerate_solve(const ProblemInstance& problem, double tol = 1e-9,
                             Execution exec = Execution::parallel);

/// Cyclic block coordinate minimisation on the explicit design (linear
/// group-projection kernels only).  Each block subproblem is solved exactly
/// by a scalar root find on the block norm.
OracleResult bcd_solve(const ProblemInstance& problem, double tol = 1e-15, int max_sweeps = 200000);

/// Objective of an explicit-feature vector, lambda sum ||w_g|| + 1/2 ||Xw - y||^2.
double explicit_objective(const Vector& w, const ProblemInstance& problem);

/// Representer-to-explicit map w_g = X_g^T alpha_g (linear kernels only).
Vector explicit_weights(const DualCoefficients& alpha, const ProblemInstance& problem);

/// Forward-backward splitting on the explicit design in R^p, started from
/// w0 = D alpha0.  Used to check the representer form iterate by iterate.
std::vector<Vector> explicit_forward_backward(const ProblemInstance& problem, double tau,
                                              const DualCoefficients& alpha0, int iters);

}  // namespace smkl

#pragma once

#include <optional>
#include <string>

#include "smkl/core.hpp"
#include "smkl/group_set.hpp"
#include "smkl/solver.hpp"

namespace smkl {

inline constexpr double kDefaultEsuppTol = 1e-4;

/// Support, extended support and dual certificates at one point.
struct SupportReport {
  GroupSet support;
  GroupSet extended_support;
  Vector certificate_norms;  ///< ||X_g^*(Xw - y)|| / lambda, one per group
  bool qc_holds = false;
  double qc_margin = 0.0;    ///< 1 - max off-support certificate norm
};

GroupSet support_of(const DualCoefficients& alpha);

/// sqrt(r^T K_g r) / lambda with r the residual at alpha.
Vector certificate_norms(const DualCoefficients& alpha, const ProblemInstance& problem);

/// {g : ||X_g^* r|| >= lambda (1 - eps_rel)}.
GroupSet extended_support(const DualCoefficients& alpha, const ProblemInstance& problem,
                          double eps_rel = kDefaultEsuppTol);

/// Fills every SupportReport field.  The strict inequality of the
/// qualification condition is tested as qc_margin > eps_rel, the same band
/// extended_support() uses, so qc_holds is equivalent to support == esupp.
SupportReport qualification_check(const DualCoefficients& alpha, const ProblemInstance& problem,
                                  double eps_rel = kDefaultEsuppTol);

struct SandwichVerdict {
  bool pass = true;
  std::optional<int> failing_iteration;
};

/// Checks reference.support ⊆ supp(w^n) ⊆ reference.extended_support for every
/// recorded iterate n >= burn_in.
SandwichVerdict sandwich_check(const SolveTrace& trace, const SupportReport& reference, int burn_in);

/// Flat `key=value` lines; group sets rendered 1-based.
std::string to_key_value(const SupportReport& report);

}  // namespace smkl

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smkl/core.hpp"
#include "smkl/group_set.hpp"
#include "smkl/solver.hpp"
#include "smkl/support.hpp"

// Strata of the group norm R(w) = sum_g ||w_g||.
//
// Primal strata partition H: each group is either {0} or H_g \ {0}.
// Dual strata partition dom dR* = prod_g B_g: each group is either the open
// ball or the unit sphere.  Both lattices are finite, so the mirror
// correspondence between them can be checked exhaustively.

namespace smkl {

enum class PrimalState : std::uint8_t { zero, nonzero };
enum class DualState : std::uint8_t { interior, sphere };

struct PrimalStratum {
  std::vector<PrimalState> pattern;
  friend bool operator==(const PrimalStratum&, const PrimalStratum&) = default;
  std::string to_string() const;
};

struct DualStratum {
  std::vector<DualState> pattern;
  friend bool operator==(const DualStratum&, const DualStratum&) = default;
  std::string to_string() const;
};

class DualInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

PrimalStratum primal_stratum_of(const DualCoefficients& alpha);
PrimalStratum primal_stratum_of(const GroupSet& support, Index num_groups);
/// Groups of a primal stratum that are Nonzero.
GroupSet nonzero_set(const PrimalStratum& s);

/// Sphere iff the (lambda-scaled) certificate norm is >= 1 - eps_rel.  Norms
/// above 1 + eps_rel are outside the dual domain and raise DualInfeasible.
DualStratum dual_stratum_of(const Vector& certificate_norms, double eps_rel = 1e-4);

/// Componentwise Nonzero -> Sphere, Zero -> Interior.
DualStratum transfer_to_dual(const PrimalStratum& s);
/// Componentwise Sphere -> Nonzero, Interior -> Zero.
PrimalStratum transfer_to_primal(const DualStratum& s);

/// M <= M' iff M is contained in the closure of M'.
/// Primal: nonzero groups of a are a subset of those of b.
bool stratum_leq(const PrimalStratum& a, const PrimalStratum& b);
/// Dual: sphere groups of a are a superset of those of b.
bool stratum_leq(const DualStratum& a, const DualStratum& b);

/// Per-component transfer rules, replaceable for mutation testing.
struct TransferRule {
  std::function<DualState(Index, PrimalState)> to_dual;
  std::function<PrimalState(Index, DualState)> to_primal;
};

TransferRule group_norm_transfer();

struct LatticeVerdict {
  bool pass = true;
  std::string failed_check;  ///< empty on pass
  /// Offending strata encoded as bit masks (bit g set = Nonzero / Sphere).
  std::optional<std::pair<std::uint32_t, std::uint32_t>> counterexample;
  std::string describe() const;
};

inline constexpr int kMaxLatticeGroups = 16;

/// Exhaustive check over all 2^G strata: the transfer is a bijection, its
/// inverse is the dual transfer, it reverses the order in both directions,
/// and <= is reflexive and antisymmetric on both sides (transitivity too
/// for G <= 8).  Reports the first counterexample in index order.
LatticeVerdict verify_lattice(int num_groups, const TransferRule& rule = group_norm_transfer(),
                              Execution exec = Execution::parallel);

/// M_wbar <= M_{w^n} <= transfer_to_primal(M*_etabar) for every recorded
/// iterate n >= burn_in.
SandwichVerdict stratum_sandwich(const SolveTrace& trace, const PrimalStratum& reference,
                                 const DualStratum& reference_dual, int burn_in);

}  // namespace smkl

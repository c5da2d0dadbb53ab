#include "smkl/strata.hpp"

#include <sstream>

namespace smkl {

using detail::require;

std::string PrimalStratum::to_string() const {
  std::string s = "(";
  for (std::size_t g = 0; g < pattern.size(); ++g)
    s += std::string(g ? "," : "") + (pattern[g] == PrimalState::nonzero ? "Nonzero" : "Zero");
  return s + ")";
}

std::string DualStratum::to_string() const {
  std::string s = "(";
  for (std::size_t g = 0; g < pattern.size(); ++g)
    s += std::string(g ? "," : "") + (pattern[g] == DualState::sphere ? "Sphere" : "Interior");
  return s + ")";
}

PrimalStratum primal_stratum_of(const GroupSet& support, Index num_groups) {
  PrimalStratum s{std::vector<PrimalState>(static_cast<std::size_t>(num_groups), PrimalState::zero)};
  for (Index g : support.indices()) {
    require(g >= 0 && g < num_groups, "support index out of range");
    s.pattern[static_cast<std::size_t>(g)] = PrimalState::nonzero;
  }
  return s;
}

PrimalStratum primal_stratum_of(const DualCoefficients& alpha) {
  return primal_stratum_of(nonzero_groups(alpha), alpha.num_groups());
}

GroupSet nonzero_set(const PrimalStratum& s) {
  std::vector<Index> idx;
  for (std::size_t g = 0; g < s.pattern.size(); ++g)
    if (s.pattern[g] == PrimalState::nonzero) idx.push_back(static_cast<Index>(g));
  return GroupSet(std::move(idx));
}

DualStratum dual_stratum_of(const Vector& certificate_norms, double eps_rel) {
  require(eps_rel >= 0.0 && eps_rel < 1.0, "eps_rel must lie in [0, 1)");
  DualStratum s;
  s.pattern.reserve(static_cast<std::size_t>(certificate_norms.size()));
  for (Index g = 0; g < certificate_norms.size(); ++g) {
    const double v = certificate_norms[g];
    require(v >= 0.0, "certificate norms must be nonnegative");
    if (v > 1.0 + eps_rel) {
      std::ostringstream msg;
      msg << "certificate norm " << v << " of group " << g + 1 << " lies outside the unit ball";
      throw DualInfeasible(msg.str());
    }
    s.pattern.push_back(v >= 1.0 - eps_rel ? DualState::sphere : DualState::interior);
  }
  return s;
}

DualStratum transfer_to_dual(const PrimalStratum& s) {
  DualStratum d;
  d.pattern.reserve(s.pattern.size());
  for (PrimalState p : s.pattern)
    d.pattern.push_back(p == PrimalState::nonzero ? DualState::sphere : DualState::interior);
  return d;
}

PrimalStratum transfer_to_primal(const DualStratum& s) {
  PrimalStratum p;
  p.pattern.reserve(s.pattern.size());
  for (DualState d : s.pattern)
    p.pattern.push_back(d == DualState::sphere ? PrimalState::nonzero : PrimalState::zero);
  return p;
}

bool stratum_leq(const PrimalStratum& a, const PrimalStratum& b) {
  require(a.pattern.size() == b.pattern.size(), "stratum_leq: lengths differ");
  for (std::size_t g = 0; g < a.pattern.size(); ++g)
    if (a.pattern[g] == PrimalState::nonzero && b.pattern[g] == PrimalState::zero) return false;
  return true;
}

bool stratum_leq(const DualStratum& a, const DualStratum& b) {
  require(a.pattern.size() == b.pattern.size(), "stratum_leq: lengths differ");
  for (std::size_t g = 0; g < a.pattern.size(); ++g)
    if (b.pattern[g] == DualState::sphere && a.pattern[g] == DualState::interior) return false;
  return true;
}

TransferRule group_norm_transfer() {
  return {
      [](Index, PrimalState p) { return p == PrimalState::nonzero ? DualState::sphere : DualState::interior; },
      [](Index, DualState d) { return d == DualState::sphere ? PrimalState::nonzero : PrimalState::zero; },
  };
}

std::string LatticeVerdict::describe() const {
  if (pass) return "pass";
  std::ostringstream out;
  out << "fail: " << failed_check;
  if (counterexample)
    out << " at masks (" << counterexample->first << ", " << counterexample->second << ")";
  return out.str();
}

namespace {

using Mask = std::uint32_t;

// a <= b on the primal side: nonzero(a) subset of nonzero(b).
bool primal_leq(Mask a, Mask b) { return (a & ~b) == 0; }
// a <= b on the dual side: sphere(a) superset of sphere(b).
bool dual_leq(Mask a, Mask b) { return (b & ~a) == 0; }

struct Tables {
  std::vector<Mask> to_dual;
  std::vector<Mask> to_primal;
};

Tables build_tables(int groups, const TransferRule& rule) {
  const Mask count = Mask{1} << groups;
  Tables t{std::vector<Mask>(count), std::vector<Mask>(count)};
  for (Mask s = 0; s < count; ++s) {
    Mask d = 0;
    Mask p = 0;
    for (int g = 0; g < groups; ++g) {
      const bool bit = (s >> g) & 1U;
      if (rule.to_dual(g, bit ? PrimalState::nonzero : PrimalState::zero) == DualState::sphere)
        d |= Mask{1} << g;
      if (rule.to_primal(g, bit ? DualState::sphere : DualState::interior) == PrimalState::nonzero)
        p |= Mask{1} << g;
    }
    t.to_dual[s] = d;
    t.to_primal[s] = p;
  }
  return t;
}

// First failing partner b for stratum a in the pairwise checks; -1 if none.
// `check` receives the name of the violated property.
long first_pair_failure(Mask a, Mask count, const Tables& t, const char** check) {
  for (Mask b = 0; b < count; ++b) {
    const bool p_le = primal_leq(a, b);
    if (p_le != dual_leq(t.to_dual[b], t.to_dual[a])) {
      *check = "order reversal of the primal-to-dual transfer";
      return b;
    }
    if (dual_leq(a, b) != primal_leq(t.to_primal[b], t.to_primal[a])) {
      *check = "order reversal of the dual-to-primal transfer";
      return b;
    }
    if (a != b && p_le && primal_leq(b, a)) {
      *check = "antisymmetry (primal)";
      return b;
    }
    if (a != b && dual_leq(a, b) && dual_leq(b, a)) {
      *check = "antisymmetry (dual)";
      return b;
    }
  }
  return -1;
}

}  // namespace

LatticeVerdict verify_lattice(int groups, const TransferRule& rule, Execution exec) {
  require(groups >= 1 && groups <= kMaxLatticeGroups, "lattice size G must lie in [1, 16]");
  const Mask count = Mask{1} << groups;
  const Tables t = build_tables(groups, rule);
  auto fail = [](std::string check, Mask a, Mask b) {
    return LatticeVerdict{false, std::move(check), std::make_pair(a, b)};
  };

  // Bijection with the dual transfer as inverse.
  std::vector<char> hit(count, 0);
  for (Mask s = 0; s < count; ++s) {
    if (hit[t.to_dual[s]]) return fail("primal-to-dual transfer is not injective", s, t.to_dual[s]);
    hit[t.to_dual[s]] = 1;
  }
  for (Mask s = 0; s < count; ++s) {
    if (t.to_primal[t.to_dual[s]] != s) return fail("dual transfer is not a left inverse", s, t.to_dual[s]);
    if (t.to_dual[t.to_primal[s]] != s) return fail("dual transfer is not a right inverse", s, t.to_primal[s]);
    if (!primal_leq(s, s) || !dual_leq(s, s)) return fail("reflexivity", s, s);
  }

  // Pairwise properties, split over the first stratum.
  std::vector<long> partner(count, -1);
  std::vector<const char*> what(count, nullptr);
  const bool parallel = exec == Execution::parallel;
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
  for (long a = 0; a < static_cast<long>(count); ++a)
    partner[static_cast<std::size_t>(a)] =
        first_pair_failure(static_cast<Mask>(a), count, t, &what[static_cast<std::size_t>(a)]);
  for (Mask a = 0; a < count; ++a)
    if (partner[a] >= 0) return fail(what[a], a, static_cast<Mask>(partner[a]));

  if (groups <= 8) {
    for (Mask a = 0; a < count; ++a)
      for (Mask b = 0; b < count; ++b) {
        if (!primal_leq(a, b) && !dual_leq(a, b)) continue;
        for (Mask c = 0; c < count; ++c) {
          if (primal_leq(a, b) && primal_leq(b, c) && !primal_leq(a, c)) return fail("transitivity (primal)", a, c);
          if (dual_leq(a, b) && dual_leq(b, c) && !dual_leq(a, c)) return fail("transitivity (dual)", a, c);
        }
      }
  }
  return {};
}

SandwichVerdict stratum_sandwich(const SolveTrace& trace, const PrimalStratum& reference,
                                 const DualStratum& reference_dual, int burn_in) {
  require(burn_in >= 0 && burn_in <= trace.iters_run, "burn_in beyond trace length");
  require(reference.pattern.size() == reference_dual.pattern.size(), "strata lengths differ");
  const PrimalStratum upper = transfer_to_primal(reference_dual);
  const auto groups = static_cast<Index>(reference.pattern.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.iterations[k] < burn_in) continue;
    const PrimalStratum current = primal_stratum_of(trace.supports[k], groups);
    if (!stratum_leq(reference, current) || !stratum_leq(current, upper))
      return {false, trace.iterations[k]};
  }
  return {};
}

}  // namespace smkl

#include <doctest.h>

#include "smkl/strata.hpp"

using namespace smkl;

TEST_CASE("transfer maps nonzero to sphere and back") {
  PrimalStratum p{{PrimalState::nonzero, PrimalState::zero, PrimalState::nonzero}};
  DualStratum d = transfer_to_dual(p);
  CHECK(d.pattern == std::vector<DualState>{DualState::sphere, DualState::interior, DualState::sphere});
  CHECK(transfer_to_primal(d) == p);
  CHECK(nonzero_set(p) == GroupSet({0, 2}));
  CHECK(primal_stratum_of(GroupSet({0, 2}), 3) == p);
}

TEST_CASE("orders run in opposite directions") {
  PrimalStratum small{{PrimalState::nonzero, PrimalState::zero}};
  PrimalStratum big{{PrimalState::nonzero, PrimalState::nonzero}};
  CHECK(stratum_leq(small, big));
  CHECK_FALSE(stratum_leq(big, small));
  CHECK(stratum_leq(transfer_to_dual(big), transfer_to_dual(small)));
  CHECK_FALSE(stratum_leq(transfer_to_dual(small), transfer_to_dual(big)));
}

TEST_CASE("dual stratum from certificate norms") {
  Vector c(3);
  c << 1.0, 0.5, 0.99995;
  auto d = dual_stratum_of(c);
  CHECK(d.pattern == std::vector<DualState>{DualState::sphere, DualState::interior, DualState::sphere});
  c[1] = 1.01;
  CHECK_THROWS_AS(dual_stratum_of(c), DualInfeasible);
}

TEST_CASE("lattice verification passes for the group norm") {
  for (int g = 1; g <= 10; ++g) {
    auto v = verify_lattice(g);
    CHECK_MESSAGE(v.pass, v.describe());
  }
  CHECK(verify_lattice(12, group_norm_transfer(), Execution::serial).pass);
  CHECK_THROWS_AS(verify_lattice(0), ContractViolation);
  CHECK_THROWS_AS(verify_lattice(kMaxLatticeGroups + 1), ContractViolation);
}

TEST_CASE("lattice verification catches a broken transfer") {
  // swap the rule on group 2 only
  TransferRule bad = group_norm_transfer();
  bad.to_dual = [](Index g, PrimalState s) {
    const bool sphere = (s == PrimalState::nonzero) != (g == 1);
    return sphere ? DualState::sphere : DualState::interior;
  };
  bad.to_primal = [](Index g, DualState s) {
    const bool nz = (s == DualState::sphere) != (g == 1);
    return nz ? PrimalState::nonzero : PrimalState::zero;
  };
  auto v = verify_lattice(3, bad);
  CHECK_FALSE(v.pass);
  CHECK_FALSE(v.failed_check.empty());
  CHECK(v.counterexample.has_value());

  TransferRule collapse = group_norm_transfer();
  collapse.to_dual = [](Index, PrimalState) { return DualState::interior; };
  auto c = verify_lattice(2, collapse);
  CHECK_FALSE(c.pass);

  TransferRule half = group_norm_transfer();
  half.to_primal = [](Index, DualState) { return PrimalState::zero; };
  CHECK_FALSE(verify_lattice(2, half).pass);
}

TEST_CASE("parallel and serial lattice checks agree on counterexamples") {
  TransferRule collapse = group_norm_transfer();
  collapse.to_dual = [](Index g, PrimalState s) {
    return (g == 3 || s == PrimalState::nonzero) ? DualState::sphere : DualState::interior;
  };
  auto a = verify_lattice(6, collapse, Execution::parallel);
  auto b = verify_lattice(6, collapse, Execution::serial);
  CHECK(a.failed_check == b.failed_check);
  CHECK(a.counterexample == b.counterexample);
}

TEST_CASE("stratum sandwich") {
  SolveTrace t;
  t.iterations = {1, 2};
  t.supports = {GroupSet({0, 1}), GroupSet({0})};
  t.iters_run = 2;
  auto ref = primal_stratum_of(GroupSet({0}), 3);
  DualStratum dual{{DualState::sphere, DualState::sphere, DualState::interior}};
  CHECK(stratum_sandwich(t, ref, dual, 1).pass);
  DualStratum tight{{DualState::sphere, DualState::interior, DualState::interior}};
  auto v = stratum_sandwich(t, ref, tight, 1);
  CHECK_FALSE(v.pass);
  CHECK(v.failing_iteration == 1);
}

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "smkl/experiments.hpp"
#include "smkl/oracle.hpp"

using namespace smkl;

TEST_CASE("enumeration reproduces the conic reference values") {
  for (auto [lam, value, supp] : {std::tuple{0.3, fixtures::kSmallObjective03, GroupSet({0, 2})},
                                  std::tuple{1.0, fixtures::kSmallObjective10, GroupSet({0, 2})},
                                  std::tuple{2.5, fixtures::kSmallObjective25, GroupSet()}}) {
    auto p = fixtures::small_problem(lam);
    auto e = enumerate_solve(p);
    CHECK(e.objective == doctest::Approx(value).epsilon(1e-9));
    CHECK(e.support == supp);
    auto b = bcd_solve(p);
    CHECK(b.objective == doctest::Approx(value).epsilon(1e-9));
    CHECK(explicit_objective(b.w, p) == doctest::Approx(b.objective).epsilon(1e-14));
  }
}

TEST_CASE("oracles on the closed-form cases") {
  auto ortho = fixtures::orthonormal();
  auto e = enumerate_solve(ortho);
  CHECK(e.objective == doctest::Approx(2.625).epsilon(1e-12));
  CHECK(e.support == GroupSet({0}));
  CHECK(e.alpha.alpha(0, 0) == doctest::Approx(2.0).epsilon(1e-10));

  auto one = fixtures::one_d();
  auto z = enumerate_solve(one);
  CHECK(z.support.empty());
  CHECK(z.objective == doctest::Approx(0.5));
}

TEST_CASE("enumeration and block coordinate descent agree") {
  for (int i = 0; i < 15; ++i) {
    auto p = random_small_group_lasso(600 + i);
    auto e = enumerate_solve(p);
    auto b = bcd_solve(p);
    CHECK(b.objective == doctest::Approx(e.objective).epsilon(1e-8));
    CHECK(explicit_objective(explicit_weights(e.alpha, p), p) ==
          doctest::Approx(e.objective).epsilon(1e-10));
  }
}

TEST_CASE("parallel and serial enumeration agree") {
  for (int i = 0; i < 5; ++i) {
    auto p = random_small_group_lasso(700 + i);
    auto a = enumerate_solve(p, 1e-9, Execution::parallel);
    auto b = enumerate_solve(p, 1e-9, Execution::serial);
    CHECK(a.alpha == b.alpha);
    CHECK(a.support == b.support);
  }
}

TEST_CASE("oracle preconditions") {
  ExperimentConfig c = ExperimentConfig::group_lasso_paper();
  auto inst = generate_instance(c, 0);
  CHECK_THROWS_AS(enumerate_solve(inst.problem), ContractViolation);
  auto g = random_small_gaussian(1, 6, 3);
  CHECK_THROWS_AS(bcd_solve(g), ContractViolation);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "smkl/kernels.hpp"

using namespace smkl;

TEST_CASE("largest eigenvalue of a 2x2 block") {
  Matrix k(2, 2);
  k << 2, 1, 1, 2;
  CHECK(largest_eigenvalue(k) == doctest::Approx(3.0).epsilon(1e-10));
  GramBlocks g = make_gram_blocks({k});
  CHECK(g.lipschitz() == doctest::Approx(3.03).epsilon(1e-10));
}

TEST_CASE("power iteration agrees with a dense eigensolver") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Matrix a(12, 7);
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
    Matrix k = a * a.transpose();
    k = 0.5 * (k + k.transpose()).eval();
    const double ref = Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues().maxCoeff();
    CHECK(largest_eigenvalue(k) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("power iteration reports non-convergence") {
  Matrix k = Matrix::Identity(3, 3);
  k(0, 0) = 1.0;
  k(1, 1) = 0.999999;
  PowerIterationOptions opts;
  opts.tol = 1e-300;
  opts.max_iter = 3;
  CHECK_THROWS_AS(largest_eigenvalue(k, opts), PowerIterationError);
}

TEST_CASE("operator norm is bounded by the sum of block norms") {
  auto p = fixtures::small_problem(1.0);
  double sum = 0.0;
  for (const auto& k : p.gram().blocks()) sum += largest_eigenvalue(k);
  CHECK(operator_norm(p.gram()) <= sum * (1 + 1e-10));
  CHECK(p.gram().lipschitz() >= operator_norm(p.gram()));
}

TEST_CASE("linear blocks are X_g X_g^T") {
  Dataset d = fixtures::small_design();
  GramBlocks g = assemble_gram_blocks(d, LinearGroupProjection{{2, 1, 2}});
  REQUIRE(g.num_groups() == 3);
  Matrix x0 = d.points().leftCols(2);
  CHECK((g.block(0) - x0 * x0.transpose()).norm() <= 1e-14);
  CHECK((g.block(1) - d.points().col(2) * d.points().col(2).transpose()).norm() <= 1e-14);
  CHECK(g.group_dims() == std::vector<int>{2, 1, 2});
  CHECK_THROWS_AS(assemble_gram_blocks(d, LinearGroupProjection{{2, 2}}), ContractViolation);
}

TEST_CASE("gaussian block entries") {
  Matrix pts(2, 2);
  pts << 0, 0, 1, 1;
  Matrix k = gaussian_block(pts, 1.0);
  CHECK(k(0, 0) == 1.0);
  CHECK(k(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(k(1, 0) == k(0, 1));
}

TEST_CASE("gaussian kernel entries increase with bandwidth") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix pts(8, 2);
  for (Index i = 0; i < pts.size(); ++i) pts.data()[i] = u(rng);
  Matrix prev = gaussian_block(pts, 0.1);
  for (double s : {0.3, 1.0, 3.0, 10.0}) {
    Matrix k = gaussian_block(pts, s);
    CHECK((k.array() >= prev.array()).all());
    prev = k;
  }
  Dataset d(pts, Vector::Ones(8));
  CHECK_THROWS_AS(assemble_gram_blocks(d, GaussianFamily{{1.0, -1.0}}), ContractViolation);
}

TEST_CASE("parallel assembly matches serial bit for bit") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix pts(30, 12);
  for (Index i = 0; i < pts.size(); ++i) pts.data()[i] = n(rng);
  Dataset d(pts, Vector::Ones(30));
  for (KernelSpec spec : {KernelSpec{LinearGroupProjection{{3, 3, 3, 3}}},
                          KernelSpec{GaussianFamily{{0.5, 1.0, 2.0, 4.0, 8.0}}}}) {
    GramBlocks a = assemble_gram_blocks(d, spec);
    GramBlocks b = assemble_gram_blocks_serial(d, spec);
    REQUIRE(a.num_groups() == b.num_groups());
    for (Index g = 0; g < a.num_groups(); ++g) CHECK(a.block(g) == b.block(g));
    CHECK(a.lipschitz() == b.lipschitz());
  }
}

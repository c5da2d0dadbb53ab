#pragma once

#include <vector>

#include "smkl/core.hpp"
#include "smkl/kernels.hpp"

namespace fixtures {

using namespace smkl;

// G = 1, K = 1, y = 1.
inline ProblemInstance one_d(double lambda = 1.0) {
  Matrix x(1, 1);
  x << 1.0;
  Vector y(1);
  y << 1.0;
  std::vector<Matrix> blocks{Matrix::Ones(1, 1)};
  return ProblemInstance(Dataset(x, y), GramBlocks(blocks, 1.0, {1}), lambda);
}

// m = 2, two scalar groups with K_g = e_g e_g^T, y = (3, 0.5).
inline ProblemInstance orthonormal(double lambda = 1.0) {
  Matrix x = Matrix::Identity(2, 2);
  Vector y(2);
  y << 3.0, 0.5;
  return ProblemInstance(Dataset(x, y), assemble_gram_blocks(Dataset(x, y), LinearGroupProjection{{1, 1}}),
                         lambda);
}

// 6 x 5 design, groups {1,2}, {3}, {4,5}.
inline Dataset small_design() {
  Matrix x(6, 5);
  x << 1.0, 0.2, -0.5, 0.3, 0.0,
       0.4, -1.1, 0.2, 0.9, 0.5,
       -0.3, 0.6, 1.2, -0.2, 0.1,
       0.8, 0.1, -0.7, 0.5, -0.9,
       0.0, 0.5, 0.3, -1.0, 0.4,
       0.2, -0.4, 0.9, 0.6, 1.0;
  Vector y(6);
  y << 1.5, -0.7, 0.9, 0.3, -1.2, 0.8;
  return Dataset(x, y);
}

inline ProblemInstance small_problem(double lambda) {
  Dataset d = small_design();
  GramBlocks gram = assemble_gram_blocks(d, LinearGroupProjection{{2, 1, 2}});
  return ProblemInstance(std::move(d), std::move(gram), lambda);
}

// Objective values from an independent conic solver on small_problem().
inline constexpr double kSmallObjective03 = 1.5815734626549547;
inline constexpr double kSmallObjective10 = 2.7239406600108547;
inline constexpr double kSmallObjective25 = 2.86;

}  // namespace fixtures

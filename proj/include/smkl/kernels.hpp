#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

#include "smkl/core.hpp"

namespace smkl {

/// Group lasso: Phi_g is the canonical projection onto the g-th block of
/// coordinates, so K_g = X_g X_g^T over those columns.
struct LinearGroupProjection {
  std::vector<int> group_dims;
};

/// k_g(x, x') = exp(-||x - x'||^2 / (2 sigma_g^2)).
struct GaussianFamily {
  std::vector<double> sigmas;
};

using KernelSpec = std::variant<LinearGroupProjection, GaussianFamily>;

Index num_groups(const KernelSpec& spec);

inline constexpr double kDefaultSafety = 1.01;

struct PowerIterationOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

class PowerIterationError : public std::runtime_error {
 public:
  PowerIterationError(const std::string& what, double last_estimate)
      : std::runtime_error(what), last_estimate_(last_estimate) {}
  double last_estimate() const { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration, stopped
/// when the relative Rayleigh-quotient change drops to `tol`.  No safety
/// factor is applied here.
double largest_eigenvalue(const Matrix& symmetric_psd, PowerIterationOptions opts = {});

/// lambda_max(sum_g K_g) for the given blocks (safety factor not included).
double operator_norm(const GramBlocks& gram, PowerIterationOptions opts = {});

/// Builds GramBlocks with lipschitz = safety * lambda_max(sum_g K_g).
GramBlocks make_gram_blocks(std::vector<Matrix> blocks, double safety = kDefaultSafety,
                            std::vector<int> group_dims = {}, PowerIterationOptions opts = {});

Matrix linear_block(const Matrix& points, Index first_column, Index width);
Matrix gaussian_block(const Matrix& points, double sigma);

/// Assembles every K_g, parallel over groups.  Bit-identical to the serial
/// version: each block is computed by exactly one thread with the same code.
GramBlocks assemble_gram_blocks(const Dataset& dataset, const KernelSpec& spec,
                                double safety = kDefaultSafety);
GramBlocks assemble_gram_blocks_serial(const Dataset& dataset, const KernelSpec& spec,
                                       double safety = kDefaultSafety);

}  // namespace smkl

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace smkl {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an argument breaks a documented precondition (dimension
/// mismatch, non-finite data, out-of-range parameter).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Training set: row i of `points` is x_i, `y` holds the responses.
class Dataset {
 public:
  Dataset(Matrix points, Vector y);

  const Matrix& points() const { return points_; }
  const Vector& y() const { return y_; }
  Index num_samples() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }

 private:
  Matrix points_;
  Vector y_;
};

/// The G symmetric PSD m x m kernel matrices K_g = X_g X_g^*, their sum and
/// the Lipschitz constant L >= lambda_max(sum_g K_g) that governs the step.
class GramBlocks {
 public:
  /// Validates symmetry (1e-12 absolute) and PSD-ness (smallest eigenvalue
  /// >= -1e-10 * max(1, trace)) of every block.  `lipschitz` must already
  /// include any safety factor; see make_gram_blocks() in kernels.hpp.
  GramBlocks(std::vector<Matrix> blocks, double lipschitz,
             std::vector<int> group_dims = {});

  const std::vector<Matrix>& blocks() const { return blocks_; }
  const Matrix& block(Index g) const { return blocks_[static_cast<std::size_t>(g)]; }
  const Matrix& block_sum() const { return block_sum_; }
  double lipschitz() const { return lipschitz_; }
  /// Intrinsic group dimensions d_g; empty for infinite-dimensional kernels.
  const std::vector<int>& group_dims() const { return group_dims_; }

  Index num_groups() const { return static_cast<Index>(blocks_.size()); }
  Index num_samples() const { return block_sum_.rows(); }

 private:
  std::vector<Matrix> blocks_;
  Matrix block_sum_;
  double lipschitz_;
  std::vector<int> group_dims_;
};

/// Algorithm state alpha in R^{m x G}; column g is alpha_g.  Groups that
/// were thresholded out hold literal zero columns.
struct DualCoefficients {
  Matrix alpha;

  static DualCoefficients zeros(Index num_samples, Index num_groups) {
    return {Matrix::Zero(num_samples, num_groups)};
  }

  Index num_samples() const { return alpha.rows(); }
  Index num_groups() const { return alpha.cols(); }
  auto group(Index g) const { return alpha.col(g); }
  auto group(Index g) { return alpha.col(g); }
  bool group_is_zero(Index g) const { return (alpha.col(g).array() == 0.0).all(); }
  bool all_finite() const { return alpha.allFinite(); }

  friend bool operator==(const DualCoefficients& a, const DualCoefficients& b) {
    return a.alpha.rows() == b.alpha.rows() && a.alpha.cols() == b.alpha.cols() &&
           a.alpha == b.alpha;
  }
};

enum class LambdaConvention {
  raw,         ///< lambda * R(w) + 1/2 ||Xw - y||^2
  per_sample,  ///< lambda given in the 1/(2m) normalisation; scaled by m internally
};

std::string to_string(LambdaConvention c);
LambdaConvention lambda_convention_from_string(const std::string& s);

/// One regularised problem.  Immutable after construction.
class ProblemInstance {
 public:
  ProblemInstance(Dataset dataset, GramBlocks gram, double lambda,
                  LambdaConvention convention = LambdaConvention::raw);

  const Dataset& dataset() const { return dataset_; }
  const GramBlocks& gram() const { return gram_; }
  const Vector& y() const { return dataset_.y(); }
  double lambda() const { return lambda_; }
  LambdaConvention convention() const { return convention_; }
  /// lambda as used by the iteration (m * lambda under per_sample).
  double effective_lambda() const;

  Index num_samples() const { return gram_.num_samples(); }
  Index num_groups() const { return gram_.num_groups(); }

 private:
  Dataset dataset_;
  GramBlocks gram_;
  double lambda_;
  LambdaConvention convention_;
};

/// ||X_g^* v||_{H_g} = sqrt(max(0, v^T K_g v)).
double group_dual_norm(const Eigen::Ref<const Vector>& v, const Matrix& block);

/// r = sum_g K_g alpha_g - y.  Zero columns are skipped.
Vector residual(const DualCoefficients& alpha, const GramBlocks& gram, const Vector& y);

/// lambda * sum_g ||w_g|| + 1/2 ||Xw - y||^2 with w_g = X_g^* alpha_g.
double objective(const DualCoefficients& alpha, const ProblemInstance& problem);

/// Sum over groups of v_g^T K_g v_g, i.e. ||D v||_H^2 for the implicit primal.
double h_norm_squared(const DualCoefficients& v, const GramBlocks& gram);

namespace detail {
void require(bool condition, const std::string& message);
}  // namespace detail

}  // namespace smkl

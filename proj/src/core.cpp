#include "smkl/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smkl {

namespace detail {
void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}
}  // namespace detail

using detail::require;

Dataset::Dataset(Matrix points, Vector y) : points_(std::move(points)), y_(std::move(y)) {
  require(points_.rows() >= 1, "dataset needs at least one sample");
  require(points_.cols() >= 1, "dataset points need dimension >= 1");
  require(y_.size() == points_.rows(), "dataset: y length must equal number of points");
  require(points_.allFinite() && y_.allFinite(), "dataset contains non-finite values");
}

GramBlocks::GramBlocks(std::vector<Matrix> blocks, double lipschitz, std::vector<int> group_dims)
    : blocks_(std::move(blocks)), lipschitz_(lipschitz), group_dims_(std::move(group_dims)) {
  require(!blocks_.empty(), "gram: at least one block required");
  const Index m = blocks_.front().rows();
  require(m >= 1, "gram: empty block");
  require(group_dims_.empty() || group_dims_.size() == blocks_.size(),
          "gram: group_dims length must equal the number of blocks");
  block_sum_ = Matrix::Zero(m, m);
  for (std::size_t g = 0; g < blocks_.size(); ++g) {
    const Matrix& k = blocks_[g];
    std::ostringstream where;
    where << "gram block " << g;
    require(k.rows() == m && k.cols() == m, where.str() + ": shape mismatch");
    require(k.allFinite(), where.str() + ": non-finite entry");
    require((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12, where.str() + ": not symmetric");
    const double scale = std::max(1.0, k.trace());
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(k, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    require(min_eig >= -1e-10 * scale, where.str() + ": not positive semidefinite");
    block_sum_ += k;
  }
  require(std::isfinite(lipschitz_) && lipschitz_ > 0.0, "gram: lipschitz must be positive");
}

std::string to_string(LambdaConvention c) {
  return c == LambdaConvention::raw ? "raw" : "per-sample";
}

LambdaConvention lambda_convention_from_string(const std::string& s) {
  if (s == "raw") return LambdaConvention::raw;
  if (s == "per-sample" || s == "per_sample") return LambdaConvention::per_sample;
  throw ContractViolation("unknown lambda_convention '" + s + "' (expected raw|per-sample)");
}

ProblemInstance::ProblemInstance(Dataset dataset, GramBlocks gram, double lambda,
                                 LambdaConvention convention)
    : dataset_(std::move(dataset)), gram_(std::move(gram)), lambda_(lambda), convention_(convention) {
  require(std::isfinite(lambda_) && lambda_ > 0.0, "lambda must be positive");
  require(gram_.num_samples() == dataset_.num_samples(),
          "gram size does not match the number of samples");
}

double ProblemInstance::effective_lambda() const {
  return convention_ == LambdaConvention::per_sample
             ? lambda_ * static_cast<double>(num_samples())
             : lambda_;
}

double group_dual_norm(const Eigen::Ref<const Vector>& v, const Matrix& block) {
  require(v.size() == block.rows() && block.rows() == block.cols(),
          "group_dual_norm: dimension mismatch");
  const double q = v.dot(block * v);
  return std::sqrt(std::max(0.0, q));
}

Vector residual(const DualCoefficients& alpha, const GramBlocks& gram, const Vector& y) {
  require(alpha.num_samples() == gram.num_samples() && alpha.num_groups() == gram.num_groups() &&
              y.size() == gram.num_samples(),
          "residual: dimension mismatch");
  Vector r = -y;
  Vector product(y.size());
  for (Index g = 0; g < gram.num_groups(); ++g) {
    if (alpha.group_is_zero(g)) continue;
    product.noalias() = gram.block(g) * alpha.group(g);
    r += product;
  }
  return r;
}

double objective(const DualCoefficients& alpha, const ProblemInstance& problem) {
  const GramBlocks& gram = problem.gram();
  const Vector r = residual(alpha, gram, problem.y());
  double penalty = 0.0;
  for (Index g = 0; g < gram.num_groups(); ++g) {
    if (alpha.group_is_zero(g)) continue;
    penalty += group_dual_norm(alpha.group(g), gram.block(g));
  }
  return problem.effective_lambda() * penalty + 0.5 * r.squaredNorm();
}

double h_norm_squared(const DualCoefficients& v, const GramBlocks& gram) {
  require(v.num_samples() == gram.num_samples() && v.num_groups() == gram.num_groups(),
          "h_norm: dimension mismatch");
  double total = 0.0;
  for (Index g = 0; g < gram.num_groups(); ++g) {
    const double n = group_dual_norm(v.group(g), gram.block(g));
    total += n * n;
  }
  return total;
}

}  // namespace smkl

#include "smkl/kernels.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace smkl {

using detail::require;

Index num_groups(const KernelSpec& spec) {
  return std::visit(
      [](const auto& s) -> Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LinearGroupProjection>) {
          return static_cast<Index>(s.group_dims.size());
        } else {
          return static_cast<Index>(s.sigmas.size());
        }
      },
      spec);
}

double largest_eigenvalue(const Matrix& a, PowerIterationOptions opts) {
  require(a.rows() == a.cols() && a.rows() >= 1, "largest_eigenvalue: matrix must be square");
  require(opts.tol >= 0.0 && opts.max_iter >= 1, "largest_eigenvalue: bad options");
  const Index n = a.rows();
  // Deterministic start with a small irregular component so it is not
  // orthogonal to the leading eigenvector of structured matrices.
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
  v.normalize();

  double estimate = 0.0;
  Vector w(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    w.noalias() = a * v;
    const double rq = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    if (it > 0 && std::abs(rq - estimate) <= opts.tol * std::abs(rq)) return rq;
    estimate = rq;
    v = w / norm;
  }
  std::ostringstream msg;
  msg << "power iteration did not converge in " << opts.max_iter
      << " iterations (last estimate " << estimate << ")";
  throw PowerIterationError(msg.str(), estimate);
}

double operator_norm(const GramBlocks& gram, PowerIterationOptions opts) {
  return largest_eigenvalue(gram.block_sum(), opts);
}

GramBlocks make_gram_blocks(std::vector<Matrix> blocks, double safety, std::vector<int> group_dims,
                            PowerIterationOptions opts) {
  require(safety >= 1.0, "safety factor must be >= 1");
  require(!blocks.empty(), "gram: at least one block required");
  Matrix sum = Matrix::Zero(blocks.front().rows(), blocks.front().cols());
  for (const auto& b : blocks) {
    require(b.rows() == sum.rows() && b.cols() == sum.cols(), "gram: blocks differ in shape");
    sum += b;
  }
  const double lmax = largest_eigenvalue(sum, opts);
  require(lmax > 0.0, "gram: sum of blocks is zero, step size undefined");
  return GramBlocks(std::move(blocks), safety * lmax, std::move(group_dims));
}

Matrix linear_block(const Matrix& points, Index first_column, Index width) {
  const Index m = points.rows();
  Matrix k = Matrix::Zero(m, m);
  k.selfadjointView<Eigen::Lower>().rankUpdate(points.middleCols(first_column, width));
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}

Matrix gaussian_block(const Matrix& points, double sigma) {
  const Index m = points.rows();
  const double denom = 2.0 * sigma * sigma;
  Matrix k(m, m);
  for (Index j = 0; j < m; ++j) {
    k(j, j) = 1.0;
    for (Index i = j + 1; i < m; ++i) {
      const double d2 = (points.row(i) - points.row(j)).squaredNorm();
      k(i, j) = std::exp(-d2 / denom);
      k(j, i) = k(i, j);
    }
  }
  return k;
}

namespace {

// Validates `spec` against the data and returns a per-group block builder.
struct BlockPlan {
  std::vector<Index> offsets;  // linear only
  std::vector<int> dims;       // linear only
  std::vector<double> sigmas;  // gaussian only
  bool linear = true;

  Index size() const { return linear ? static_cast<Index>(dims.size())
                                     : static_cast<Index>(sigmas.size()); }

  Matrix build(const Matrix& points, Index g) const {
    const auto i = static_cast<std::size_t>(g);
    return linear ? linear_block(points, offsets[i], dims[i]) : gaussian_block(points, sigmas[i]);
  }
};

BlockPlan plan_for(const Dataset& dataset, const KernelSpec& spec) {
  BlockPlan plan;
  if (const auto* lin = std::get_if<LinearGroupProjection>(&spec)) {
    require(!lin->group_dims.empty(), "linear kernel: no groups");
    Index offset = 0;
    for (int d : lin->group_dims) {
      require(d >= 1, "linear kernel: group dimensions must be >= 1");
      plan.offsets.push_back(offset);
      offset += d;
    }
    require(offset == dataset.dim(), "linear kernel: group dimensions must sum to p");
    plan.dims = lin->group_dims;
  } else {
    const auto& gauss = std::get<GaussianFamily>(spec);
    require(!gauss.sigmas.empty(), "gaussian kernel: no groups");
    for (double s : gauss.sigmas)
      require(std::isfinite(s) && s > 0.0, "gaussian kernel: sigma must be positive");
    plan.linear = false;
    plan.sigmas = gauss.sigmas;
  }
  return plan;
}

GramBlocks finish(std::vector<Matrix> blocks, const BlockPlan& plan, double safety) {
  return make_gram_blocks(std::move(blocks), safety, plan.linear ? plan.dims : std::vector<int>{});
}

}  // namespace

GramBlocks assemble_gram_blocks(const Dataset& dataset, const KernelSpec& spec, double safety) {
  const BlockPlan plan = plan_for(dataset, spec);
  const Index groups = plan.size();
  std::vector<Matrix> blocks(static_cast<std::size_t>(groups));
#pragma omp parallel for schedule(static)
  for (Index g = 0; g < groups; ++g) blocks[static_cast<std::size_t>(g)] = plan.build(dataset.points(), g);
  return finish(std::move(blocks), plan, safety);
}

GramBlocks assemble_gram_blocks_serial(const Dataset& dataset, const KernelSpec& spec,
                                       double safety) {
  const BlockPlan plan = plan_for(dataset, spec);
  std::vector<Matrix> blocks;
  blocks.reserve(static_cast<std::size_t>(plan.size()));
  for (Index g = 0; g < plan.size(); ++g) blocks.push_back(plan.build(dataset.points(), g));
  return finish(std::move(blocks), plan, safety);
}

}  // namespace smkl

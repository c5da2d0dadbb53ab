#include "smkl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/tools/roots.hpp>

#include "smkl/support.hpp"

namespace smkl {

using detail::require;

namespace {

constexpr double kDamping = 0.5;
constexpr int kMaxFixedPointIters = 200000;

struct Candidate {
  bool accepted = false;
  double objective = std::numeric_limits<double>::infinity();
  DualCoefficients alpha;
  GroupSet support;
};

GroupSet mask_to_set(std::uint32_t mask, Index groups) {
  std::vector<Index> idx;
  for (Index g = 0; g < groups; ++g)
    if ((mask >> g) & 1U) idx.push_back(g);
  return GroupSet(std::move(idx));
}

// Restricted problem on support S.  With w_g = c_g X_g^* beta for g in S the
// stationarity conditions become beta = (I + sum c_g K_g)^{-1} y and
// ||X_g^* beta|| = lambda; c_g <- c_g ||X_g^* beta|| / lambda is the
// alternating minimisation of the variational form of the group norm.
Candidate try_support(const ProblemInstance& problem, std::uint32_t mask, double tol) {
  const GramBlocks& gram = problem.gram();
  const Index m = problem.num_samples();
  const Index groups = problem.num_groups();
  const double lambda = problem.effective_lambda();
  const Vector& y = problem.y();

  Candidate cand;
  cand.support = mask_to_set(mask, groups);
  cand.alpha = DualCoefficients::zeros(m, groups);
  const auto& members = cand.support.indices();

  if (!members.empty()) {
    std::vector<double> c(members.size(), 1.0);
    std::vector<double> nu(members.size(), 0.0);
    Vector beta = y;
    Vector prev(m);
    bool converged = false;
    const double scale = 1.0 + y.norm();
    for (int it = 0; it < kMaxFixedPointIters; ++it) {
      Matrix a = Matrix::Identity(m, m);
      for (std::size_t k = 0; k < members.size(); ++k) a += c[k] * gram.block(members[k]);
      prev = beta;
      beta = a.ldlt().solve(y);
      for (std::size_t k = 0; k < members.size(); ++k)
        nu[k] = group_dual_norm(beta, gram.block(members[k]));
      if (it > 0 && (beta - prev).norm() <= 1e-15 * scale) {
        converged = true;
        break;
      }
      for (std::size_t k = 0; k < members.size(); ++k)
        c[k] = (1.0 - kDamping) * c[k] + kDamping * c[k] * nu[k] / lambda;
    }
    if (!converged) return cand;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double block_norm = c[k] * nu[k];
      if (!(block_norm > tol * scale)) return cand;
      if (std::abs(nu[k] / lambda - 1.0) > tol) return cand;
      cand.alpha.group(members[k]) = c[k] * beta;
    }
  }

  const Vector cert = certificate_norms(cand.alpha, problem);
  for (Index g = 0; g < groups; ++g)
    if (!cand.support.contains(g) && cert[g] > 1.0 + tol) return cand;
  cand.accepted = true;
  cand.objective = objective(cand.alpha, problem);
  return cand;
}

double kkt_violation(const Vector& cert, const GroupSet& support) {
  double worst = 0.0;
  for (Index g = 0; g < cert.size(); ++g) {
    const double v = support.contains(g) ? std::abs(cert[g] - 1.0) : std::max(0.0, cert[g] - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

OracleResult enumerate_solve(const ProblemInstance& problem, double tol, Execution exec) {
  const Index groups = problem.num_groups();
  require(groups <= kMaxEnumerationGroups, "enumerate_solve supports at most 10 groups");
  require(tol > 0.0, "oracle tolerance must be positive");
  const std::uint32_t count = std::uint32_t{1} << groups;
  std::vector<Candidate> candidates(count);
  const bool parallel = exec == Execution::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long mask = 0; mask < static_cast<long>(count); ++mask)
    candidates[static_cast<std::size_t>(mask)] = try_support(problem, static_cast<std::uint32_t>(mask), tol);

  const Candidate* best = nullptr;
  for (const Candidate& c : candidates) {
    if (!c.accepted) continue;
    if (!best || c.objective < best->objective ||
        (c.objective == best->objective && c.support.indices() < best->support.indices()))
      best = &c;
  }
  if (!best) throw OracleFailure("enumerate_solve: no candidate support satisfied the optimality conditions");

  OracleResult out;
  out.alpha = best->alpha;
  out.objective = best->objective;
  out.support = best->support;
  out.kkt_residual = kkt_violation(certificate_norms(out.alpha, problem), out.support);
  return out;
}

namespace {

struct ExplicitDesign {
  std::vector<Index> offsets;
  std::vector<Index> dims;
};

ExplicitDesign explicit_design(const ProblemInstance& problem) {
  const auto& dims = problem.gram().group_dims();
  require(!dims.empty(), "explicit-feature routines need a linear group-projection kernel");
  ExplicitDesign d;
  Index offset = 0;
  for (int dim : dims) {
    d.offsets.push_back(offset);
    d.dims.push_back(dim);
    offset += dim;
  }
  require(offset == problem.dataset().dim(), "group dimensions do not match the data");
  return d;
}

}  // namespace

double explicit_objective(const Vector& w, const ProblemInstance& problem) {
  const ExplicitDesign d = explicit_design(problem);
  const Matrix& x = problem.dataset().points();
  double penalty = 0.0;
  for (std::size_t g = 0; g < d.dims.size(); ++g) penalty += w.segment(d.offsets[g], d.dims[g]).norm();
  return problem.effective_lambda() * penalty + 0.5 * (x * w - problem.y()).squaredNorm();
}

Vector explicit_weights(const DualCoefficients& alpha, const ProblemInstance& problem) {
  const ExplicitDesign d = explicit_design(problem);
  const Matrix& x = problem.dataset().points();
  Vector w(x.cols());
  for (std::size_t g = 0; g < d.dims.size(); ++g)
    w.segment(d.offsets[g], d.dims[g]) =
        x.middleCols(d.offsets[g], d.dims[g]).transpose() * alpha.group(static_cast<Index>(g));
  return w;
}

std::vector<Vector> explicit_forward_backward(const ProblemInstance& problem, double tau,
                                              const DualCoefficients& alpha0, int iters) {
  const ExplicitDesign d = explicit_design(problem);
  const Matrix& x = problem.dataset().points();
  const double threshold = problem.effective_lambda() * tau;
  Vector w = explicit_weights(alpha0, problem);
  std::vector<Vector> iterates;
  iterates.reserve(static_cast<std::size_t>(iters));
  for (int n = 0; n < iters; ++n) {
    Vector v = w - tau * (x.transpose() * (x * w - problem.y()));
    for (std::size_t g = 0; g < d.dims.size(); ++g) {
      auto block = v.segment(d.offsets[g], d.dims[g]);
      const double norm = block.norm();
      if (norm <= threshold) block.setZero();
      else block *= 1.0 - threshold / norm;
    }
    w = v;
    iterates.push_back(w);
  }
  return iterates;
}

OracleResult bcd_solve(const ProblemInstance& problem, double tol, int max_sweeps) {
  require(tol >= 0.0 && max_sweeps >= 1, "bcd_solve: bad tolerance or sweep budget");
  const ExplicitDesign d = explicit_design(problem);
  const Matrix& x = problem.dataset().points();
  const double lambda = problem.effective_lambda();
  const std::size_t groups = d.dims.size();

  std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eig;
  eig.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto xg = x.middleCols(d.offsets[g], d.dims[g]);
    eig.emplace_back(Matrix(xg.transpose() * xg));
  }

  Vector w = Vector::Zero(x.cols());
  Vector r = problem.y();  // y - Xw
  double previous = explicit_objective(w, problem);
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t g = 0; g < groups; ++g) {
      const auto xg = x.middleCols(d.offsets[g], d.dims[g]);
      auto wg = w.segment(d.offsets[g], d.dims[g]);
      r += xg * wg;
      const Vector z = xg.transpose() * r;
      if (z.norm() <= lambda) {
        wg.setZero();
        continue;
      }
      // min_v lambda ||v|| + 1/2 ||r - X_g v||^2: v = (A + s I)^{-1} z with
      // s = lambda / ||v||, i.e. sum_i zhat_i^2 s^2 / (l_i + s)^2 = lambda^2.
      const Vector& l = eig[g].eigenvalues();
      const Vector zhat = eig[g].eigenvectors().transpose() * z;
      auto f = [&](double s) {
        double acc = 0.0;
        for (Index i = 0; i < l.size(); ++i) {
          const double q = zhat[i] * s / (std::max(l[i], 0.0) + s);
          acc += q * q;
        }
        return acc - lambda * lambda;
      };
      double hi = 1.0;
      while (f(hi) <= 0.0) hi *= 2.0;
      std::uintmax_t max_iter = 200;
      const auto [lo_s, hi_s] = boost::math::tools::toms748_solve(
          f, 0.0, hi, -lambda * lambda, f(hi), boost::math::tools::eps_tolerance<double>(52), max_iter);
      const double s = 0.5 * (lo_s + hi_s);
      Vector coef(l.size());
      for (Index i = 0; i < l.size(); ++i) coef[i] = zhat[i] / (std::max(l[i], 0.0) + s);
      wg = eig[g].eigenvectors() * coef;
      r -= xg * wg;
    }
    const double current = explicit_objective(w, problem);
    if (std::abs(previous - current) <= tol * std::max(1.0, std::abs(current))) {
      converged = true;
      previous = current;
      break;
    }
    previous = current;
  }
  if (!converged) throw OracleFailure("bcd_solve: sweep budget exhausted");

  OracleResult out;
  out.w = w;
  out.objective = previous;
  std::vector<Index> idx;
  const Vector resid = x * w - problem.y();
  Vector cert(static_cast<Index>(groups));
  for (std::size_t g = 0; g < groups; ++g) {
    if (w.segment(d.offsets[g], d.dims[g]).squaredNorm() > 0.0) idx.push_back(static_cast<Index>(g));
    cert[static_cast<Index>(g)] =
        (x.middleCols(d.offsets[g], d.dims[g]).transpose() * resid).norm() / lambda;
  }
  out.support = GroupSet(std::move(idx));
  out.kkt_residual = kkt_violation(cert, out.support);
  return out;
}

}  // namespace smkl

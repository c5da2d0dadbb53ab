#include "smkl/support.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace smkl {

using detail::require;

GroupSet support_of(const DualCoefficients& alpha) { return nonzero_groups(alpha); }

Vector certificate_norms(const DualCoefficients& alpha, const ProblemInstance& problem) {
  const GramBlocks& gram = problem.gram();
  const Vector r = residual(alpha, gram, problem.y());
  const double lambda = problem.effective_lambda();
  Vector norms(gram.num_groups());
  for (Index g = 0; g < gram.num_groups(); ++g) norms[g] = group_dual_norm(r, gram.block(g)) / lambda;
  return norms;
}

namespace {
GroupSet band(const Vector& norms, double eps_rel) {
  std::vector<Index> idx;
  for (Index g = 0; g < norms.size(); ++g)
    if (norms[g] >= 1.0 - eps_rel) idx.push_back(g);
  return GroupSet(std::move(idx));
}
}  // namespace

GroupSet extended_support(const DualCoefficients& alpha, const ProblemInstance& problem,
                          double eps_rel) {
  require(eps_rel >= 0.0 && eps_rel < 1.0, "eps_rel must lie in [0, 1)");
  return band(certificate_norms(alpha, problem), eps_rel);
}

SupportReport qualification_check(const DualCoefficients& alpha, const ProblemInstance& problem,
                                  double eps_rel) {
  require(eps_rel >= 0.0 && eps_rel < 1.0, "eps_rel must lie in [0, 1)");
  SupportReport report;
  report.support = support_of(alpha);
  report.certificate_norms = certificate_norms(alpha, problem);
  report.extended_support = band(report.certificate_norms, eps_rel);
  double worst = 0.0;
  for (Index g = 0; g < report.certificate_norms.size(); ++g)
    if (!report.support.contains(g)) worst = std::max(worst, report.certificate_norms[g]);
  report.qc_margin = 1.0 - worst;
  report.qc_holds = report.qc_margin > eps_rel;
  return report;
}

SandwichVerdict sandwich_check(const SolveTrace& trace, const SupportReport& reference, int burn_in) {
  require(burn_in >= 0 && burn_in <= trace.iters_run, "burn_in beyond trace length");
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.iterations[k] < burn_in) continue;
    const GroupSet& s = trace.supports[k];
    if (!reference.support.is_subset_of(s) || !s.is_subset_of(reference.extended_support))
      return {false, trace.iterations[k]};
  }
  return {};
}

std::string to_key_value(const SupportReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "supp=" << report.support.to_string() << '\n';
  out << "esupp=" << report.extended_support.to_string() << '\n';
  out << "support_size=" << report.support.size() << '\n';
  out << "qc_holds=" << (report.qc_holds ? "true" : "false") << '\n';
  out << "qc_margin=" << report.qc_margin << '\n';
  out << "certificate_norms=";
  for (Index g = 0; g < report.certificate_norms.size(); ++g)
    out << (g ? "," : "") << report.certificate_norms[g];
  out << '\n';
  return out.str();
}

}  // namespace smkl

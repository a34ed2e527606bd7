#include "ahmca/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace ahmca {

double GradReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& g : groups) m = std::max(m, g.max_rel_error);
  return m;
}

double relative_error(double analytic, double numeric, double eps) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), eps});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double finite_loss(const GradProblem& p) {
  const double v = p.loss();
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "grad_check: loss is not finite");
  return v;
}

}  // namespace

GradReport grad_check(const GradProblem& problem, double tolerance, double step) {
  const std::vector<MatrixD> analytic = problem.gradient();
  if (analytic.size() != problem.groups.size()) {
    throw Error(ErrorKind::DimMismatch, "grad_check: gradient group count mismatch");
  }
  GradReport report;
  report.tolerance = tolerance;
  for (std::size_t gi = 0; gi < problem.groups.size(); ++gi) {
    const GradGroup& group = problem.groups[gi];
    MatrixD& x = *group.value;
    require_same_shape(x, analytic[gi], "grad_check " + group.name);
    require_finite(analytic[gi], "grad_check gradient " + group.name);
    GroupError err{group.name, 0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double orig = x[i];
      x[i] = orig + step;
      const double up = finite_loss(problem);
      x[i] = orig - step;
      const double down = finite_loss(problem);
      x[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      err.max_rel_error = std::max(err.max_rel_error, relative_error(analytic[gi][i], numeric));
      err.max_abs_error = std::max(err.max_abs_error, std::abs(analytic[gi][i] - numeric));
    }
    report.groups.push_back(std::move(err));
  }
  report.passed = report.max_rel_error() < tolerance;
  return report;
}

}  // namespace ahmca

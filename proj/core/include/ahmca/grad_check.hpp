#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ahmca/matrix.hpp"

namespace ahmca {

struct GradGroup {
  std::string name;
  MatrixD* value = nullptr;  // perturbed in place, restored afterwards
};

/// A differentiable scalar function of some parameter groups.
struct GradProblem {
  std::vector<GradGroup> groups;
  /// Loss at the groups' current values.
  std::function<double()> loss;
  /// Reverse-mode gradients at the current values, one per group, same order.
  std::function<std::vector<MatrixD>()> gradient;
};

struct GroupError {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradReport {
  std::vector<GroupError> groups;
  double tolerance = 0.0;
  bool passed = false;

  double max_rel_error() const;
};

/// |a - n| / max(|a|, |n|, eps)
double relative_error(double analytic, double numeric, double eps = 1e-8);

/// Compares reverse-mode gradients with central differences of the given step.
/// Throws NonFinite if the loss or any gradient entry is not finite.
GradReport grad_check(const GradProblem& problem, double tolerance, double step = 1e-5);

}  // namespace ahmca

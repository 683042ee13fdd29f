#pragma once

#include <functional>
#include <string>
#include <vector>

#include "doer/tensor.hpp"

namespace doer {

/// Evaluates a scalar loss at the current parameter values. When
/// `with_grads` is true it must also accumulate the analytic gradient into
/// the parameters' `grad` tensors (which the caller zeroes first).
using LossFunction = std::function<double(bool with_grads)>;

struct ParamCheck {
  std::string name;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<ParamCheck> params;

  // Names of parameters whose worst relative error is >= tolerance.
  std::vector<std::string> failing(double tolerance) const;
};

double relative_error(double analytic, double numeric);

/// Central-difference check of every entry of every parameter.
/// Requires eps in [1e-6, 1e-4]; throws NumericError if two evaluations at
/// identical parameters disagree.
GradCheckReport grad_check(const LossFunction& loss, const ParamRefs& params, double eps);

}  // namespace doer

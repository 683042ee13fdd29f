#pragma once

#include <cstdint>
#include <string>

#include "doer/gradcheck.hpp"
#include "doer/model.hpp"

namespace doer {

/// Full-model gradient check on the two-sentence toy batch with
/// d_G=4, d_D=3, d=6, K=2.
struct ToyCheckConfig {
  std::uint64_t seed = 1;
  double eps = 1e-5;
  double lambda = 1e-3;
  double dropout = 0.5;  // the mask stream is reseeded on every evaluation
  bool use_csu = true;
  bool use_aux_length = true;
  bool use_aux_sentiment = true;
  // Every parameter is redrawn uniform in +-point_scale; the trained-from
  // init regime has CSU gradients near 1e-8, below what central differences
  // can resolve. 0 keeps the plain initialization.
  double point_scale = 0.5;
  std::string corrupt_param;   // test hook: scale this parameter's analytic gradient
  double corrupt_scale = 1.5;
};

ModelConfig toy_model_config(const ToyCheckConfig& cfg);

GradCheckReport toy_grad_check(const ToyCheckConfig& cfg);

}  // namespace doer

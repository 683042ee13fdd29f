#pragma once

#include <cstdint>
#include <vector>

#include "doer/tensor.hpp"

namespace doer {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Per-parameter first/second moments, aligned with the ParamRefs they
/// were created from.
class AdamState {
 public:
  AdamState(const ParamRefs& params, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

  /// One bias-corrected Adam update; gradients are zeroed afterwards.
  void apply(const ParamRefs& params);

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

inline void adam_step(const ParamRefs& params, AdamState& state) { state.apply(params); }

double global_grad_norm(const ParamRefs& params);

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the factor applied (1 when the norm is already within bounds).
double clip_global_norm(const ParamRefs& params, double max_norm);

}  // namespace doer

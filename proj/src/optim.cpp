#include "doer/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace doer {

AdamState::AdamState(const ParamRefs& params, AdamConfig config) : config_(config) {
  if (!(config.learning_rate > 0 && config.beta1 > 0 && config.beta1 < 1 && config.beta2 > 0 &&
        config.beta2 < 1 && config.epsilon > 0)) {
    throw std::invalid_argument("Adam hyperparameters out of range");
  }
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const ParamTensor* p : params) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void AdamState::apply(const ParamRefs& params) {
  if (params.size() != m_.size()) throw DimensionError("adam_step: parameter count changed");
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamTensor& p = *params[k];
    if (!p.grad.same_shape(m_[k]) || !p.value.same_shape(m_[k])) {
      throw DimensionError("adam_step: shape mismatch for " + p.name);
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m_[k][i] = b1 * m_[k][i] + (1.0 - b1) * g;
      v_[k][i] = b2 * v_[k][i] + (1.0 - b2) * g * g;
      const double m_hat = m_[k][i] / corr1;
      const double v_hat = v_[k][i] / corr2;
      p.value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
    p.zero_grad();
  }
}

double global_grad_norm(const ParamRefs& params) {
  double s = 0.0;
  for (const ParamTensor* p : params) {
    for (double g : p->grad.values()) s += g * g;
  }
  return std::sqrt(s);
}

double clip_global_norm(const ParamRefs& params, double max_norm) {
  if (!(max_norm > 0)) throw std::invalid_argument("clip_global_norm: max_norm must be positive");
  const double norm = global_grad_norm(params);
  // The slack keeps a second call on already-clipped gradients a no-op.
  if (norm <= max_norm * (1.0 + 1e-12)) return 1.0;
  const double factor = max_norm / norm;
  for (ParamTensor* p : params) {
    for (double& g : p->grad.values()) g *= factor;
  }
  return factor;
}

}  // namespace doer

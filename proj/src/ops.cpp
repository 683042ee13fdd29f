#include "doer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace doer {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor activation(const Tensor& x, Activation kind) {
  x.require_finite("activation input");
  Tensor out = x;
  for (double& v : out.values()) v = kind == Activation::kTanh ? std::tanh(v) : sigmoid(v);
  return out;
}

Tensor activation_backward(const Tensor& out, const Tensor& grad_out, Activation kind) {
  if (!out.same_shape(grad_out)) throw DimensionError("activation_backward: shape mismatch");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = out[i];
    g[i] *= kind == Activation::kTanh ? 1.0 - y * y : y * (1.0 - y);
  }
  return g;
}

Tensor softmax_rows(const Tensor& m) {
  m.require_finite("softmax input");
  Tensor out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : row) v /= z;
  }
  return out;
}

Tensor softmax_rows_backward(const Tensor& probs, const Tensor& grad_probs) {
  if (!probs.same_shape(grad_probs)) throw DimensionError("softmax_rows_backward: shape mismatch");
  Tensor g = Tensor(probs.shape());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    auto p = probs.row(r);
    auto dp = grad_probs.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) dot += p[c] * dp[c];
    auto out = g.row(r);
    for (std::size_t c = 0; c < p.size(); ++c) out[c] = p[c] * (dp[c] - dot);
  }
  return g;
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double mx = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

DropoutResult dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  DropoutResult r{x, Tensor(x.shape(), 1.0)};
  if (!training || rate == 0.0) return r;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : keep_scale;
    r.mask[i] = m;
    r.output[i] = x[i] * m;
  }
  return r;
}

Tensor dropout_backward(const Tensor& mask, const Tensor& grad_out) {
  if (!mask.same_shape(grad_out)) throw DimensionError("dropout_backward: shape mismatch");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
  return g;
}

void add_inplace(Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("add_inplace: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace doer

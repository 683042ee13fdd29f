#pragma once

#include <span>

#include "doer/rng.hpp"
#include "doer/tensor.hpp"

namespace doer {

enum class Activation { kTanh, kSigmoid };

double sigmoid(double x);

/// Elementwise tanh or logistic. Throws NumericError on non-finite input.
Tensor activation(const Tensor& x, Activation kind);

/// Adjoint of `activation` expressed through its output:
/// 1 - t^2 for tanh, s(1 - s) for sigmoid.
Tensor activation_backward(const Tensor& out, const Tensor& grad_out, Activation kind);

/// Row-wise softmax, stabilized by subtracting the row maximum.
Tensor softmax_rows(const Tensor& m);

/// Adjoint of `softmax_rows`: dS = P * (dP - rowsum(dP * P)).
Tensor softmax_rows_backward(const Tensor& probs, const Tensor& grad_probs);

double log_sum_exp(std::span<const double> xs);

/// Inverted dropout. `mask` holds 0 for dropped entries and 1/(1-rate) for
/// survivors, so the adjoint is a plain elementwise product with it.
struct DropoutResult {
  Tensor output;
  Tensor mask;
};

DropoutResult dropout(const Tensor& x, double rate, bool training, Rng& rng);

/// dx = dy * mask.
Tensor dropout_backward(const Tensor& mask, const Tensor& grad_out);

// a += b, elementwise.
void add_inplace(Tensor& a, const Tensor& b);

}  // namespace doer

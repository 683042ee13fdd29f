#pragma once

#include <span>
#include <string>
#include <vector>

#include "doer/rng.hpp"
#include "doer/tags.hpp"
#include "doer/tensor.hpp"

namespace doer {

/// Training-only heads on the first BiReGU layer of each branch.
struct AuxParams {
  AuxParams() = default;
  AuxParams(const std::string& prefix, std::size_t width);

  ParamTensor W_uA, b_uA;  // aspect-branch length regressor
  ParamTensor W_uP, b_uP;  // polarity-branch length regressor
  ParamTensor W_s, b_s;    // width x 3 lexicon classifier, (positive, negative, none)

  void collect_length(ParamRefs& out);
  void collect_sentiment(ParamRefs& out);
  void initialize(Rng& rng);
};

struct LengthHeadResult {
  double z = 0.0;
  std::vector<double> pooled;
  std::vector<std::size_t> argmax;  // source row per column, earliest on ties
};

/// sigmoid(w . maxpool_rows(H) + b).
LengthHeadResult length_head(const Tensor& h, const Tensor& w, double b);

/// Given dL/dz, accumulates dw and db and adds dL/dH into `grad_h`.
void length_head_backward(const LengthHeadResult& r, double grad_z, ParamTensor& w, ParamTensor& b,
                          Tensor& grad_h);

inline double length_loss(double z, double target) { return (z - target) * (z - target); }

/// softmax(W_s^T h + b_s) for a single feature vector.
std::vector<double> sentiment_head(std::span<const double> h, const Tensor& W_s, const Tensor& b_s);
/// Row-wise version over all tokens: n x 3.
Tensor sentiment_probs(const Tensor& h, const Tensor& W_s, const Tensor& b_s);

inline constexpr double kLogFloor = 1e-12;

/// -(1/n) sum_i log max(probs[i][target_i], 1e-12).
double sentiment_loss(const Tensor& probs, std::span<const SentimentLabel> targets);

/// Gradient of `weight * sentiment_loss` through the softmax and linear
/// map. Accumulates dW_s, db_s and adds dL/dH into `grad_h`.
void sentiment_backward(const Tensor& h, const Tensor& probs, std::span<const SentimentLabel> targets, double weight,
                        ParamTensor& W_s, ParamTensor& b_s, Tensor& grad_h);

}  // namespace doer

#include "doer/auxiliary.hpp"

#include <cmath>

#include "doer/kernels.hpp"
#include "doer/ops.hpp"
#include "doer/regu.hpp"

namespace doer {

using kernels::Accumulate;
using kernels::Trans;
using kernels::gemm;
using kernels::view;

AuxParams::AuxParams(const std::string& prefix, std::size_t width)
    : W_uA(prefix + ".W_uA", {width}),
      b_uA(prefix + ".b_uA", {1}),
      W_uP(prefix + ".W_uP", {width}),
      b_uP(prefix + ".b_uP", {1}),
      W_s(prefix + ".W_s", {width, kNumSentimentLabels}),
      b_s(prefix + ".b_s", {kNumSentimentLabels}) {}

void AuxParams::collect_length(ParamRefs& out) {
  for (ParamTensor* p : {&W_uA, &b_uA, &W_uP, &b_uP}) out.push_back(p);
}

void AuxParams::collect_sentiment(ParamRefs& out) {
  out.push_back(&W_s);
  out.push_back(&b_s);
}

void AuxParams::initialize(Rng& rng) {
  glorot_uniform(W_uA.value, W_uA.value.size(), 1, rng);
  glorot_uniform(W_uP.value, W_uP.value.size(), 1, rng);
  glorot_uniform(W_s.value, W_s.value.rows(), W_s.value.cols(), rng);
  for (ParamTensor* p : {&b_uA, &b_uP, &b_s}) p->value.fill(0.0);
}

LengthHeadResult length_head(const Tensor& h, const Tensor& w, double b) {
  const std::size_t n = h.rows();
  const std::size_t width = h.cols();
  if (w.size() != width) throw DimensionError("length_head: weight width mismatch");
  LengthHeadResult r;
  r.pooled.assign(width, 0.0);
  r.argmax.assign(width, 0);
  for (std::size_t c = 0; c < width; ++c) {
    double mx = h(0, c);
    std::size_t arg = 0;
    for (std::size_t t = 1; t < n; ++t) {
      if (h(t, c) > mx) {
        mx = h(t, c);
        arg = t;
      }
    }
    r.pooled[c] = mx;
    r.argmax[c] = arg;
  }
  double a = b;
  for (std::size_t c = 0; c < width; ++c) a += w[c] * r.pooled[c];
  r.z = sigmoid(a);
  return r;
}

void length_head_backward(const LengthHeadResult& r, double grad_z, ParamTensor& w, ParamTensor& b,
                          Tensor& grad_h) {
  const double da = grad_z * r.z * (1.0 - r.z);
  b.grad[0] += da;
  for (std::size_t c = 0; c < r.pooled.size(); ++c) {
    w.grad[c] += da * r.pooled[c];
    grad_h(r.argmax[c], c) += da * w.value[c];
  }
}

std::vector<double> sentiment_head(std::span<const double> h, const Tensor& W_s, const Tensor& b_s) {
  if (h.size() != W_s.rows()) throw DimensionError("sentiment_head: feature width mismatch");
  Tensor logits = b_s;
  for (std::size_t c = 0; c < W_s.cols(); ++c)
    for (std::size_t k = 0; k < h.size(); ++k) logits[c] += h[k] * W_s(k, c);
  const Tensor p = softmax_rows(logits);
  return {p.values().begin(), p.values().end()};
}

Tensor sentiment_probs(const Tensor& h, const Tensor& W_s, const Tensor& b_s) {
  Tensor logits = matmul(h, W_s);
  for (std::size_t t = 0; t < logits.rows(); ++t)
    for (std::size_t c = 0; c < logits.cols(); ++c) logits(t, c) += b_s[c];
  return softmax_rows(logits);
}

double sentiment_loss(const Tensor& probs, std::span<const SentimentLabel> targets) {
  if (targets.size() != probs.rows()) throw DimensionError("sentiment_loss: one target per token required");
  double s = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    s -= std::log(std::max(probs(t, static_cast<std::size_t>(targets[t])), kLogFloor));
  }
  return s / static_cast<double>(targets.size());
}

void sentiment_backward(const Tensor& h, const Tensor& probs, std::span<const SentimentLabel> targets, double weight,
                        ParamTensor& W_s, ParamTensor& b_s, Tensor& grad_h) {
  const std::size_t n = probs.rows();
  Tensor d_logits = Tensor::matrix(n, kNumSentimentLabels);
  const double scale = weight / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    const auto y = static_cast<std::size_t>(targets[t]);
    // Inside the floor the loss is flat in the logits.
    if (probs(t, y) < kLogFloor) continue;
    for (std::size_t c = 0; c < kNumSentimentLabels; ++c) d_logits(t, c) = scale * probs(t, c);
    d_logits(t, y) -= scale;
  }
  gemm(view(h), Trans::kYes, view(d_logits), Trans::kNo, view(W_s.grad), Accumulate::kAdd);
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t c = 0; c < kNumSentimentLabels; ++c) b_s.grad[c] += d_logits(t, c);
  gemm(view(d_logits), Trans::kNo, view(W_s.value), Trans::kYes, view(grad_h), Accumulate::kAdd);
}

}  // namespace doer

#pragma once

// Cross-shared unit. For branch m with partner branch m':
//
//   alpha_ij = tanh(h_i^T G[k] h'_j),  k = 0..K-1
//   S_ij     = v^T alpha_ij
//   h_i     <- h_i + sum_j softmax_row(S)_ij h'_j
//
// Both enhancements read the pre-update representations.

#include <span>
#include <string>
#include <vector>

#include "doer/rng.hpp"
#include "doer/tensor.hpp"

namespace doer {

struct CSUParams {
  CSUParams() = default;
  CSUParams(const std::string& prefix, std::size_t slices, std::size_t width);

  ParamTensor G_a, G_p;  // slices x width x width
  ParamTensor v_a, v_p;  // slices

  std::size_t slices() const { return G_a.value.shape()[0]; }
  std::size_t width() const { return G_a.value.shape()[1]; }
  void collect(ParamRefs& out);
  // Uniform in +-scale for both tensors and both weight vectors.
  void initialize(Rng& rng, double scale = 0.01);
};

/// Composition vector for one (i, j) pair: component k = tanh(h_i^T G[k] h_j).
std::vector<double> composition(std::span<const double> h_i, std::span<const double> h_j, const Tensor& G);

struct ScoreTrace {
  Tensor self_proj;  // slices of H_self G[k], stacked: slices x n x width
  Tensor alpha;      // slices x n x n, tanh of the bilinear forms
};

/// S[i][j] = v^T composition(H_self[i], H_other[j], G).
Tensor attention_scores(const Tensor& h_self, const Tensor& h_other, const Tensor& G, const Tensor& v,
                        ScoreTrace* trace = nullptr);

/// Accumulates dG and dv, and adds dL/dH_self and dL/dH_other into the
/// given buffers.
void attention_scores_backward(const ScoreTrace& trace, const Tensor& h_self, const Tensor& h_other,
                               const Tensor& grad_scores, ParamTensor& G, ParamTensor& v, Tensor& grad_self,
                               Tensor& grad_other);

struct CrossEnhanceResult {
  Tensor h_a;  // enhanced aspect-branch features
  Tensor h_p;  // enhanced polarity-branch features
  Tensor s_a;  // raw scores, before softmax
  Tensor s_p;
};

struct CrossEnhanceTrace {
  Tensor h_a, h_p;          // inputs
  Tensor attn_a, attn_p;    // row-softmaxed scores
  ScoreTrace score_a, score_p;
};

CrossEnhanceResult cross_enhance(const Tensor& h_a, const Tensor& h_p, const CSUParams& p,
                                 CrossEnhanceTrace* trace = nullptr);

struct CrossEnhanceGrads {
  Tensor h_a;
  Tensor h_p;
};

CrossEnhanceGrads cross_enhance_backward(const CrossEnhanceTrace& trace, const Tensor& grad_out_a,
                                         const Tensor& grad_out_p, CSUParams& p);

}  // namespace doer

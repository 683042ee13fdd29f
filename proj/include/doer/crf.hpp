#pragma once

#include <span>
#include <string>
#include <vector>

#include "doer/rng.hpp"
#include "doer/tensor.hpp"

namespace doer {

/// Linear-chain CRF over `num_tags` labels with explicit start and stop
/// scores. Path score:
///   start[y_0] + sum_t em[t][y_t] + sum_{t>0} trans[y_{t-1}][y_t] + stop[y_{n-1}]
struct CRFParams {
  CRFParams() = default;
  CRFParams(const std::string& prefix, std::size_t input_dim, std::size_t num_tags);

  ParamTensor W_c;          // input x tags
  ParamTensor b_c;          // tags
  ParamTensor transitions;  // tags x tags, [from][to]
  ParamTensor start;        // tags
  ParamTensor stop;         // tags

  std::size_t num_tags() const { return b_c.value.size(); }
  void collect(ParamRefs& out);
  // Glorot W_c; biases, transitions, start and stop at zero.
  void initialize(Rng& rng);
};

/// em = H W_c + b_c.
Tensor emissions(const Tensor& h, const CRFParams& p);
/// Accumulates dW_c, db_c and returns dL/dH.
Tensor emissions_backward(const Tensor& h, const Tensor& grad_em, CRFParams& p);

double path_score(const Tensor& em, const CRFParams& p, std::span<const std::size_t> tags);

/// log of the sum over all paths of exp(path score), by the forward
/// algorithm in log space.
double log_partition(const Tensor& em, const CRFParams& p);

/// path_score(tags) - log_partition. Throws std::out_of_range for a tag
/// index outside [0, num_tags).
double log_likelihood(const Tensor& em, const CRFParams& p, std::span<const std::size_t> tags);

/// Computes -log_likelihood, writes dNLL/d(em) into `grad_em` (n x tags)
/// and accumulates transition/start/stop gradients into `p`, each scaled by
/// `weight`.
double crf_nll_backward(const Tensor& em, CRFParams& p, std::span<const std::size_t> tags, Tensor& grad_em,
                        double weight = 1.0);

/// Highest-scoring path. Ties go to the lower tag index.
std::vector<std::size_t> viterbi(const Tensor& em, const CRFParams& p);

}  // namespace doer

#include "doer/crf.hpp"

#include <cmath>
#include <stdexcept>

#include "doer/kernels.hpp"
#include "doer/ops.hpp"
#include "doer/regu.hpp"

namespace doer {

using kernels::Accumulate;
using kernels::Trans;
using kernels::gemm;
using kernels::view;

CRFParams::CRFParams(const std::string& prefix, std::size_t input_dim, std::size_t num_tags)
    : W_c(prefix + ".W_c", {input_dim, num_tags}),
      b_c(prefix + ".b_c", {num_tags}),
      transitions(prefix + ".transitions", {num_tags, num_tags}),
      start(prefix + ".start", {num_tags}),
      stop(prefix + ".stop", {num_tags}) {}

void CRFParams::collect(ParamRefs& out) {
  for (ParamTensor* p : {&W_c, &b_c, &transitions, &start, &stop}) out.push_back(p);
}

void CRFParams::initialize(Rng& rng) {
  glorot_uniform(W_c.value, W_c.value.rows(), W_c.value.cols(), rng);
  for (ParamTensor* p : {&b_c, &transitions, &start, &stop}) p->value.fill(0.0);
}

Tensor emissions(const Tensor& h, const CRFParams& p) {
  if (h.cols() != p.W_c.value.rows()) {
    throw DimensionError("emissions: input width " + std::to_string(h.cols()) + " but W_c is " +
                         shape_string(p.W_c.value.shape()));
  }
  Tensor em = matmul(h, p.W_c.value);
  for (std::size_t t = 0; t < em.rows(); ++t)
    for (std::size_t y = 0; y < em.cols(); ++y) em(t, y) += p.b_c.value[y];
  return em;
}

Tensor emissions_backward(const Tensor& h, const Tensor& grad_em, CRFParams& p) {
  gemm(view(h), Trans::kYes, view(grad_em), Trans::kNo, view(p.W_c.grad), Accumulate::kAdd);
  for (std::size_t t = 0; t < grad_em.rows(); ++t)
    for (std::size_t y = 0; y < grad_em.cols(); ++y) p.b_c.grad[y] += grad_em(t, y);
  return matmul_nt(grad_em, p.W_c.value);
}

namespace {

void check_emissions(const Tensor& em, const CRFParams& p) {
  if (em.rank() != 2 || em.cols() != p.num_tags()) {
    throw DimensionError("CRF emissions " + shape_string(em.shape()) + " for " + std::to_string(p.num_tags()) +
                         " tags");
  }
}

void check_tags(std::span<const std::size_t> tags, std::size_t n, std::size_t num_tags) {
  if (tags.size() != n) throw DimensionError("CRF tag sequence length differs from emissions");
  for (std::size_t y : tags) {
    if (y >= num_tags) throw std::out_of_range("CRF tag index " + std::to_string(y) + " out of range");
  }
}

// alpha[t][y]: log-sum of all prefix paths ending in y at t.
Tensor forward_table(const Tensor& em, const CRFParams& p) {
  const std::size_t n = em.rows();
  const std::size_t T = p.num_tags();
  Tensor alpha = Tensor::matrix(n, T);
  for (std::size_t y = 0; y < T; ++y) alpha(0, y) = p.start.value[y] + em(0, y);
  std::vector<double> terms(T);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t y = 0; y < T; ++y) {
      for (std::size_t a = 0; a < T; ++a) terms[a] = alpha(t - 1, a) + p.transitions.value(a, y);
      alpha(t, y) = log_sum_exp(terms) + em(t, y);
    }
  }
  return alpha;
}

// beta[t][y]: log-sum of all suffix paths after t given y at t, stop included.
Tensor backward_table(const Tensor& em, const CRFParams& p) {
  const std::size_t n = em.rows();
  const std::size_t T = p.num_tags();
  Tensor beta = Tensor::matrix(n, T);
  for (std::size_t y = 0; y < T; ++y) beta(n - 1, y) = p.stop.value[y];
  std::vector<double> terms(T);
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t y = 0; y < T; ++y) {
      for (std::size_t b = 0; b < T; ++b) terms[b] = p.transitions.value(y, b) + em(t + 1, b) + beta(t + 1, b);
      beta(t, y) = log_sum_exp(terms);
    }
  }
  return beta;
}

double final_log_z(const Tensor& alpha, const CRFParams& p) {
  const std::size_t n = alpha.rows();
  const std::size_t T = p.num_tags();
  std::vector<double> terms(T);
  for (std::size_t y = 0; y < T; ++y) terms[y] = alpha(n - 1, y) + p.stop.value[y];
  return log_sum_exp(terms);
}

}  // namespace

double path_score(const Tensor& em, const CRFParams& p, std::span<const std::size_t> tags) {
  check_emissions(em, p);
  check_tags(tags, em.rows(), p.num_tags());
  double s = p.start.value[tags[0]] + p.stop.value[tags.back()];
  for (std::size_t t = 0; t < tags.size(); ++t) {
    s += em(t, tags[t]);
    if (t > 0) s += p.transitions.value(tags[t - 1], tags[t]);
  }
  return s;
}

double log_partition(const Tensor& em, const CRFParams& p) {
  check_emissions(em, p);
  return final_log_z(forward_table(em, p), p);
}

double log_likelihood(const Tensor& em, const CRFParams& p, std::span<const std::size_t> tags) {
  return path_score(em, p, tags) - log_partition(em, p);
}

double crf_nll_backward(const Tensor& em, CRFParams& p, std::span<const std::size_t> tags, Tensor& grad_em,
                        double weight) {
  check_emissions(em, p);
  check_tags(tags, em.rows(), p.num_tags());
  const std::size_t n = em.rows();
  const std::size_t T = p.num_tags();
  const Tensor alpha = forward_table(em, p);
  const Tensor beta = backward_table(em, p);
  const double log_z = final_log_z(alpha, p);
  const double nll = log_z - path_score(em, p, tags);

  // Expected counts under the model minus observed counts.
  grad_em = Tensor::matrix(n, T);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t y = 0; y < T; ++y) grad_em(t, y) = weight * std::exp(alpha(t, y) + beta(t, y) - log_z);
    grad_em(t, tags[t]) -= weight;
  }
  for (std::size_t y = 0; y < T; ++y) {
    p.start.grad[y] += grad_em(0, y);
    p.stop.grad[y] += grad_em(n - 1, y);
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t a = 0; a < T; ++a) {
      for (std::size_t b = 0; b < T; ++b) {
        const double marg =
            std::exp(alpha(t - 1, a) + p.transitions.value(a, b) + em(t, b) + beta(t, b) - log_z);
        p.transitions.grad(a, b) += weight * marg;
      }
    }
    p.transitions.grad(tags[t - 1], tags[t]) -= weight;
  }
  return nll;
}

std::vector<std::size_t> viterbi(const Tensor& em, const CRFParams& p) {
  check_emissions(em, p);
  const std::size_t n = em.rows();
  const std::size_t T = p.num_tags();
  Tensor best = Tensor::matrix(n, T);
  std::vector<std::size_t> back(n * T, 0);
  for (std::size_t y = 0; y < T; ++y) best(0, y) = p.start.value[y] + em(0, y);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t y = 0; y < T; ++y) {
      std::size_t arg = 0;
      double mx = best(t - 1, 0) + p.transitions.value(0, y);
      for (std::size_t a = 1; a < T; ++a) {
        const double s = best(t - 1, a) + p.transitions.value(a, y);
        if (s > mx) {
          mx = s;
          arg = a;
        }
      }
      best(t, y) = mx + em(t, y);
      back[t * T + y] = arg;
    }
  }
  std::size_t last = 0;
  double mx = best(n - 1, 0) + p.stop.value[0];
  for (std::size_t y = 1; y < T; ++y) {
    const double s = best(n - 1, y) + p.stop.value[y];
    if (s > mx) {
      mx = s;
      last = y;
    }
  }
  std::vector<std::size_t> path(n);
  path[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t * T + path[t]];
  return path;
}

}  // namespace doer

#include "doer/csu.hpp"

#include <cmath>

#include "doer/kernels.hpp"
#include "doer/ops.hpp"

namespace doer {

using kernels::Accumulate;
using kernels::Trans;
using kernels::gemm;
using kernels::slice_view;
using kernels::view;

CSUParams::CSUParams(const std::string& prefix, std::size_t slices, std::size_t width)
    : G_a(prefix + ".G_a", {slices, width, width}),
      G_p(prefix + ".G_p", {slices, width, width}),
      v_a(prefix + ".v_a", {slices}),
      v_p(prefix + ".v_p", {slices}) {}

void CSUParams::collect(ParamRefs& out) {
  for (ParamTensor* p : {&G_a, &G_p, &v_a, &v_p}) out.push_back(p);
}

void CSUParams::initialize(Rng& rng, double scale) {
  for (ParamTensor* p : {&G_a, &G_p, &v_a, &v_p}) {
    for (double& x : p->value.values()) x = rng.uniform(-scale, scale);
  }
}

std::vector<double> composition(std::span<const double> h_i, std::span<const double> h_j, const Tensor& G) {
  if (G.rank() != 3 || G.shape()[1] != h_i.size() || G.shape()[2] != h_j.size()) {
    throw DimensionError("composition: G is " + shape_string(G.shape()));
  }
  const std::size_t slices = G.shape()[0];
  const std::size_t w = h_i.size();
  std::vector<double> out(slices);
  for (std::size_t k = 0; k < slices; ++k) {
    const auto g = G.slice(k);
    double s = 0.0;
    for (std::size_t a = 0; a < w; ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < h_j.size(); ++b) row += g[a * h_j.size() + b] * h_j[b];
      s += h_i[a] * row;
    }
    out[k] = std::tanh(s);
  }
  return out;
}

Tensor attention_scores(const Tensor& h_self, const Tensor& h_other, const Tensor& G, const Tensor& v,
                        ScoreTrace* trace) {
  const std::size_t n = h_self.rows();
  const std::size_t w = h_self.cols();
  if (G.rank() != 3 || G.shape()[1] != w || G.shape()[2] != w || h_other.cols() != w || h_other.rows() != n ||
      v.size() != G.shape()[0]) {
    throw DimensionError("attention_scores: inconsistent shapes");
  }
  const std::size_t slices = G.shape()[0];
  Tensor proj({slices, n, w});
  Tensor alpha({slices, n, n});
  Tensor scores = Tensor::matrix(n, n);
  for (std::size_t k = 0; k < slices; ++k) {
    // (h_i^T G[k]) for every i, then dot with every h_j.
    gemm(view(h_self), Trans::kNo, slice_view(G, k), Trans::kNo, slice_view(proj, k));
    auto a = slice_view(alpha, k);
    gemm(slice_view(proj, k), Trans::kNo, view(h_other), Trans::kYes, a);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) = std::tanh(a(i, j));
        scores(i, j) += v[k] * a(i, j);
      }
    }
  }
  if (trace) {
    trace->self_proj = std::move(proj);
    trace->alpha = std::move(alpha);
  }
  return scores;
}

void attention_scores_backward(const ScoreTrace& trace, const Tensor& h_self, const Tensor& h_other,
                               const Tensor& grad_scores, ParamTensor& G, ParamTensor& v, Tensor& grad_self,
                               Tensor& grad_other) {
  const std::size_t n = h_self.rows();
  const std::size_t w = h_self.cols();
  const std::size_t slices = G.value.shape()[0];
  Tensor m = Tensor::matrix(n, n);
  Tensor q = Tensor::matrix(n, w);
  for (std::size_t k = 0; k < slices; ++k) {
    const auto a = slice_view(trace.alpha, k);
    double dv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double ds = grad_scores(i, j);
        dv += ds * a(i, j);
        m(i, j) = ds * v.value[k] * (1.0 - a(i, j) * a(i, j));
      }
    }
    v.grad[k] += dv;
    // q = M H_other; dH_self += q G[k]^T; dG[k] += H_self^T q; dH_other += M^T (H_self G[k]).
    gemm(view(m), Trans::kNo, view(h_other), Trans::kNo, view(q));
    gemm(view(q), Trans::kNo, slice_view(G.value, k), Trans::kYes, view(grad_self), Accumulate::kAdd);
    gemm(view(h_self), Trans::kYes, view(q), Trans::kNo, slice_view(G.grad, k), Accumulate::kAdd);
    gemm(view(m), Trans::kYes, slice_view(trace.self_proj, k), Trans::kNo, view(grad_other), Accumulate::kAdd);
  }
}

CrossEnhanceResult cross_enhance(const Tensor& h_a, const Tensor& h_p, const CSUParams& p,
                                 CrossEnhanceTrace* trace) {
  if (!h_a.same_shape(h_p)) throw DimensionError("cross_enhance: branch outputs differ in shape");
  CrossEnhanceResult r;
  ScoreTrace sa, sp;
  r.s_a = attention_scores(h_a, h_p, p.G_a.value, p.v_a.value, trace ? &sa : nullptr);
  r.s_p = attention_scores(h_p, h_a, p.G_p.value, p.v_p.value, trace ? &sp : nullptr);
  Tensor attn_a = softmax_rows(r.s_a);
  Tensor attn_p = softmax_rows(r.s_p);
  r.h_a = h_a;
  r.h_p = h_p;
  gemm(view(attn_a), Trans::kNo, view(h_p), Trans::kNo, view(r.h_a), Accumulate::kAdd);
  gemm(view(attn_p), Trans::kNo, view(h_a), Trans::kNo, view(r.h_p), Accumulate::kAdd);
  if (trace) {
    trace->h_a = h_a;
    trace->h_p = h_p;
    trace->attn_a = std::move(attn_a);
    trace->attn_p = std::move(attn_p);
    trace->score_a = std::move(sa);
    trace->score_p = std::move(sp);
  }
  return r;
}

CrossEnhanceGrads cross_enhance_backward(const CrossEnhanceTrace& tr, const Tensor& grad_out_a,
                                         const Tensor& grad_out_p, CSUParams& p) {
  CrossEnhanceGrads g{grad_out_a, grad_out_p};
  // out_a = h_a + A_a h_p, out_p = h_p + A_p h_a.
  gemm(view(tr.attn_a), Trans::kYes, view(grad_out_a), Trans::kNo, view(g.h_p), Accumulate::kAdd);
  gemm(view(tr.attn_p), Trans::kYes, view(grad_out_p), Trans::kNo, view(g.h_a), Accumulate::kAdd);
  const Tensor d_attn_a = matmul_nt(grad_out_a, tr.h_p);
  const Tensor d_attn_p = matmul_nt(grad_out_p, tr.h_a);
  const Tensor d_scores_a = softmax_rows_backward(tr.attn_a, d_attn_a);
  const Tensor d_scores_p = softmax_rows_backward(tr.attn_p, d_attn_p);
  attention_scores_backward(tr.score_a, tr.h_a, tr.h_p, d_scores_a, p.G_a, p.v_a, g.h_a, g.h_p);
  attention_scores_backward(tr.score_p, tr.h_p, tr.h_a, d_scores_p, p.G_p, p.v_p, g.h_p, g.h_a);
  return g;
}

}  // namespace doer

#include "doer/regu.hpp"

#include <cmath>

#include "doer/kernels.hpp"
#include "doer/ops.hpp"

namespace doer {

using kernels::Accumulate;
using kernels::Trans;
using kernels::gemm;
using kernels::view;

void glorot_uniform(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
}

ReGUCell::ReGUCell(const std::string& prefix, std::size_t input, std::size_t hidden)
    : input_dim(input), hidden_dim(hidden) {
  W_i = ParamTensor(prefix + ".W_i", {hidden, input});
  W_f = ParamTensor(prefix + ".W_f", {hidden, input});
  W_o = ParamTensor(prefix + ".W_o", {hidden, input});
  U_f = ParamTensor(prefix + ".U_f", {hidden, hidden});
  U_o = ParamTensor(prefix + ".U_o", {hidden, hidden});
  if (has_input_projection()) W_x = ParamTensor(prefix + ".W_x", {hidden, input});
  b_i = ParamTensor(prefix + ".b_i", {hidden});
  b_f = ParamTensor(prefix + ".b_f", {hidden});
  b_o = ParamTensor(prefix + ".b_o", {hidden});
}

void ReGUCell::collect(ParamRefs& out) {
  for (ParamTensor* p : {&W_i, &W_f, &W_o, &U_f, &U_o}) out.push_back(p);
  if (has_input_projection()) out.push_back(&W_x);
  for (ParamTensor* p : {&b_i, &b_f, &b_o}) out.push_back(p);
}

void ReGUCell::initialize(Rng& rng) {
  for (ParamTensor* p : {&W_i, &W_f, &W_o}) glorot_uniform(p->value, input_dim, hidden_dim, rng);
  for (ParamTensor* p : {&U_f, &U_o}) glorot_uniform(p->value, hidden_dim, hidden_dim, rng);
  if (has_input_projection()) glorot_uniform(W_x.value, input_dim, hidden_dim, rng);
  for (ParamTensor* p : {&b_i, &b_f, &b_o}) p->value.fill(0.0);
}

namespace {

double dot_row(const Tensor& m, std::size_t r, std::span<const double> v) {
  const auto row = m.row(r);
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += row[k] * v[k];
  return s;
}

}  // namespace

ReGUState regu_step(std::span<const double> x, std::span<const double> c_prev, const ReGUCell& cell) {
  const std::size_t d = cell.hidden_dim;
  if (x.size() != cell.input_dim || c_prev.size() != d) throw DimensionError("regu_step: shape mismatch");
  ReGUState s{std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t j = 0; j < d; ++j) {
    const double f = sigmoid(dot_row(cell.W_f.value, j, x) + dot_row(cell.U_f.value, j, c_prev) + cell.b_f.value[j]);
    const double g = std::tanh(dot_row(cell.W_i.value, j, x) + cell.b_i.value[j]);
    const double o = sigmoid(dot_row(cell.W_o.value, j, x) + dot_row(cell.U_o.value, j, c_prev) + cell.b_o.value[j]);
    const double skip = cell.has_input_projection() ? std::tanh(dot_row(cell.W_x.value, j, x)) : x[j];
    s.c[j] = (1.0 - f) * c_prev[j] + f * g;
    s.h[j] = (1.0 - o) * s.c[j] + o * skip;
  }
  return s;
}

Tensor regu_sequence(const Tensor& x, const ReGUCell& cell, bool reversed, ReGUTrace* trace) {
  if (x.rank() != 2 || x.cols() != cell.input_dim) {
    throw DimensionError("regu_sequence: input " + shape_string(x.shape()) + " for input width " +
                         std::to_string(cell.input_dim));
  }
  const std::size_t n = x.rows();
  const std::size_t d = cell.hidden_dim;

  // Input projections for every position at once.
  const Tensor pre_i = matmul_nt(x, cell.W_i.value);
  const Tensor pre_f = matmul_nt(x, cell.W_f.value);
  const Tensor pre_o = matmul_nt(x, cell.W_o.value);
  Tensor skip = cell.has_input_projection() ? activation(matmul_nt(x, cell.W_x.value), Activation::kTanh) : x;

  Tensor c_prev_all = Tensor::matrix(n, d);
  Tensor f_all = Tensor::matrix(n, d), g_all = Tensor::matrix(n, d), o_all = Tensor::matrix(n, d);
  Tensor c_all = Tensor::matrix(n, d), h_all = Tensor::matrix(n, d);

  std::vector<double> c(d, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t t = reversed ? n - 1 - s : s;
    std::copy(c.begin(), c.end(), c_prev_all.row(t).begin());
    const auto cp = c_prev_all.row(t);
    for (std::size_t j = 0; j < d; ++j) {
      const double f = sigmoid(pre_f(t, j) + dot_row(cell.U_f.value, j, cp) + cell.b_f.value[j]);
      const double g = std::tanh(pre_i(t, j) + cell.b_i.value[j]);
      const double o = sigmoid(pre_o(t, j) + dot_row(cell.U_o.value, j, cp) + cell.b_o.value[j]);
      const double ct = (1.0 - f) * cp[j] + f * g;
      f_all(t, j) = f;
      g_all(t, j) = g;
      o_all(t, j) = o;
      c_all(t, j) = ct;
      h_all(t, j) = (1.0 - o) * ct + o * skip(t, j);
      c[j] = ct;
    }
  }
  h_all.require_finite("ReGU hidden state");

  if (trace) {
    trace->reversed = reversed;
    trace->x = x;
    trace->c_prev = std::move(c_prev_all);
    trace->f = std::move(f_all);
    trace->g = std::move(g_all);
    trace->o = std::move(o_all);
    trace->c = std::move(c_all);
    trace->skip = std::move(skip);
    trace->h = h_all;
  }
  return h_all;
}

Tensor regu_sequence_backward(const ReGUTrace& tr, const Tensor& grad_h, ReGUCell& cell) {
  const std::size_t n = tr.x.rows();
  const std::size_t d = cell.hidden_dim;
  if (grad_h.rows() != n || grad_h.cols() != d) throw DimensionError("regu_sequence_backward: grad shape");

  Tensor da_i = Tensor::matrix(n, d), da_f = Tensor::matrix(n, d), da_o = Tensor::matrix(n, d);
  Tensor d_skip = Tensor::matrix(n, d);
  std::vector<double> dc_next(d, 0.0);
  std::vector<double> dc(d);

  for (std::size_t s = n; s-- > 0;) {
    const std::size_t t = tr.reversed ? n - 1 - s : s;
    for (std::size_t j = 0; j < d; ++j) {
      const double dh = grad_h(t, j);
      const double f = tr.f(t, j), g = tr.g(t, j), o = tr.o(t, j);
      const double ct = tr.c(t, j), cp = tr.c_prev(t, j);
      const double d_o = dh * (tr.skip(t, j) - ct);
      dc[j] = dc_next[j] + dh * (1.0 - o);
      d_skip(t, j) = dh * o;
      da_o(t, j) = d_o * o * (1.0 - o);
      da_f(t, j) = dc[j] * (g - cp) * f * (1.0 - f);
      da_i(t, j) = dc[j] * f * (1.0 - g * g);
    }
    // Carry into c_{t-1}: direct path plus both recurrent gate paths.
    const auto af = da_f.row(t);
    const auto ao = da_o.row(t);
    for (std::size_t k = 0; k < d; ++k) dc_next[k] = dc[k] * (1.0 - tr.f(t, k));
    for (std::size_t j = 0; j < d; ++j) {
      const auto uf = cell.U_f.value.row(j);
      const auto uo = cell.U_o.value.row(j);
      for (std::size_t k = 0; k < d; ++k) dc_next[k] += uf[k] * af[j] + uo[k] * ao[j];
    }
  }

  auto accumulate_weight = [&](const Tensor& da, ParamTensor& w, const Tensor& input) {
    gemm(view(da), Trans::kYes, view(input), Trans::kNo, view(w.grad), Accumulate::kAdd);
  };
  auto accumulate_bias = [&](const Tensor& da, ParamTensor& b) {
    for (std::size_t t = 0; t < n; ++t)
      for (std::size_t j = 0; j < d; ++j) b.grad[j] += da(t, j);
  };

  accumulate_weight(da_i, cell.W_i, tr.x);
  accumulate_weight(da_f, cell.W_f, tr.x);
  accumulate_weight(da_o, cell.W_o, tr.x);
  accumulate_weight(da_f, cell.U_f, tr.c_prev);
  accumulate_weight(da_o, cell.U_o, tr.c_prev);
  accumulate_bias(da_i, cell.b_i);
  accumulate_bias(da_f, cell.b_f);
  accumulate_bias(da_o, cell.b_o);

  Tensor dx = matmul(da_i, cell.W_i.value);
  gemm(view(da_f), Trans::kNo, view(cell.W_f.value), Trans::kNo, view(dx), Accumulate::kAdd);
  gemm(view(da_o), Trans::kNo, view(cell.W_o.value), Trans::kNo, view(dx), Accumulate::kAdd);
  if (cell.has_input_projection()) {
    const Tensor da_x = activation_backward(tr.skip, d_skip, Activation::kTanh);
    accumulate_weight(da_x, cell.W_x, tr.x);
    gemm(view(da_x), Trans::kNo, view(cell.W_x.value), Trans::kNo, view(dx), Accumulate::kAdd);
  } else {
    add_inplace(dx, d_skip);
  }
  return dx;
}

BiReGULayer::BiReGULayer(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim)
    : forward(prefix + ".fwd", input_dim, hidden_dim), backward(prefix + ".bwd", input_dim, hidden_dim) {}

void BiReGULayer::collect(ParamRefs& out) {
  forward.collect(out);
  backward.collect(out);
}

void BiReGULayer::initialize(Rng& rng) {
  forward.initialize(rng);
  backward.initialize(rng);
}

Tensor bi_regu_forward(const Tensor& x, const BiReGULayer& layer, BiReGUTrace* trace) {
  const Tensor hf = regu_sequence(x, layer.forward, false, trace ? &trace->forward : nullptr);
  const Tensor hb = regu_sequence(x, layer.backward, true, trace ? &trace->backward : nullptr);
  const std::size_t n = x.rows();
  const std::size_t d = layer.forward.hidden_dim;
  Tensor out = Tensor::matrix(n, 2 * d);
  for (std::size_t t = 0; t < n; ++t) {
    auto row = out.row(t);
    std::copy(hf.row(t).begin(), hf.row(t).end(), row.begin());
    std::copy(hb.row(t).begin(), hb.row(t).end(), row.begin() + static_cast<std::ptrdiff_t>(d));
  }
  return out;
}

Tensor bi_regu_backward(const BiReGUTrace& trace, const Tensor& grad_out, BiReGULayer& layer) {
  const std::size_t n = grad_out.rows();
  const std::size_t d = layer.forward.hidden_dim;
  Tensor gf = Tensor::matrix(n, d), gb = Tensor::matrix(n, d);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      gf(t, j) = grad_out(t, j);
      gb(t, j) = grad_out(t, d + j);
    }
  }
  Tensor dx = regu_sequence_backward(trace.forward, gf, layer.forward);
  add_inplace(dx, regu_sequence_backward(trace.backward, gb, layer.backward));
  return dx;
}

BranchStack::BranchStack(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim,
                         std::size_t num_layers) {
  if (num_layers == 0) throw DimensionError("a branch needs at least one BiReGU layer");
  for (std::size_t l = 0; l < num_layers; ++l) {
    layers.emplace_back(prefix + ".l" + std::to_string(l + 1), l == 0 ? input_dim : 2 * hidden_dim, hidden_dim);
  }
}

void BranchStack::collect(ParamRefs& out) {
  for (auto& l : layers) l.collect(out);
}

void BranchStack::initialize(Rng& rng) {
  for (auto& l : layers) l.initialize(rng);
}

BranchOutput branch_forward(const Tensor& x, const BranchStack& stack, const DropoutContext& ctx,
                            BranchTrace* trace) {
  if (ctx.training && ctx.rate > 0.0 && !ctx.rng) throw std::invalid_argument("branch_forward: dropout needs an rng");
  Rng dummy(0);
  Rng& rng = ctx.rng ? *ctx.rng : dummy;
  if (trace) {
    trace->masks.clear();
    trace->layers.assign(stack.layers.size(), {});
  }
  BranchOutput out;
  Tensor h = x;
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    DropoutResult dr = dropout(h, ctx.rate, ctx.training, rng);
    if (trace) trace->masks.push_back(std::move(dr.mask));
    h = bi_regu_forward(dr.output, stack.layers[l], trace ? &trace->layers[l] : nullptr);
    if (l == 0) out.first_layer = h;
  }
  DropoutResult dr = dropout(h, ctx.rate, ctx.training, rng);
  if (trace) trace->masks.push_back(std::move(dr.mask));
  out.top = std::move(dr.output);
  return out;
}

Tensor branch_backward(const BranchTrace& trace, const Tensor* grad_first_layer, const Tensor& grad_top,
                       BranchStack& stack) {
  const std::size_t layers = stack.layers.size();
  Tensor g = dropout_backward(trace.masks[layers], grad_top);
  for (std::size_t l = layers; l-- > 0;) {
    if (l == 0 && grad_first_layer) add_inplace(g, *grad_first_layer);
    Tensor d_in = bi_regu_backward(trace.layers[l], g, stack.layers[l]);
    g = dropout_backward(trace.masks[l], d_in);
  }
  return g;
}

}  // namespace doer

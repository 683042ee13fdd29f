#pragma once

// Residual gated recurrent unit and its bidirectional, stacked wrappers.
//
//   f_t = sigmoid(W_f x_t + U_f c_{t-1} + b_f)
//   c_t = (1 - f_t) * c_{t-1} + f_t * tanh(W_i x_t + b_i)
//   o_t = sigmoid(W_o x_t + U_o c_{t-1} + b_o)
//   h_t = (1 - o_t) * c_t + o_t * x~_t,   x~_t = x_t or tanh(W_x x_t)
//
// x~_t is the identity when the input width equals the hidden width.

#include <span>
#include <string>
#include <vector>

#include "doer/rng.hpp"
#include "doer/tensor.hpp"

namespace doer {

struct ReGUCell {
  ReGUCell() = default;
  ReGUCell(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  ParamTensor W_i, W_f, W_o;  // hidden x input
  ParamTensor U_f, U_o;       // hidden x hidden
  ParamTensor W_x;            // hidden x input, only when input_dim != hidden_dim
  ParamTensor b_i, b_f, b_o;

  bool has_input_projection() const { return input_dim != hidden_dim; }
  void collect(ParamRefs& out);
  // Glorot-uniform weights, zero biases.
  void initialize(Rng& rng);
};

struct ReGUState {
  std::vector<double> c;
  std::vector<double> h;
};

/// One step of the cell on a single input vector.
ReGUState regu_step(std::span<const double> x, std::span<const double> c_prev, const ReGUCell& cell);

/// Activations of one direction over a sentence, indexed by token position.
struct ReGUTrace {
  bool reversed = false;
  Tensor x;        // n x input
  Tensor c_prev;   // state entering each position
  Tensor f, g, o;  // forget gate, tanh candidate, residual gate
  Tensor c;
  Tensor skip;     // x~
  Tensor h;
};

/// Runs the cell over all rows of `x` (last to first when `reversed`),
/// starting from c = 0. Returns h as an n x hidden tensor.
Tensor regu_sequence(const Tensor& x, const ReGUCell& cell, bool reversed, ReGUTrace* trace = nullptr);

/// Backpropagates dL/dh through a traced run. Accumulates parameter
/// gradients into `cell` and returns dL/dx.
Tensor regu_sequence_backward(const ReGUTrace& trace, const Tensor& grad_h, ReGUCell& cell);

struct BiReGULayer {
  BiReGULayer() = default;
  BiReGULayer(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim);

  ReGUCell forward;
  ReGUCell backward;

  std::size_t output_dim() const { return 2 * forward.hidden_dim; }
  void collect(ParamRefs& out);
  void initialize(Rng& rng);
};

struct BiReGUTrace {
  ReGUTrace forward;
  ReGUTrace backward;
};

/// Row t is the forward state at t followed by the backward state at t.
Tensor bi_regu_forward(const Tensor& x, const BiReGULayer& layer, BiReGUTrace* trace = nullptr);
Tensor bi_regu_backward(const BiReGUTrace& trace, const Tensor& grad_out, BiReGULayer& layer);

struct DropoutContext {
  double rate = 0.0;
  bool training = false;
  Rng* rng = nullptr;
};

/// Stacked BiReGU layers; layer k > 0 reads the 2d-wide output of layer k-1.
struct BranchStack {
  BranchStack() = default;
  BranchStack(const std::string& prefix, std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers);

  std::vector<BiReGULayer> layers;

  void collect(ParamRefs& out);
  void initialize(Rng& rng);
};

struct BranchOutput {
  Tensor first_layer;  // layer-1 output before dropout (auxiliary tap)
  Tensor top;          // last layer output after dropout
};

struct BranchTrace {
  std::vector<Tensor> masks;  // before each layer, then after the last
  std::vector<BiReGUTrace> layers;
};

/// dropout -> layer 1 -> dropout -> layer 2 ... -> dropout.
BranchOutput branch_forward(const Tensor& x, const BranchStack& stack, const DropoutContext& ctx,
                            BranchTrace* trace = nullptr);

/// Gradients arrive at the first-layer tap and at the top output.
/// Returns dL/dx.
Tensor branch_backward(const BranchTrace& trace, const Tensor* grad_first_layer, const Tensor& grad_top,
                       BranchStack& stack);

/// Glorot-uniform fill: +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& w, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace doer

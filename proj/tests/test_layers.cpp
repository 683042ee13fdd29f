#include <cmath>

#include "doctest.h"
#include "doer/ops.hpp"
#include "doer/gradcheck.hpp"
#include "doer/regu.hpp"
#include "helpers.hpp"

using namespace doer;
using doctest::Approx;

namespace {

oracle::Cell to_oracle(const ReGUCell& c) {
  oracle::Cell o{testing::to_mat(c.W_i.value), testing::to_mat(c.W_f.value), testing::to_mat(c.W_o.value),
                 testing::to_mat(c.U_f.value), testing::to_mat(c.U_o.value), {},
                 testing::to_vec(c.b_i.value), testing::to_vec(c.b_f.value), testing::to_vec(c.b_o.value)};
  if (c.has_input_projection()) o.W_x = testing::to_mat(c.W_x.value);
  return o;
}

void randomize(ParamRefs ps, Rng& rng, double scale = 0.5) {
  for (ParamTensor* p : ps) testing::fill_uniform(p->value, rng, -scale, scale);
}

ParamRefs refs(ReGUCell& c) {
  ParamRefs r;
  c.collect(r);
  return r;
}

ParamRefs refs(BiReGULayer& l) {
  ParamRefs r;
  l.collect(r);
  return r;
}

// Runs the oracle cell over rows of x in the given order.
oracle::Mat oracle_sequence(const oracle::Mat& x, const oracle::Cell& cell, std::size_t hidden, bool reversed) {
  oracle::Mat h(x.size());
  oracle::Vec c(hidden, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::size_t t = reversed ? x.size() - 1 - k : k;
    const auto s = oracle::regu_step(x[t], c, cell);
    c = s.c;
    h[t] = s.h;
  }
  return h;
}

double weighted_sum(const Tensor& a, const Tensor& r) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * r[i];
  return s;
}

}  // namespace

TEST_CASE("regu step closed forms") {
  ReGUCell same("c", 2, 2);
  const std::vector<double> x = {1.0, -1.0}, c0 = {0.0, 0.0};
  const ReGUState s = regu_step(x, c0, same);
  CHECK(s.c == std::vector<double>{0.0, 0.0});
  CHECK(s.h == std::vector<double>{0.5, -0.5});

  ReGUCell proj("c", 3, 2);
  CHECK(proj.has_input_projection());
  const std::vector<double> x3 = {4.0, -2.0, 7.0};
  const ReGUState p = regu_step(x3, c0, proj);
  CHECK(p.c == std::vector<double>{0.0, 0.0});
  CHECK(p.h == std::vector<double>{0.0, 0.0});
  CHECK_FALSE(same.has_input_projection());
  CHECK(same.W_x.value.size() == 0);

  const std::vector<double> wrong = {1.0};
  CHECK_THROWS_AS(regu_step(wrong, c0, same), DimensionError);
}

TEST_CASE("regu step matches the scalar oracle") {
  Rng rng(1);
  for (auto [in, hid] : {std::pair<std::size_t, std::size_t>{4, 3}, {3, 3}}) {
    ReGUCell cell("c", in, hid);
    randomize(refs(cell), rng, 1.0);
    oracle::Vec x(in), c(hid);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : c) v = rng.uniform(-0.9, 0.9);
    const ReGUState got = regu_step(x, c, cell);
    const auto want = oracle::regu_step(x, c, to_oracle(cell));
    for (std::size_t j = 0; j < hid; ++j) {
      CHECK(got.c[j] == Approx(want.c[j]).epsilon(1e-13));
      CHECK(got.h[j] == Approx(want.h[j]).epsilon(1e-13));
    }
  }
}

TEST_CASE("bidirectional layer") {
  Rng rng(2);
  BiReGULayer layer("l", 4, 3);
  randomize(refs(layer), rng, 1.0);

  SUBCASE("single step in both directions") {
    const Tensor x = testing::random_matrix(1, 4, rng);
    const Tensor out = bi_regu_forward(x, layer);
    const std::vector<double> c0(3, 0.0);
    const auto f = regu_step(x.row(0), c0, layer.forward);
    const auto b = regu_step(x.row(0), c0, layer.backward);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(out(0, j) == f.h[j]);
      CHECK(out(0, 3 + j) == b.h[j]);
    }
  }

  SUBCASE("unrolled oracle") {
    const Tensor x = testing::random_matrix(3, 4, rng);
    const Tensor out = bi_regu_forward(x, layer);
    const auto xm = testing::to_mat(x);
    const auto f = oracle_sequence(xm, to_oracle(layer.forward), 3, false);
    const auto b = oracle_sequence(xm, to_oracle(layer.backward), 3, true);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(out(t, j) == Approx(f[t][j]).epsilon(1e-13));
        CHECK(out(t, 3 + j) == Approx(b[t][j]).epsilon(1e-13));
      }
  }

  SUBCASE("palindrome with mirrored cells") {
    BiReGULayer mirror = layer;
    mirror.backward = mirror.forward;
    Tensor x = testing::random_matrix(5, 4, rng);
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t j = 0; j < 4; ++j) x(4 - t, j) = x(t, j);
    const Tensor out = bi_regu_forward(x, mirror);
    for (std::size_t t = 0; t < 5; ++t)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(out(t, j) == Approx(out(4 - t, 3 + j)).epsilon(1e-14));
      }
  }

  SUBCASE("reversal equivariance with swapped cells") {
    const Tensor x = testing::random_matrix(4, 4, rng);
    Tensor rev = x;
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t j = 0; j < 4; ++j) rev(t, j) = x(3 - t, j);
    BiReGULayer swapped = layer;
    std::swap(swapped.forward, swapped.backward);
    const Tensor a = bi_regu_forward(x, layer);
    const Tensor b = bi_regu_forward(rev, swapped);
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(b(3 - t, j) == a(t, 3 + j));
        CHECK(b(3 - t, 3 + j) == a(t, j));
      }
  }
}

TEST_CASE("boundedness of the cell state") {
  Rng rng(3);
  ReGUCell cell("c", 5, 4);
  randomize(refs(cell), rng, 1.0);
  Tensor x = testing::random_matrix(2000, 5, rng, 2.0);
  ReGUTrace trace;
  const Tensor h = regu_sequence(x, cell, false, &trace);
  for (double v : trace.c.values()) CHECK(std::abs(v) < 1.0);
  for (double v : h.values()) CHECK(std::abs(v) < 1.0);
}

TEST_CASE("regu sequence adjoint") {
  Rng rng(4);
  for (auto [in, hid] : {std::pair<std::size_t, std::size_t>{4, 3}, {3, 3}}) {
    for (bool reversed : {false, true}) {
      ReGUCell cell("c", in, hid);
      randomize(refs(cell), rng);
      ParamTensor x("x", {4, in});
      testing::fill_uniform(x.value, rng, -1, 1);
      const Tensor r = testing::random_matrix(4, hid, rng);
      ParamRefs ps = refs(cell);
      ps.push_back(&x);
      const LossFunction loss = [&](bool grads) {
        ReGUTrace trace;
        const Tensor h = regu_sequence(x.value, cell, reversed, &trace);
        if (grads) add_inplace(x.grad, regu_sequence_backward(trace, r, cell));
        return weighted_sum(h, r);
      };
      CHECK(grad_check(loss, ps, 1e-5).max_rel_error < 1e-6);
    }
  }
}

TEST_CASE("branch stack") {
  Rng rng(5);
  BranchStack stack("ate", 5, 3, 2);
  ParamRefs ps;
  stack.collect(ps);
  randomize(ps, rng);
  REQUIRE(stack.layers.size() == 2);
  CHECK(stack.layers[1].forward.input_dim == 6);

  const Tensor x = testing::random_matrix(3, 5, rng);
  const BranchOutput eval = branch_forward(x, stack, DropoutContext{});
  const Tensor l1 = bi_regu_forward(x, stack.layers[0]);
  CHECK(eval.first_layer == l1);
  CHECK(eval.top == bi_regu_forward(l1, stack.layers[1]));

  Rng d(1);
  const BranchOutput zero_rate = branch_forward(x, stack, DropoutContext{0.0, true, &d});
  CHECK(zero_rate.top == eval.top);

  SUBCASE("adjoint through dropout, both taps") {
    ParamTensor in("x", {2, 5});
    testing::fill_uniform(in.value, rng, -1, 1);
    const Tensor r1 = testing::random_matrix(2, 6, rng);
    const Tensor r2 = testing::random_matrix(2, 6, rng);
    ParamRefs all = ps;
    all.push_back(&in);
    const LossFunction loss = [&](bool grads) {
      Rng masks(77);
      BranchTrace trace;
      const BranchOutput o = branch_forward(in.value, stack, DropoutContext{0.3, true, &masks}, &trace);
      if (grads) add_inplace(in.grad, branch_backward(trace, &r1, r2, stack));
      return weighted_sum(o.first_layer, r1) + weighted_sum(o.top, r2);
    };
    CHECK(grad_check(loss, all, 1e-5).max_rel_error < 1e-5);
  }
}

#include <cmath>

#include "doctest.h"
#include "doer/csu.hpp"
#include "doer/gradcheck.hpp"
#include "doer/ops.hpp"
#include "helpers.hpp"

using namespace doer;
using doctest::Approx;

namespace {

std::vector<oracle::Mat> to_slices(const Tensor& g) {
  const std::size_t k = g.shape()[0], w = g.shape()[1];
  std::vector<oracle::Mat> out(k, oracle::Mat(w, oracle::Vec(w)));
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j < w; ++j) out[s][i][j] = g.slice(s)[i * w + j];
  return out;
}

CSUParams random_csu(std::size_t k, std::size_t w, Rng& rng, double scale) {
  CSUParams p("csu", k, w);
  for (auto* t : {&p.G_a.value, &p.G_p.value, &p.v_a.value, &p.v_p.value}) testing::fill_uniform(*t, rng, -scale, scale);
  return p;
}

}  // namespace

TEST_CASE("composition") {
  const Tensor zero({3, 2, 2});
  const std::vector<double> h = {1.0, 2.0};
  CHECK(composition(h, h, zero) == std::vector<double>{0.0, 0.0, 0.0});

  Tensor g({1, 1, 1}, 1.0);
  const std::vector<double> a = {2.0}, b = {3.0};
  CHECK(composition(a, b, g)[0] == Approx(0.99998771).epsilon(1e-8));
  CHECK(composition(a, b, g)[0] == Approx(std::tanh(6.0)).epsilon(1e-15));

  Tensor id({2, 3, 3});
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < 3; ++i) id.slice(k)[i * 3 + i] = 1.0;
  const std::vector<double> e = {0.0, 1.0, 0.0};
  for (double c : composition(e, e, id)) CHECK(c == Approx(0.761594).epsilon(1e-6));
}

TEST_CASE("attention scores") {
  Rng rng(1);
  const Tensor hs = testing::random_matrix(3, 4, rng);
  const Tensor ho = testing::random_matrix(3, 4, rng);
  Tensor g({2, 4, 4});
  testing::fill_uniform(g, rng, -1, 1);
  const Tensor v = Tensor::from_values({0.7, -1.3});

  const Tensor zero_g = attention_scores(hs, ho, Tensor({2, 4, 4}), v);
  const Tensor zero_v = attention_scores(hs, ho, g, Tensor::vector(2));
  for (double s : zero_g.values()) CHECK(s == 0.0);
  for (double s : zero_v.values()) CHECK(s == 0.0);

  // n=2, K=1, width 1 closed form
  const Tensor a = Tensor::from_rows({{0.5}, {-2.0}});
  const Tensor b = Tensor::from_rows({{1.5}, {0.25}});
  const Tensor g1({1, 1, 1}, 0.8);
  const Tensor v1 = Tensor::from_values({1.7});
  const Tensor s1 = attention_scores(a, b, g1, v1);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(s1(i, j) == Approx(1.7 * std::tanh(a(i, 0) * 0.8 * b(j, 0))));

  const Tensor s = attention_scores(hs, ho, g, v);
  const auto want = oracle::attention_scores(testing::to_mat(hs), testing::to_mat(ho), to_slices(g), testing::to_vec(v));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(s(i, j) == Approx(want[i][j]).epsilon(1e-13));
}

TEST_CASE("cross enhancement closed forms") {
  CSUParams zero("csu", 2, 2);
  const Tensor ha = Tensor::from_rows({{0.1, 0.2}, {0.3, 0.4}});
  const Tensor hp = Tensor::from_rows({{1, 1}, {3, 3}});
  const CrossEnhanceResult r = cross_enhance(ha, hp, zero);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(r.h_a(i, j) == Approx(ha(i, j) + 2.0));
      CHECK(r.h_p(i, j) == Approx(hp(i, j) + (ha(0, j) + ha(1, j)) / 2));
    }

  Rng rng(2);
  const CSUParams p = random_csu(2, 3, rng, 1.0);
  const Tensor a1 = testing::random_matrix(1, 3, rng);
  const Tensor p1 = testing::random_matrix(1, 3, rng);
  const CrossEnhanceResult one = cross_enhance(a1, p1, p);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(one.h_a(0, j) == Approx(a1(0, j) + p1(0, j)));
    CHECK(one.h_p(0, j) == Approx(p1(0, j) + a1(0, j)));
  }
}

TEST_CASE("cross enhancement matches the oracle and uses pre-update inputs") {
  Rng rng(3);
  const CSUParams p = random_csu(2, 4, rng, 1.0);  // d=2, so rows are 4 wide
  const Tensor ha = testing::random_matrix(3, 4, rng);
  const Tensor hp = testing::random_matrix(3, 4, rng);
  const CrossEnhanceResult r = cross_enhance(ha, hp, p);

  const auto A = testing::to_mat(ha), P = testing::to_mat(hp);
  const auto sa = oracle::attention_scores(A, P, to_slices(p.G_a.value), testing::to_vec(p.v_a.value));
  const auto sp = oracle::attention_scores(P, A, to_slices(p.G_p.value), testing::to_vec(p.v_p.value));
  const auto wa = oracle::softmax_rows(sa), wp = oracle::softmax_rows(sp);
  const auto add_a = oracle::matmul(wa, P), add_p = oracle::matmul(wp, A);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(r.h_a(i, j) == Approx(A[i][j] + add_a[i][j]).epsilon(1e-13));
      CHECK(r.h_p(i, j) == Approx(P[i][j] + add_p[i][j]).epsilon(1e-13));
      // the addend is a convex combination of the other branch's rows
      double lo = 1e9, hi = -1e9;
      for (std::size_t k = 0; k < 3; ++k) {
        lo = std::min(lo, P[k][j]);
        hi = std::max(hi, P[k][j]);
      }
      CHECK(add_a[i][j] >= lo - 1e-12);
      CHECK(add_a[i][j] <= hi + 1e-12);
    }
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.s_a(i, j) == Approx(sa[i][j]).epsilon(1e-13));
  }

  // swapping branch roles swaps the outputs exactly
  CSUParams swapped = p;
  std::swap(swapped.G_a, swapped.G_p);
  std::swap(swapped.v_a, swapped.v_p);
  const CrossEnhanceResult s = cross_enhance(hp, ha, swapped);
  CHECK(s.h_a == r.h_p);
  CHECK(s.h_p == r.h_a);

  const Tensor rows = softmax_rows(r.s_p);
  for (std::size_t i = 0; i < 3; ++i) {
    double sum = 0;
    for (double v : rows.row(i)) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("cross enhancement adjoint") {
  Rng rng(4);
  CSUParams p = random_csu(2, 4, rng, 0.7);
  ParamTensor ha("ha", {3, 4}), hp("hp", {3, 4});
  testing::fill_uniform(ha.value, rng, -1, 1);
  testing::fill_uniform(hp.value, rng, -1, 1);
  const Tensor ra = testing::random_matrix(3, 4, rng);
  const Tensor rp = testing::random_matrix(3, 4, rng);
  ParamRefs ps;
  p.collect(ps);
  ps.push_back(&ha);
  ps.push_back(&hp);
  const LossFunction loss = [&](bool grads) {
    CrossEnhanceTrace trace;
    const CrossEnhanceResult r = cross_enhance(ha.value, hp.value, p, &trace);
    double l = 0;
    for (std::size_t i = 0; i < r.h_a.size(); ++i) l += ra[i] * r.h_a[i] + rp[i] * r.h_p[i];
    if (grads) {
      const CrossEnhanceGrads g = cross_enhance_backward(trace, ra, rp, p);
      add_inplace(ha.grad, g.h_a);
      add_inplace(hp.grad, g.h_p);
    }
    return l;
  };
  CHECK(grad_check(loss, ps, 1e-5).max_rel_error < 1e-5);
}

#include <cmath>

#include "doctest.h"
#include "doer/crf.hpp"
#include "doer/gradcheck.hpp"
#include "doer/ops.hpp"
#include "helpers.hpp"

using namespace doer;
using doctest::Approx;

namespace {

CRFParams random_crf(std::size_t input, std::size_t tags, Rng& rng) {
  CRFParams p("crf", input, tags);
  ParamRefs ps;
  p.collect(ps);
  for (ParamTensor* t : ps) testing::fill_uniform(t->value, rng, -1, 1);
  return p;
}

oracle::Chain chain_of(const CRFParams& p) {
  return {testing::to_mat(p.transitions.value), testing::to_vec(p.start.value), testing::to_vec(p.stop.value)};
}

}  // namespace

TEST_CASE("emissions") {
  CRFParams p("crf", 4, 3);
  p.b_c.value = Tensor::from_values({1, 2, 3});
  Rng rng(1);
  const Tensor h = testing::random_matrix(2, 4, rng);
  for (const Tensor& in : {h, Tensor::matrix(2, 4)}) {
    const Tensor em = emissions(in, p);
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t y = 0; y < 3; ++y) CHECK(em(t, y) == y + 1.0);
  }
  const CRFParams r = random_crf(4, 3, rng);
  const Tensor em = emissions(h, r);
  const auto want = oracle::matmul(testing::to_mat(h), testing::to_mat(r.W_c.value));
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t y = 0; y < 3; ++y) CHECK(em(t, y) == Approx(want[t][y] + r.b_c.value[y]).epsilon(1e-14));
}

TEST_CASE("log likelihood closed forms") {
  CRFParams p("crf", 1, 3);
  const Tensor zero = Tensor::matrix(2, 3);
  const std::vector<std::size_t> y = {1, 2};
  CHECK(log_likelihood(zero, p, y) == Approx(-2 * std::log(3.0)).epsilon(1e-15));

  const Tensor one = Tensor::from_rows({{0.3, -1.2, 2.0}});
  const std::vector<std::size_t> y0 = {0};
  CHECK(log_likelihood(one, p, y0) ==
        Approx(0.3 - std::log(std::exp(0.3) + std::exp(-1.2) + std::exp(2.0))).epsilon(1e-15));

  const std::vector<std::size_t> bad = {0, 3};
  CHECK_THROWS_AS(log_likelihood(zero, p, bad), std::out_of_range);
}

TEST_CASE("forward algorithm vs enumeration") {
  Rng rng(2);
  const CRFParams p = random_crf(1, 5, rng);
  const Tensor em = testing::random_matrix(4, 5, rng, 2.0);
  CHECK(std::abs(log_partition(em, p) - oracle::brute_log_z(testing::to_mat(em), chain_of(p))) < 1e-10);
  double total = 0;
  oracle::for_each_path(4, 5, [&](const oracle::Path& y) {
    CHECK(path_score(em, p, y) == Approx(oracle::path_score(testing::to_mat(em), chain_of(p), y)).epsilon(1e-14));
    total += std::exp(log_likelihood(em, p, y));
  });
  CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("row shift invariance") {
  Rng rng(3);
  const CRFParams p = random_crf(1, 3, rng);
  const Tensor em = testing::random_matrix(4, 3, rng);
  Tensor shifted = em;
  for (double& v : shifted.row(2)) v += 17.5;
  const std::vector<std::size_t> y = {0, 2, 1, 1};
  CHECK(log_likelihood(shifted, p, y) == Approx(log_likelihood(em, p, y)).epsilon(1e-12));
}

TEST_CASE("viterbi") {
  CRFParams p("crf", 1, 3);
  CHECK(viterbi(Tensor::from_rows({{0, 5, 1}}), p) == std::vector<std::size_t>{1});
  CHECK(viterbi(Tensor::matrix(4, 3), p) == std::vector<std::size_t>(4, 0));

  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    const CRFParams r = random_crf(1, 3, rng);
    const Tensor em = testing::random_matrix(4, 3, rng, 2.0);
    const auto got = viterbi(em, r);
    CHECK(got == oracle::brute_viterbi(testing::to_mat(em), chain_of(r)));
  }
}

TEST_CASE("crf adjoints") {
  Rng rng(5);
  CRFParams p = random_crf(4, 5, rng);
  ParamTensor h("h", {3, 4});
  testing::fill_uniform(h.value, rng, -1, 1);
  const std::vector<std::size_t> y = {4, 0, 2};
  ParamRefs ps;
  p.collect(ps);
  ps.push_back(&h);
  const LossFunction loss = [&](bool grads) {
    const Tensor em = emissions(h.value, p);
    if (!grads) return -log_likelihood(em, p, y);
    Tensor g_em = Tensor::matrix(3, 5);
    const double nll = crf_nll_backward(em, p, y, g_em);
    add_inplace(h.grad, emissions_backward(h.value, g_em, p));
    return nll;
  };
  CHECK(grad_check(loss, ps, 1e-5).max_rel_error < 1e-6);

  // weight scales every gradient
  zero_grads(ps);
  Tensor g1 = Tensor::matrix(3, 5), g2 = Tensor::matrix(3, 5);
  const Tensor em = emissions(h.value, p);
  crf_nll_backward(em, p, y, g1, 1.0);
  const Tensor t1 = p.transitions.grad;
  zero_grads(ps);
  crf_nll_backward(em, p, y, g2, 0.5);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == Approx(0.5 * g1[i]));
  for (std::size_t i = 0; i < t1.size(); ++i) CHECK(p.transitions.grad[i] == Approx(0.5 * t1[i]));
}

#include "doer/kernels.hpp"

#include <omp.h>

#include <string>
#include <vector>

namespace doer::kernels {

namespace {

// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelThreshold = 1u << 15;

struct Dims {
  std::size_t m, k, n;
};

Dims check_dims(ConstMatrixView a, Trans ta, ConstMatrixView b, Trans tb, MatrixView c) {
  const std::size_t am = ta == Trans::kNo ? a.rows : a.cols;
  const std::size_t ak = ta == Trans::kNo ? a.cols : a.rows;
  const std::size_t bk = tb == Trans::kNo ? b.rows : b.cols;
  const std::size_t bn = tb == Trans::kNo ? b.cols : b.rows;
  if (ak != bk || c.rows != am || c.cols != bn) {
    throw DimensionError("gemm: op(a) is " + std::to_string(am) + "x" + std::to_string(ak) +
                         ", op(b) is " + std::to_string(bk) + "x" + std::to_string(bn) +
                         ", c is " + std::to_string(c.rows) + "x" + std::to_string(c.cols));
  }
  return {am, ak, bn};
}

inline double elem(ConstMatrixView x, Trans t, std::size_t r, std::size_t c) {
  return t == Trans::kNo ? x(r, c) : x(c, r);
}

// One output row: acc[j] = sum_p op(a)[i,p] * op(b)[p,j], p ascending.
void gemm_row(ConstMatrixView a, Trans ta, ConstMatrixView b, Trans tb, MatrixView c,
              Accumulate mode, const Dims& d, std::size_t i, std::vector<double>& acc) {
  acc.assign(d.n, 0.0);
  for (std::size_t p = 0; p < d.k; ++p) {
    const double aip = elem(a, ta, i, p);
    if (tb == Trans::kNo) {
      const double* brow = b.data + p * b.cols;
      for (std::size_t j = 0; j < d.n; ++j) acc[j] += aip * brow[j];
    } else {
      for (std::size_t j = 0; j < d.n; ++j) acc[j] += aip * b(j, p);
    }
  }
  double* crow = c.data + i * c.cols;
  if (mode == Accumulate::kAdd) {
    for (std::size_t j = 0; j < d.n; ++j) crow[j] += acc[j];
  } else {
    for (std::size_t j = 0; j < d.n; ++j) crow[j] = acc[j];
  }
}

}  // namespace

ConstMatrixView view(const Tensor& t) { return {t.data(), t.rows(), t.cols()}; }
MatrixView view(Tensor& t) { return {t.data(), t.rows(), t.cols()}; }

ConstMatrixView slice_view(const Tensor& t, std::size_t k) {
  if (t.rank() != 3) throw DimensionError("slice_view needs a rank-3 tensor");
  return {t.slice(k).data(), t.shape()[1], t.shape()[2]};
}

MatrixView slice_view(Tensor& t, std::size_t k) {
  if (t.rank() != 3) throw DimensionError("slice_view needs a rank-3 tensor");
  return {t.slice(k).data(), t.shape()[1], t.shape()[2]};
}

void gemm(ConstMatrixView a, Trans ta, ConstMatrixView b, Trans tb, MatrixView c, Accumulate mode) {
  const Dims d = check_dims(a, ta, b, tb, c);
  const bool parallel = d.m > 1 && d.m * d.k * d.n >= kParallelThreshold;
#pragma omp parallel if (parallel)
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(d.m); ++i) {
      gemm_row(a, ta, b, tb, c, mode, d, static_cast<std::size_t>(i), acc);
    }
  }
}

namespace serial {

void gemm(ConstMatrixView a, Trans ta, ConstMatrixView b, Trans tb, MatrixView c, Accumulate mode) {
  const Dims d = check_dims(a, ta, b, tb, c);
  for (std::size_t i = 0; i < d.m; ++i) {
    for (std::size_t j = 0; j < d.n; ++j) {
      double sum = 0.0;
      for (std::size_t p = 0; p < d.k; ++p) sum += elem(a, ta, i, p) * elem(b, tb, p, j);
      c(i, j) = mode == Accumulate::kAdd ? c(i, j) + sum : sum;
    }
  }
}

}  // namespace serial

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace doer::kernels

namespace doer {

using kernels::Trans;

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor c = Tensor::matrix(a.rows(), b.cols());
  kernels::gemm(kernels::view(a), Trans::kNo, kernels::view(b), Trans::kNo, kernels::view(c));
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: " + shape_string(a.shape()) + "^T x " + shape_string(b.shape()));
  }
  Tensor c = Tensor::matrix(a.cols(), b.cols());
  kernels::gemm(kernels::view(a), Trans::kYes, kernels::view(b), Trans::kNo, kernels::view(c));
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: " + shape_string(a.shape()) + " x " + shape_string(b.shape()) + "^T");
  }
  Tensor c = Tensor::matrix(a.rows(), b.rows());
  kernels::gemm(kernels::view(a), Trans::kNo, kernels::view(b), Trans::kYes, kernels::view(c));
  return c;
}

}  // namespace doer

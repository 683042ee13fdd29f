#pragma once

// Dense matrix kernels. `doer::kernels::gemm` is the OpenMP-parallel
// implementation used by every layer; `doer::kernels::serial::gemm` is the
// plain triple-loop reference kept for tests and the benchmark. Both sum
// each output entry over the inner index in ascending order, so their
// results are bitwise identical for any thread count.

#include <cstddef>

#include "doer/tensor.hpp"

namespace doer::kernels {

struct ConstMatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct MatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  operator ConstMatrixView() const { return {data, rows, cols}; }
};

ConstMatrixView view(const Tensor& t);
MatrixView view(Tensor& t);
// Slice k of a rank-3 tensor as a matrix.
ConstMatrixView slice_view(const Tensor& t, std::size_t k);
MatrixView slice_view(Tensor& t, std::size_t k);

enum class Trans { kNo, kYes };

enum class Accumulate { kOverwrite, kAdd };

/// c (=|+=) op(a) * op(b). Throws DimensionError on mismatched shapes.
void gemm(ConstMatrixView a, Trans ta, ConstMatrixView b, Trans tb, MatrixView c,
          Accumulate mode = Accumulate::kOverwrite);

namespace serial {
void gemm(ConstMatrixView a, Trans ta, ConstMatrixView b, Trans tb, MatrixView c,
          Accumulate mode = Accumulate::kOverwrite);
}  // namespace serial

/// Caps the OpenMP worker count (0 keeps the runtime default).
void set_num_threads(int n);
int max_threads();

}  // namespace doer::kernels

namespace doer {

/// a[m x k] * b[k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// a^T * b.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a * b^T.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

}  // namespace doer

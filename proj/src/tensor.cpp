#include "doer/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace doer {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  for (std::size_t dim : shape_) {
    if (dim == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_string(shape_));
  }
  data_.assign(product(shape_), fill);
}

Tensor Tensor::from_values(std::initializer_list<double> values) {
  Tensor t({values.size()});
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  if (rows.size() == 0) throw DimensionError("from_rows needs at least one row");
  const std::size_t cols = rows.begin()->size();
  Tensor t({rows.size(), cols});
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != cols) throw DimensionError("ragged rows in from_rows");
    std::copy(row.begin(), row.end(), t.data_.begin() + static_cast<std::ptrdiff_t>(r * cols));
    ++r;
  }
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 1) return 1;
  if (shape_.size() == 2) return shape_[0];
  throw DimensionError("rows() on tensor of shape " + shape_string(shape_));
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 1) return shape_[0];
  if (shape_.size() == 2) return shape_[1];
  throw DimensionError("cols() on tensor of shape " + shape_string(shape_));
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

std::span<double> Tensor::slice(std::size_t k) {
  if (shape_.size() != 3) throw DimensionError("slice() needs a rank-3 tensor");
  const std::size_t block = shape_[1] * shape_[2];
  return std::span<double>(data_).subspan(k * block, block);
}

std::span<const double> Tensor::slice(std::size_t k) const {
  if (shape_.size() != 3) throw DimensionError("slice() needs a rank-3 tensor");
  const std::size_t block = shape_[1] * shape_[2];
  return std::span<const double>(data_).subspan(k * block, block);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(const std::string& what) const {
  if (!all_finite()) throw NumericError("non-finite value in " + what);
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void zero_grads(const ParamRefs& params) {
  for (ParamTensor* p : params) p->zero_grad();
}

std::size_t count_entries(const ParamRefs& params) {
  std::size_t n = 0;
  for (const ParamTensor* p : params) n += p->value.size();
  return n;
}

double sum_of_squares(const ParamRefs& params) {
  double s = 0.0;
  for (const ParamTensor* p : params) {
    for (double v : p->value.values()) s += v * v;
  }
  return s;
}

}  // namespace doer

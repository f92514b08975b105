#include "kpinn/core/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "kpinn/core/error.hpp"

namespace kpinn {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape product " + std::to_string(product(shape_)));
  }
}

Tensor Tensor::from_matrix(const Eigen::MatrixXd& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) t(r, c) = m(r, c);
  }
  return t;
}

Eigen::MatrixXd Tensor::to_matrix() const {
  if (rank() != 2) throw ShapeError("to_matrix requires a rank-2 tensor");
  Eigen::MatrixXd m(shape_[0], shape_[1]);
  for (std::size_t r = 0; r < shape_[0]; ++r) {
    for (std::size_t c = 0; c < shape_[1]; ++c) m(r, c) = (*this)(r, c);
  }
  return m;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ShapeError("axis out of range");
  return shape_[axis];
}

std::span<const double> Tensor::row(std::size_t r) const {
  if (rank() != 2 || r >= shape_[0]) throw ShapeError("row access requires rank-2 tensor");
  return std::span<const double>(data_).subspan(r * shape_[1], shape_[1]);
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(std::string_view what) const {
  if (!all_finite()) throw NumericError("non-finite value in " + std::string(what));
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw ShapeError("index rank does not match tensor rank");
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : idx) {
    if (i >= shape_[axis]) throw ShapeError("tensor index out of range");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

}  // namespace kpinn

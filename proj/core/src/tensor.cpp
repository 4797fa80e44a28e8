#include "oasd/tensor.hpp"

#include <cmath>

#include <fmt/format.h>

#include "oasd/error.hpp"

namespace oasd {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::filled(std::vector<std::size_t> shape, double value) {
  std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::from(std::vector<std::size_t> shape, std::vector<double> data) {
  if (shape_size(shape) != data.size()) {
    throw shape_error(fmt::format("tensor data length {} does not match shape product {}",
                                  data.size(), shape_size(shape)));
  }
  Tensor t(std::move(shape), std::move(data));
  t.check_finite("tensor literal");
  return t;
}

Tensor Tensor::uniform(std::vector<std::size_t> shape, double lo, double hi, Rng& rng) {
  std::size_t n = shape_size(shape);
  std::vector<double> data(n);
  for (double& v : data) v = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(data));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw shape_error(fmt::format("axis {} out of range for rank {}", axis, shape_.size()));
  }
  return shape_[axis];
}

std::span<double> Tensor::row(std::size_t r) {
  if (rank() != 2) throw shape_error("row() requires a rank-2 tensor");
  if (r >= shape_[0]) throw shape_error(fmt::format("row {} out of range {}", r, shape_[0]));
  return std::span<double>(data_.data() + r * shape_[1], shape_[1]);
}

std::span<const double> Tensor::row(std::size_t r) const {
  if (rank() != 2) throw shape_error("row() requires a rank-2 tensor");
  if (r >= shape_[0]) throw shape_error(fmt::format("row {} out of range {}", r, shape_[0]));
  return std::span<const double>(data_.data() + r * shape_[1], shape_[1]);
}

void Tensor::fill(double value) {
  for (double& v : data_) v = value;
}

void Tensor::check_finite(const char* what) const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw validation_error(fmt::format("{} contains a non-finite value", what));
    }
  }
}

}  // namespace oasd

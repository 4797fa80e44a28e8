#ifndef OASD_TENSOR_HPP
#define OASD_TENSOR_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "oasd/rng.hpp"

namespace oasd {

// Dense row-major tensor of 64-bit floats. The models here are tiny, so
// this stays a plain vector with shape bookkeeping; all math lives in the
// kernels (nn.hpp) that operate on spans.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor filled(std::vector<std::size_t> shape, double value);
  // Entries finite-checked; throws shape error on size mismatch.
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> data);
  static Tensor uniform(std::vector<std::size_t> shape, double lo, double hi, Rng& rng);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  // Matrix element access; bounds-checked only in debug builds.
  double& operator()(std::size_t row, std::size_t col) {
    return data_[row * shape_[1] + col];
  }
  double operator()(std::size_t row, std::size_t col) const {
    return data_[row * shape_[1] + col];
  }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  void fill(double value);
  // Throws validation error if any entry is NaN or infinite.
  void check_finite(const char* what) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {}

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace oasd

#endif  // OASD_TENSOR_HPP

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mstd {

/// Dense row-major tensor of 64-bit floats. All model state and all
/// intermediate values in the autodiff tape live in this type. Most ops
/// treat tensors as 2-d matrices; column vectors are {n,1}, scalars {1,1}.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (count(shape_) != data_.size()) {
      throw std::invalid_argument("tensor: shape does not match data length");
    }
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }
  static Tensor scalar(double v) { return Tensor({1, 1}, {v}); }
  static Tensor row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({1, n}, std::move(v));
  }
  static Tensor column(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n, 1}, std::move(v));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool is_scalar() const { return data_.size() == 1; }

  std::size_t rows() const {
    require_2d();
    return shape_[0];
  }
  std::size_t cols() const {
    require_2d();
    return shape_[1];
  }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(std::size_t r, std::size_t c) {
    require_2d();
    return data_[r * shape_[1] + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    require_2d();
    return data_[r * shape_[1] + c];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  static std::size_t count(const std::vector<std::size_t>& shape) {
    if (shape.empty()) return 0;
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
  }

  void require_2d() const {
    if (shape_.size() != 2) {
      throw std::invalid_argument("tensor: 2-d access on non-2-d tensor");
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace mstd

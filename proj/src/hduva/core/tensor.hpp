#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <vector>

namespace hduva {

// Dense row-major tensor of doubles. Copies share the underlying buffer;
// use clone() for an independent copy. Mutating through data() while a copy
// is alive mutates both, so training code clones before in-place updates.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor row(std::vector<double> values);

  bool empty() const { return buf_ == nullptr || buf_->empty(); }
  std::size_t size() const { return buf_ ? buf_->size() : 0; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& shape() const { return shape_; }

  double* data() { return buf_->data(); }
  const double* data() const { return buf_->data(); }
  double& operator[](std::size_t i) { return (*buf_)[i]; }
  double operator[](std::size_t i) const { return (*buf_)[i]; }

  // 2-D accessors (first dim = row).
  double& at(int i, int j) { return (*buf_)[static_cast<std::size_t>(i) * dim(1) + j]; }
  double at(int i, int j) const { return (*buf_)[static_cast<std::size_t>(i) * dim(1) + j]; }

  Tensor clone() const;
  // Same buffer, new shape (element count must match).
  Tensor reshaped(std::vector<int> shape) const;

  void fill(double v);
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

 private:
  std::vector<int> shape_;
  std::shared_ptr<std::vector<double>> buf_;
};

std::size_t numel(const std::vector<int>& shape);

}  // namespace hduva

#include "hduva/core/tensor.hpp"

#include <cmath>

#include "hduva/core/errors.hpp"

namespace hduva {

std::size_t numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw argument_error("tensor: negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return shape.empty() ? 0 : n;
}

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)),
      buf_(std::make_shared<std::vector<double>>(numel(shape_), 0.0)) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)),
      buf_(std::make_shared<std::vector<double>>(std::move(values))) {
  if (buf_->size() != numel(shape_))
    throw argument_error("tensor: value count does not match shape");
}

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  t.fill(v);
  return t;
}

Tensor Tensor::row(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::clone() const {
  Tensor t;
  t.shape_ = shape_;
  t.buf_ = buf_ ? std::make_shared<std::vector<double>>(*buf_) : nullptr;
  return t;
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (numel(shape) != size())
    throw argument_error("tensor: reshape changes element count");
  Tensor t;
  t.shape_ = std::move(shape);
  t.buf_ = buf_;
  return t;
}

void Tensor::fill(double v) {
  if (buf_) std::fill(buf_->begin(), buf_->end(), v);
}

bool Tensor::all_finite() const {
  if (!buf_) return true;
  for (double x : *buf_)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace hduva

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace inpaint_lab::nn {

// NCHW extents. Vectors and matrices use the trailing dims set to 1.
struct Shape {
  int n = 0, c = 0, h = 1, w = 1;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t per_sample() const { return static_cast<std::size_t>(c) * h * w; }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::string str() const {
    return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + "]";
  }

  friend bool operator==(const Shape&, const Shape&) = default;
};

template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(shape), data_(shape.numel(), fill) {}

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  T& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  T at(int n, int c, int y, int x) const { return data_[offset(n, c, y, x)]; }

  T* sample(int n) { return data_.data() + static_cast<std::size_t>(n) * shape_.per_sample(); }
  const T* sample(int n) const {
    return data_.data() + static_cast<std::size_t>(n) * shape_.per_sample();
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  // Copy with new extents; numel must match.
  Tensor reshaped(Shape shape) const {
    Tensor out;
    out.shape_ = shape;
    out.data_ = data_;
    if (shape.numel() != data_.size()) throw std::invalid_argument("reshape to " + shape.str());
    return out;
  }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    std::transform(data_.begin(), data_.end(), out.storage().begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t offset(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape shape_;
  std::vector<T> data_;
};

// A learnable tensor with its gradient accumulator.
template <class T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Shape s) : name(std::move(n)), value(s), grad(s) {}
  void zero_grad() { grad.fill(T(0)); }
};

// Named view onto persistent state (parameters and buffers) for
// serialization.
template <class T>
struct StateEntry {
  std::string name;
  Tensor<T>* tensor;
};

}  // namespace inpaint_lab::nn

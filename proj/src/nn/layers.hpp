#pragma once

#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace inpaint_lab {
class Rng;
}

namespace inpaint_lab::nn {

// Patch geometry of a convolution seen from the image side: an image of
// `channels x height x width` is read through `kernel`-sized windows at
// `stride` with zero padding `pad`, giving an `out_h x out_w` grid.
struct ConvGeometry {
  int channels = 0, height = 0, width = 0;
  int kernel = 1, stride = 1, pad = 0;
  int out_h = 0, out_w = 0;

  static ConvGeometry make(int channels, int height, int width, int kernel, int stride, int pad);
  int rows() const { return channels * kernel * kernel; }
  int grid() const { return out_h * out_w; }
};

// col is [rows, batch * grid], sample-major within a row.
template <class T>
void im2col(const T* images, int batch, const ConvGeometry& g, T* col);
// Scatter-add of the columns back onto (already initialized) images.
template <class T>
void col2im(const T* col, int batch, const ConvGeometry& g, T* images);

// NCHW <-> channel-major [C, N*H*W].
template <class T>
std::vector<T> to_channel_major(const Tensor<T>& x);
template <class T>
Tensor<T> from_channel_major(const std::vector<T>& cm, Shape shape);

// Fully connected: y = x W^T + b over the flattened per-sample features.
template <class T>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in_features, int out_features);

  Tensor<T> forward(const Tensor<T>& x, bool with_bias = true) const;
  // Accumulates into weight.grad (and bias.grad when bias_grad) if
  // param_grads; writes the input gradient when dx is non-null.
  void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>* dx, bool param_grads,
                bool bias_grad = true);

  int in_features() const { return in_; }
  int out_features() const { return out_; }

  Parameter<T> weight;  // [out, in]
  Parameter<T> bias;    // [out]

 private:
  int in_ = 0, out_ = 0;
};

template <class T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
         int pad);

  Tensor<T> forward(const Tensor<T>& x, bool with_bias = true) const;
  void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>* dx, bool param_grads,
                bool bias_grad = true);

  int in_channels() const { return in_; }
  int out_channels() const { return out_; }
  int kernel() const { return k_; }
  Shape output_shape(const Shape& in) const;

  Parameter<T> weight;  // [out, in, k, k]
  Parameter<T> bias;    // [out]

 private:
  ConvGeometry geometry(const Shape& in) const;
  int in_ = 0, out_ = 0, k_ = 1, stride_ = 1, pad_ = 0;
};

// Adjoint of Conv2d: upsamples by `stride`.
template <class T>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(const std::string& name, int in_channels, int out_channels, int kernel,
                  int stride, int pad);

  Tensor<T> forward(const Tensor<T>& x) const;
  void backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>* dx, bool param_grads);

  Shape output_shape(const Shape& in) const;

  Parameter<T> weight;  // [in, out, k, k]
  Parameter<T> bias;    // [out]

 private:
  ConvGeometry geometry(const Shape& in) const;
  int in_ = 0, out_ = 0, k_ = 1, stride_ = 1, pad_ = 0;
};

template <class T>
struct BatchNormCache {
  Tensor<T> xhat;
  std::vector<T> inv_std;
};

// Per-channel batch normalization. Training uses batch statistics and
// updates the running averages; inference uses the running averages.
template <class T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  BatchNorm2d(const std::string& name, int channels, T momentum = T(0.1), T eps = T(1e-5));

  Tensor<T> forward_train(const Tensor<T>& x, BatchNormCache<T>* cache);
  Tensor<T> forward_eval(const Tensor<T>& x, BatchNormCache<T>* cache) const;
  void backward_train(const BatchNormCache<T>& cache, const Tensor<T>& dy, Tensor<T>* dx,
                      bool param_grads);
  void backward_eval(const BatchNormCache<T>& cache, const Tensor<T>& dy, Tensor<T>* dx,
                     bool param_grads);

  Parameter<T> gamma;
  Parameter<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  std::string name;

 private:
  int channels_ = 0;
  T momentum_ = T(0.1);
  T eps_ = T(1e-5);
};

template <class T>
Tensor<T> relu(const Tensor<T>& x);
// dx = dy where y > 0.
template <class T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy);

template <class T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope);
// Multiplies by the local slope of the pre-activation: 1 or `slope`.
template <class T>
Tensor<T> leaky_relu_backward(const Tensor<T>& pre, const Tensor<T>& dy, T slope);

// tanh kept strictly inside (-1, 1).
template <class T>
Tensor<T> bounded_tanh(const Tensor<T>& x);
template <class T>
Tensor<T> tanh_backward(const Tensor<T>& y, const Tensor<T>& dy);

template <class T>
void fill_normal(Tensor<T>& t, Rng& rng, double stddev);

}  // namespace inpaint_lab::nn

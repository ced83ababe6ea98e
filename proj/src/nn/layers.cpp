#include "nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "nn/blas.hpp"

namespace inpaint_lab::nn {

ConvGeometry ConvGeometry::make(int channels, int height, int width, int kernel, int stride,
                                int pad) {
  ConvGeometry g{channels, height, width, kernel, stride, pad, 0, 0};
  g.out_h = (height + 2 * pad - kernel) / stride + 1;
  g.out_w = (width + 2 * pad - kernel) / stride + 1;
  if (height + 2 * pad < kernel || width + 2 * pad < kernel || g.out_h <= 0 || g.out_w <= 0)
    fail_validation("spatial size " + std::to_string(height) + "x" + std::to_string(width) +
                    " is below the kernel support (" + std::to_string(kernel) + ")");
  return g;
}

namespace {

// Output columns ox whose input column ox*stride - pad + k lies in [0, width).
struct ColumnRange {
  int lo, hi;
};

ColumnRange valid_columns(const ConvGeometry& g, int k) {
  const int off = k - g.pad;
  int lo = off >= 0 ? 0 : (-off + g.stride - 1) / g.stride;
  int hi = g.width - 1 - off < 0 ? 0 : (g.width - 1 - off) / g.stride + 1;
  hi = std::min(hi, g.out_w);
  lo = std::min(lo, hi);
  return {lo, hi};
}

}  // namespace

template <class T>
void im2col(const T* images, int batch, const ConvGeometry& g, T* col) {
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  const std::size_t image_size = plane * g.channels;
  const std::size_t row_len = static_cast<std::size_t>(batch) * g.grid();
  const int s = g.stride;
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj) {
        const ColumnRange r = valid_columns(g, kj);
        const int off = kj - g.pad;
        T* row = col + static_cast<std::size_t>((c * g.kernel + ki) * g.kernel + kj) * row_len;
        for (int n = 0; n < batch; ++n) {
          const T* src = images + n * image_size + c * plane;
          T* dst = row + static_cast<std::size_t>(n) * g.grid();
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int iy = oy * s - g.pad + ki;
            T* out = dst + oy * g.out_w;
            if (iy < 0 || iy >= g.height) {
              for (int ox = 0; ox < g.out_w; ++ox) out[ox] = T(0);
              continue;
            }
            const T* in = src + static_cast<std::size_t>(iy) * g.width;
            for (int ox = 0; ox < r.lo; ++ox) out[ox] = T(0);
            for (int ox = r.lo; ox < r.hi; ++ox) out[ox] = in[ox * s + off];
            for (int ox = r.hi; ox < g.out_w; ++ox) out[ox] = T(0);
          }
        }
      }
    }
  }
}

template <class T>
void col2im(const T* col, int batch, const ConvGeometry& g, T* images) {
  const std::size_t plane = static_cast<std::size_t>(g.height) * g.width;
  const std::size_t image_size = plane * g.channels;
  const std::size_t row_len = static_cast<std::size_t>(batch) * g.grid();
  const int s = g.stride;
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj) {
        const ColumnRange r = valid_columns(g, kj);
        const int off = kj - g.pad;
        const T* row = col + static_cast<std::size_t>((c * g.kernel + ki) * g.kernel + kj) * row_len;
        for (int n = 0; n < batch; ++n) {
          T* dst = images + n * image_size + c * plane;
          const T* src = row + static_cast<std::size_t>(n) * g.grid();
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int iy = oy * s - g.pad + ki;
            if (iy < 0 || iy >= g.height) continue;
            T* out = dst + static_cast<std::size_t>(iy) * g.width;
            const T* in = src + oy * g.out_w;
            for (int ox = r.lo; ox < r.hi; ++ox) out[ox * s + off] += in[ox];
          }
        }
      }
    }
  }
}

template <class T>
std::vector<T> to_channel_major(const Tensor<T>& x) {
  const Shape s = x.shape();
  const std::size_t plane = s.plane();
  std::vector<T> cm(x.numel());
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const T* src = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      std::copy(src, src + plane, cm.data() + (static_cast<std::size_t>(c) * s.n + n) * plane);
    }
  return cm;
}

template <class T>
Tensor<T> from_channel_major(const std::vector<T>& cm, Shape s) {
  Tensor<T> x(s);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const T* src = cm.data() + (static_cast<std::size_t>(c) * s.n + n) * plane;
      std::copy(src, src + plane, x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane);
    }
  return x;
}

// ---------------------------------------------------------------- Linear

template <class T>
Linear<T>::Linear(const std::string& name, int in_features, int out_features)
    : weight(name + ".weight", {out_features, in_features}),
      bias(name + ".bias", {out_features, 1}),
      in_(in_features),
      out_(out_features) {}

template <class T>
Tensor<T> Linear<T>::forward(const Tensor<T>& x, bool with_bias) const {
  if (static_cast<int>(x.shape().per_sample()) != in_)
    fail_validation("Linear " + weight.name + ": expected " + std::to_string(in_) +
                    " features, got " + x.shape().str());
  const int n = x.n();
  Tensor<T> y({n, out_});
  if (with_bias)
    for (int i = 0; i < n; ++i) std::copy(bias.value.data(), bias.value.data() + out_, y.sample(i));
  gemm<T>(false, true, n, out_, in_, T(1), x.data(), in_, weight.value.data(), in_,
          with_bias ? T(1) : T(0), y.data(), out_);
  return y;
}

template <class T>
void Linear<T>::backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>* dx, bool param_grads,
                         bool bias_grad) {
  const int n = x.n();
  if (param_grads) {
    gemm<T>(true, false, out_, in_, n, T(1), dy.data(), out_, x.data(), in_, T(1),
            weight.grad.data(), in_);
    if (bias_grad)
      for (int i = 0; i < n; ++i)
        for (int o = 0; o < out_; ++o) bias.grad[o] += dy.sample(i)[o];
  }
  if (dx) {
    *dx = Tensor<T>(x.shape());
    gemm<T>(false, false, n, in_, out_, T(1), dy.data(), out_, weight.value.data(), in_, T(0),
            dx->data(), in_);
  }
}

// ---------------------------------------------------------------- Conv2d

template <class T>
Conv2d<T>::Conv2d(const std::string& name, int in_channels, int out_channels, int kernel,
                  int stride, int pad)
    : weight(name + ".weight", {out_channels, in_channels, kernel, kernel}),
      bias(name + ".bias", {out_channels, 1}),
      in_(in_channels),
      out_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(pad) {}

template <class T>
ConvGeometry Conv2d<T>::geometry(const Shape& in) const {
  if (in.c != in_)
    fail_validation("Conv2d " + weight.name + ": expected " + std::to_string(in_) +
                    " channels, got " + in.str());
  return ConvGeometry::make(in_, in.h, in.w, k_, stride_, pad_);
}

template <class T>
Shape Conv2d<T>::output_shape(const Shape& in) const {
  const ConvGeometry g = geometry(in);
  return {in.n, out_, g.out_h, g.out_w};
}

template <class T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, bool with_bias) const {
  const ConvGeometry g = geometry(x.shape());
  const int n = x.n();
  const int cols = n * g.grid();
  std::vector<T> col(static_cast<std::size_t>(g.rows()) * cols);
  im2col(x.data(), n, g, col.data());
  std::vector<T> ycm(static_cast<std::size_t>(out_) * cols);
  if (with_bias)
    for (int o = 0; o < out_; ++o)
      std::fill(ycm.begin() + static_cast<std::ptrdiff_t>(o) * cols,
                ycm.begin() + static_cast<std::ptrdiff_t>(o + 1) * cols, bias.value[o]);
  gemm<T>(false, false, out_, cols, g.rows(), T(1), weight.value.data(), g.rows(), col.data(), cols,
          with_bias ? T(1) : T(0), ycm.data(), cols);
  return from_channel_major(ycm, {n, out_, g.out_h, g.out_w});
}

template <class T>
void Conv2d<T>::backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>* dx, bool param_grads,
                         bool bias_grad) {
  const ConvGeometry g = geometry(x.shape());
  const int n = x.n();
  const int cols = n * g.grid();
  const std::vector<T> dycm = to_channel_major(dy);
  if (param_grads) {
    std::vector<T> col(static_cast<std::size_t>(g.rows()) * cols);
    im2col(x.data(), n, g, col.data());
    gemm<T>(false, true, out_, g.rows(), cols, T(1), dycm.data(), cols, col.data(), cols, T(1),
            weight.grad.data(), g.rows());
    if (bias_grad)
      for (int o = 0; o < out_; ++o) {
        T s = 0;
        const T* row = dycm.data() + static_cast<std::size_t>(o) * cols;
        for (int i = 0; i < cols; ++i) s += row[i];
        bias.grad[o] += s;
      }
  }
  if (dx) {
    std::vector<T> dcol(static_cast<std::size_t>(g.rows()) * cols);
    gemm<T>(true, false, g.rows(), cols, out_, T(1), weight.value.data(), g.rows(), dycm.data(),
            cols, T(0), dcol.data(), cols);
    *dx = Tensor<T>(x.shape());
    col2im(dcol.data(), n, g, dx->data());
  }
}

// ------------------------------------------------------- ConvTranspose2d

template <class T>
ConvTranspose2d<T>::ConvTranspose2d(const std::string& name, int in_channels, int out_channels,
                                    int kernel, int stride, int pad)
    : weight(name + ".weight", {in_channels, out_channels, kernel, kernel}),
      bias(name + ".bias", {out_channels, 1}),
      in_(in_channels),
      out_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(pad) {}

template <class T>
ConvGeometry ConvTranspose2d<T>::geometry(const Shape& in) const {
  if (in.c != in_)
    fail_validation("ConvTranspose2d " + weight.name + ": expected " + std::to_string(in_) +
                    " channels, got " + in.str());
  const int oh = (in.h - 1) * stride_ - 2 * pad_ + k_;
  const int ow = (in.w - 1) * stride_ - 2 * pad_ + k_;
  if (oh <= 0 || ow <= 0) fail_validation("ConvTranspose2d " + weight.name + ": empty output");
  const ConvGeometry g = ConvGeometry::make(out_, oh, ow, k_, stride_, pad_);
  if (g.out_h != in.h || g.out_w != in.w)
    fail_validation("ConvTranspose2d " + weight.name + ": inconsistent geometry");
  return g;
}

template <class T>
Shape ConvTranspose2d<T>::output_shape(const Shape& in) const {
  const ConvGeometry g = geometry(in);
  return {in.n, out_, g.height, g.width};
}

template <class T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& x) const {
  const ConvGeometry g = geometry(x.shape());
  const int n = x.n();
  const int cols = n * g.grid();
  const std::vector<T> xcm = to_channel_major(x);
  std::vector<T> col(static_cast<std::size_t>(g.rows()) * cols);
  gemm<T>(true, false, g.rows(), cols, in_, T(1), weight.value.data(), g.rows(), xcm.data(), cols,
          T(0), col.data(), cols);
  Tensor<T> y({n, out_, g.height, g.width});
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < out_; ++o) {
      T* p = y.data() + (static_cast<std::size_t>(i) * out_ + o) * y.shape().plane();
      std::fill(p, p + y.shape().plane(), bias.value[o]);
    }
  col2im(col.data(), n, g, y.data());
  return y;
}

template <class T>
void ConvTranspose2d<T>::backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>* dx,
                                  bool param_grads) {
  const ConvGeometry g = geometry(x.shape());
  const int n = x.n();
  const int cols = n * g.grid();
  std::vector<T> dcol(static_cast<std::size_t>(g.rows()) * cols);
  im2col(dy.data(), n, g, dcol.data());
  if (param_grads) {
    const std::vector<T> xcm = to_channel_major(x);
    gemm<T>(false, true, in_, g.rows(), cols, T(1), xcm.data(), cols, dcol.data(), cols, T(1),
            weight.grad.data(), g.rows());
    const std::size_t plane = dy.shape().plane();
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out_; ++o) {
        const T* p = dy.data() + (static_cast<std::size_t>(i) * out_ + o) * plane;
        T s = 0;
        for (std::size_t j = 0; j < plane; ++j) s += p[j];
        bias.grad[o] += s;
      }
  }
  if (dx) {
    std::vector<T> dxcm(static_cast<std::size_t>(in_) * cols);
    gemm<T>(false, false, in_, cols, g.rows(), T(1), weight.value.data(), g.rows(), dcol.data(),
            cols, T(0), dxcm.data(), cols);
    *dx = from_channel_major(dxcm, x.shape());
  }
}

// ----------------------------------------------------------- BatchNorm2d

template <class T>
BatchNorm2d<T>::BatchNorm2d(const std::string& n, int channels, T momentum, T eps)
    : gamma(n + ".gamma", {channels, 1}),
      beta(n + ".beta", {channels, 1}),
      running_mean({channels, 1}, T(0)),
      running_var({channels, 1}, T(1)),
      name(n),
      channels_(channels),
      momentum_(momentum),
      eps_(eps) {
  gamma.value.fill(T(1));
}

template <class T>
Tensor<T> BatchNorm2d<T>::forward_train(const Tensor<T>& x, BatchNormCache<T>* cache) {
  const Shape s = x.shape();
  if (s.c != channels_) fail_validation("BatchNorm2d " + name + ": channel mismatch " + s.str());
  const std::size_t plane = s.plane();
  const std::size_t m = static_cast<std::size_t>(s.n) * plane;
  Tensor<T> y(s);
  BatchNormCache<T> local;
  BatchNormCache<T>& cc = cache ? *cache : local;
  cc.xhat = Tensor<T>(s);
  cc.inv_std.assign(static_cast<std::size_t>(channels_), T(0));
  for (int c = 0; c < channels_; ++c) {
    // Accumulate in double: batch statistics feed every sample's output.
    double sum = 0.0;
    for (int n = 0; n < s.n; ++n) {
      const T* p = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) sum += p[i];
    }
    const double mean = sum / static_cast<double>(m);
    double sq = 0.0;
    for (int n = 0; n < s.n; ++n) {
      const T* p = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) sq += (p[i] - mean) * (p[i] - mean);
    }
    const double var = sq / static_cast<double>(m);
    const T inv = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps_)));
    cc.inv_std[static_cast<std::size_t>(c)] = inv;
    const T g = gamma.value[c];
    const T b = beta.value[c];
    for (int n = 0; n < s.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const T xh = static_cast<T>((x.data()[off + i] - mean)) * inv;
        cc.xhat.data()[off + i] = xh;
        y.data()[off + i] = g * xh + b;
      }
    }
    const double unbiased = m > 1 ? var * static_cast<double>(m) / static_cast<double>(m - 1) : var;
    running_mean[c] = static_cast<T>((1 - momentum_) * running_mean[c] + momentum_ * mean);
    running_var[c] = static_cast<T>((1 - momentum_) * running_var[c] + momentum_ * unbiased);
  }
  return y;
}

template <class T>
Tensor<T> BatchNorm2d<T>::forward_eval(const Tensor<T>& x, BatchNormCache<T>* cache) const {
  const Shape s = x.shape();
  if (s.c != channels_) fail_validation("BatchNorm2d " + name + ": channel mismatch " + s.str());
  const std::size_t plane = s.plane();
  Tensor<T> y(s);
  if (cache) {
    cache->xhat = Tensor<T>(s);
    cache->inv_std.assign(static_cast<std::size_t>(channels_), T(0));
  }
  for (int c = 0; c < channels_; ++c) {
    const T inv = T(1) / std::sqrt(running_var[c] + eps_);
    const T mean = running_mean[c];
    if (cache) cache->inv_std[static_cast<std::size_t>(c)] = inv;
    for (int n = 0; n < s.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const T xh = (x.data()[off + i] - mean) * inv;
        if (cache) cache->xhat.data()[off + i] = xh;
        y.data()[off + i] = gamma.value[c] * xh + beta.value[c];
      }
    }
  }
  return y;
}

template <class T>
void BatchNorm2d<T>::backward_train(const BatchNormCache<T>& cache, const Tensor<T>& dy,
                                    Tensor<T>* dx, bool param_grads) {
  const Shape s = dy.shape();
  const std::size_t plane = s.plane();
  const double m = static_cast<double>(s.n) * static_cast<double>(plane);
  if (dx) *dx = Tensor<T>(s);
  for (int c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int n = 0; n < s.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += dy.data()[off + i];
        sum_dy_xhat += static_cast<double>(dy.data()[off + i]) * cache.xhat.data()[off + i];
      }
    }
    if (param_grads) {
      gamma.grad[c] += static_cast<T>(sum_dy_xhat);
      beta.grad[c] += static_cast<T>(sum_dy);
    }
    if (!dx) continue;
    const T k = gamma.value[c] * cache.inv_std[static_cast<std::size_t>(c)];
    const T mean_dy = static_cast<T>(sum_dy / m);
    const T mean_dy_xhat = static_cast<T>(sum_dy_xhat / m);
    for (int n = 0; n < s.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i)
        dx->data()[off + i] =
            k * (dy.data()[off + i] - mean_dy - cache.xhat.data()[off + i] * mean_dy_xhat);
    }
  }
}

template <class T>
void BatchNorm2d<T>::backward_eval(const BatchNormCache<T>& cache, const Tensor<T>& dy,
                                   Tensor<T>* dx, bool param_grads) {
  const Shape s = dy.shape();
  const std::size_t plane = s.plane();
  if (dx) *dx = Tensor<T>(s);
  for (int c = 0; c < channels_; ++c) {
    const T k = gamma.value[c] * cache.inv_std[static_cast<std::size_t>(c)];
    T sum_dy = 0, sum_dy_xhat = 0;
    for (int n = 0; n < s.n; ++n) {
      const std::size_t off = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += dy.data()[off + i];
        sum_dy_xhat += dy.data()[off + i] * cache.xhat.data()[off + i];
        if (dx) dx->data()[off + i] = k * dy.data()[off + i];
      }
    }
    if (param_grads) {
      gamma.grad[c] += sum_dy_xhat;
      beta.grad[c] += sum_dy;
    }
  }
}

// ----------------------------------------------------------- activations

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const T* in = x.data();
  T* out = y.data();
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(in[i], T(0));
  return y;
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  Tensor<T> dx(y.shape());
  const T* a = y.data();
  const T* g = dy.data();
  T* out = dx.data();
  const std::size_t n = y.numel();
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] > T(0) ? g[i] : T(0);
  return dx;
}

template <class T>
Tensor<T> leaky_relu(const Tensor<T>& x, T slope) {
  Tensor<T> y(x.shape());
  const T* in = x.data();
  T* out = y.data();
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * (in[i] > T(0) ? T(1) : slope);
  return y;
}

template <class T>
Tensor<T> leaky_relu_backward(const Tensor<T>& pre, const Tensor<T>& dy, T slope) {
  Tensor<T> dx(pre.shape());
  const T* a = pre.data();
  const T* g = dy.data();
  T* out = dx.data();
  const std::size_t n = pre.numel();
  for (std::size_t i = 0; i < n; ++i) out[i] = g[i] * (a[i] > T(0) ? T(1) : slope);
  return dx;
}

template <class T>
Tensor<T> bounded_tanh(const Tensor<T>& x) {
  const T hi = std::nextafter(T(1), T(0));
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = std::clamp(std::tanh(x[i]), -hi, hi);
  return y;
}

template <class T>
Tensor<T> tanh_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  Tensor<T> dx(y.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) dx[i] = dy[i] * (T(1) - y[i] * y[i]);
  return dx;
}

template <class T>
void fill_normal(Tensor<T>& t, Rng& rng, double stddev) {
  for (auto& v : t.values()) v = static_cast<T>(stddev * rng.normal());
}

#define INPAINT_LAB_INSTANTIATE(T)                                                         \
  template void im2col<T>(const T*, int, const ConvGeometry&, T*);                         \
  template void col2im<T>(const T*, int, const ConvGeometry&, T*);                         \
  template std::vector<T> to_channel_major<T>(const Tensor<T>&);                           \
  template Tensor<T> from_channel_major<T>(const std::vector<T>&, Shape);                  \
  template class Linear<T>;                                                                \
  template class Conv2d<T>;                                                                \
  template class ConvTranspose2d<T>;                                                       \
  template class BatchNorm2d<T>;                                                           \
  template Tensor<T> relu<T>(const Tensor<T>&);                                            \
  template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                                   \
  template Tensor<T> leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&, T);        \
  template Tensor<T> bounded_tanh<T>(const Tensor<T>&);                                    \
  template Tensor<T> tanh_backward<T>(const Tensor<T>&, const Tensor<T>&);                 \
  template void fill_normal<T>(Tensor<T>&, Rng&, double);

INPAINT_LAB_INSTANTIATE(float)
INPAINT_LAB_INSTANTIATE(double)

#undef INPAINT_LAB_INSTANTIATE

}  // namespace inpaint_lab::nn

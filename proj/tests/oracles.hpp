#pragma once

// Independent reference computations for tests. Deliberately written the
// slow, direct way and without calling into the code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "image/image.hpp"
#include "nn/tensor.hpp"

namespace oracle {

using inpaint_lab::ImageU8;
using inpaint_lab::nn::Tensor;

inline double psnr(const ImageU8& f, const ImageU8& g) {
  const auto& a = f.data();
  const auto& b = g.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse == 0.0) return 99.0;
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

struct SsimSettings {
  double alpha = 1, beta = 1, gamma = 1;
  double k1 = 0.01, k2 = 0.03, L = 255.0;
  int window = 11;
  double sigma = 1.5;
};

// Brute force: full 2-D Gaussian per window position, centered moments.
inline double ssim(const ImageU8& x, const ImageU8& y, const SsimSettings& p = {}) {
  const int H = x.height(), W = x.width(), k = p.window, r = k / 2;
  auto lum = [](const ImageU8& im, int i, int j) {
    return 0.299 * im.at(i, j, 0) + 0.587 * im.at(i, j, 1) + 0.114 * im.at(i, j, 2);
  };
  std::vector<double> w(static_cast<std::size_t>(k * k));
  double total = 0.0;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const double dy = a - r, dx = b - r;
      w[static_cast<std::size_t>(a * k + b)] = std::exp(-(dx * dx + dy * dy) / (2 * p.sigma * p.sigma));
      total += w[static_cast<std::size_t>(a * k + b)];
    }
  for (auto& v : w) v /= total;
  const double C1 = (p.k1 * p.L) * (p.k1 * p.L);
  const double C2 = (p.k2 * p.L) * (p.k2 * p.L);
  const double C3 = C2 / 2;
  double acc = 0.0;
  int count = 0;
  for (int i = 0; i + k <= H; ++i)
    for (int j = 0; j + k <= W; ++j) {
      double mx = 0, my = 0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
          const double ww = w[static_cast<std::size_t>(a * k + b)];
          mx += ww * lum(x, i + a, j + b);
          my += ww * lum(y, i + a, j + b);
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
          const double ww = w[static_cast<std::size_t>(a * k + b)];
          const double dx = lum(x, i + a, j + b) - mx, dy = lum(y, i + a, j + b) - my;
          vx += ww * dx * dx;
          vy += ww * dy * dy;
          cxy += ww * dx * dy;
        }
      const double sx = std::sqrt(vx), sy = std::sqrt(vy);
      const double l = (2 * mx * my + C1) / (mx * mx + my * my + C1);
      const double c = (2 * sx * sy + C2) / (vx + vy + C2);
      const double s = (cxy + C3) / (sx * sy + C3);
      auto spow = [](double v, double e) { return v < 0 ? -std::pow(-v, e) : std::pow(v, e); };
      acc += spow(l, p.alpha) * spow(c, p.beta) * spow(s, p.gamma);
      ++count;
    }
  return acc / count;
}

// Central difference of f at the scalar referenced by x.
template <class T>
double central_difference(const std::function<double()>& f, T& x, double h) {
  const T saved = x;
  x = static_cast<T>(saved + h);
  const double up = f();
  x = static_cast<T>(saved - h);
  const double down = f();
  x = saved;
  return (up - down) / (2 * h);
}

inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double mean(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += v[i];
  return s / static_cast<double>(end - begin);
}

// Critics with closed-form gradients for the penalty anchors. Both satisfy
// the critic interface used by wgan/losses.hpp.
struct EmptyTape {};

template <class T>
struct LinearCritic {
  using Scalar = T;
  using Tape = EmptyTape;
  std::vector<T> w;  // one weight per sample element

  Tensor<T> forward(const Tensor<T>& x, Tape*) const {
    Tensor<T> s({x.n(), 1});
    const std::size_t per = x.shape().per_sample();
    for (int n = 0; n < x.n(); ++n) {
      double acc = 0.0;
      for (std::size_t i = 0; i < per; ++i) acc += static_cast<double>(w[i]) * x.sample(n)[i];
      s[static_cast<std::size_t>(n)] = static_cast<T>(acc);
    }
    return s;
  }
  void backward(const Tape&, const Tensor<T>& ds, Tensor<T>* dx, bool) {
    if (!dx) return;
    // Shape of the input is not on the tape; w has one entry per element.
    *dx = Tensor<T>({ds.n(), 1, 1, static_cast<int>(w.size())});
    for (int n = 0; n < ds.n(); ++n)
      for (std::size_t i = 0; i < w.size(); ++i) dx->sample(n)[i] = ds[static_cast<std::size_t>(n)] * w[i];
  }
  Tensor<T> directional(const Tape&, const Tensor<T>& dir, Tape*) const { return forward(dir, nullptr); }
  void directional_backward(const Tape&, const Tape&, const Tensor<T>&) {}
};

template <class T>
struct ConstantCritic {
  using Scalar = T;
  using Tape = EmptyTape;
  T k = T(0);
  std::size_t per = 0;

  Tensor<T> forward(const Tensor<T>& x, Tape*) const { return Tensor<T>({x.n(), 1}, k); }
  void backward(const Tape&, const Tensor<T>& ds, Tensor<T>* dx, bool) {
    if (dx) *dx = Tensor<T>({ds.n(), 1, 1, static_cast<int>(per)});
  }
  Tensor<T> directional(const Tape&, const Tensor<T>& dir, Tape*) const {
    return Tensor<T>({dir.n(), 1});
  }
  void directional_backward(const Tape&, const Tape&, const Tensor<T>&) {}
};

// C(x) = sum of all elements.
template <class T>
struct SumCritic {
  using Scalar = T;
  using Tape = EmptyTape;
  Tensor<T> forward(const Tensor<T>& x, Tape*) const {
    Tensor<T> s({x.n(), 1});
    for (int n = 0; n < x.n(); ++n) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.shape().per_sample(); ++i) acc += x.sample(n)[i];
      s[static_cast<std::size_t>(n)] = static_cast<T>(acc);
    }
    return s;
  }
};

}  // namespace oracle

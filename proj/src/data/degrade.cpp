#include "data/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace inpaint_lab::data {

void DegradationSpec::validate() const {
  require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise_sigma must be finite and >= 0");
  require(std::isfinite(blur_sigma) && blur_sigma >= 0.0, "blur_sigma must be finite and >= 0");
  require(blur_kernel_size >= 1 && blur_kernel_size % 2 == 1,
          "blur_kernel_size must be odd and >= 1");
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size == 1 || sigma == 0.0) {
    std::vector<double> k(static_cast<std::size_t>(size), 0.0);
    k[static_cast<std::size_t>(size / 2)] = 1.0;
    return k;
  }
  std::vector<double> k(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i + r)];
  }
  for (double& v : k) v /= sum;
  return k;
}

ImageTensor gaussian_blur(const ImageTensor& img, int kernel_size, double sigma) {
  const std::vector<double> k = gaussian_kernel(kernel_size, sigma);
  const int r = kernel_size / 2;
  if (r == 0 || sigma == 0.0) return img;
  const int h = img.height();
  const int w = img.width();
  ImageTensor tmp(h, w);
  ImageTensor out(h, w);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i)
          acc += k[static_cast<std::size_t>(i + r)] * img.at(c, y, std::clamp(x + i, 0, w - 1));
        tmp.at(c, y, x) = static_cast<float>(acc);
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i)
          acc += k[static_cast<std::size_t>(i + r)] * tmp.at(c, std::clamp(y + i, 0, h - 1), x);
        out.at(c, y, x) = static_cast<float>(acc);
      }
  }
  return out;
}

DegradedPair synthesize_degraded_pair(const ImageTensor& clean, const DegradationSpec& spec) {
  spec.validate();
  ImageTensor degraded = gaussian_blur(clean, spec.blur_kernel_size, spec.blur_sigma);
  Rng rng(spec.seed);
  ImageTensor residual(clean.height(), clean.width());
  for (std::size_t i = 0; i < degraded.numel(); ++i) {
    double v = degraded.data()[i];
    if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
    const float c = clean.data()[i];
    const float d = static_cast<float>(std::clamp(v, -1.0, 1.0));
    // Store d' = c + (d - c) so the decomposition is exact in float; nudge
    // the residual in the rare case rounding pushes d' outside [-1, 1].
    float r = d - c;
    float d2 = c + r;
    while (d2 > 1.0f) {
      r = std::nextafter(r, -INFINITY);
      d2 = c + r;
    }
    while (d2 < -1.0f) {
      r = std::nextafter(r, INFINITY);
      d2 = c + r;
    }
    residual.data()[i] = r;
    degraded.data()[i] = d2;
  }
  return {std::move(degraded), std::move(residual)};
}

}  // namespace inpaint_lab::data

#pragma once

#include <cstdint>
#include <vector>

#include "image/image.hpp"

namespace inpaint_lab::data {

struct DegradationSpec {
  double noise_sigma = 0.1;       // additive Gaussian noise std, [-1,1] units
  double blur_sigma = 1.0;        // Gaussian blur std, pixels
  int blur_kernel_size = 5;       // odd, >= 1
  std::uint64_t seed = 0;

  void validate() const;
};

struct DegradedPair {
  ImageTensor degraded;
  ImageTensor residual;  // degraded - clean, exact in float: residual + clean == degraded
};

// Normalized 1-D Gaussian taps; a single tap of 1 for size 1 or sigma 0.
std::vector<double> gaussian_kernel(int size, double sigma);

// Separable Gaussian blur with replicated borders.
ImageTensor gaussian_blur(const ImageTensor& img, int kernel_size, double sigma);

// degraded = clip(blur(clean) + noise, [-1,1]); residual = degraded - clean.
DegradedPair synthesize_degraded_pair(const ImageTensor& clean, const DegradationSpec& spec);

}  // namespace inpaint_lab::data

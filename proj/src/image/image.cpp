#include "image/image.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace inpaint_lab {

ImageU8::ImageU8(int height, int width) : height_(height), width_(width) {
  require(height > 0 && width > 0, "ImageU8: dimensions must be positive");
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, 0);
}

ImageTensor::ImageTensor(int height, int width, float fill) : height_(height), width_(width) {
  require(height > 0 && width > 0, "ImageTensor: dimensions must be positive");
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

bool ImageTensor::in_range() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v) && v >= -1.0f && v <= 1.0f; });
}

BinaryMask::BinaryMask(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  require(height > 0 && width > 0, "BinaryMask: dimensions must be positive");
  require(fill <= 1, "BinaryMask: values must be 0 or 1");
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

std::size_t BinaryMask::count_zeros() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{0}));
}

float normalize_sample(std::uint8_t u) { return static_cast<float>(u) / 127.5f - 1.0f; }

std::uint8_t denormalize_sample(float v) {
  if (std::isnan(v)) return 128;
  const double scaled = (static_cast<double>(v) + 1.0) * 127.5;
  const double r = std::floor(scaled + 0.5);
  return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

ImageTensor to_tensor(const ImageU8& img) {
  ImageTensor out(img.height(), img.width());
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(c, y, x) = normalize_sample(img.at(y, x, c));
  return out;
}

ImageU8 to_u8(const ImageTensor& img) {
  ImageU8 out(img.height(), img.width());
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(y, x, c) = denormalize_sample(img.at(c, y, x));
  return out;
}

ImageU8 resize_bilinear(const ImageU8& img, Size2 target) {
  require(target.height > 0 && target.width > 0, "resize: target size must be positive");
  if (img.size() == target) return img;
  ImageU8 out(target.height, target.width);
  const double sy = static_cast<double>(img.height()) / target.height;
  const double sx = static_cast<double>(img.width()) / target.width;
  for (int y = 0; y < target.height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < target.width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(y0, x0, c) * (1.0 - wx) + img.at(y0, x1, c) * wx;
        const double bot = img.at(y1, x0, c) * (1.0 - wx) + img.at(y1, x1, c) * wx;
        const double v = top * (1.0 - wy) + bot * wy;
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace inpaint_lab

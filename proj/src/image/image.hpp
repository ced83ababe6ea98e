#pragma once

#include <cstdint>
#include <vector>

namespace inpaint_lab {

struct Size2 {
  int height = 0;
  int width = 0;
  friend bool operator==(const Size2&, const Size2&) = default;
};

// 8-bit RGB image, interleaved HWC.
class ImageU8 {
 public:
  static constexpr int kChannels = 3;

  ImageU8() = default;
  ImageU8(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  Size2 size() const { return {height_, width_}; }
  bool empty() const { return data_.empty(); }

  std::uint8_t& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  std::uint8_t at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  friend bool operator==(const ImageU8&, const ImageU8&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

// Real-valued RGB image in [-1, 1], planar CHW (the layout the networks use).
class ImageTensor {
 public:
  static constexpr int kChannels = 3;

  ImageTensor() = default;
  ImageTensor(int height, int width, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  Size2 size() const { return {height_, width_}; }
  std::size_t numel() const { return data_.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(height_) * width_; }

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::vector<float>& data() { return data_; }
  const std::vector<float>& data() const { return data_; }

  // True when every sample is finite and inside [-1, 1].
  bool in_range() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// Binary mask over {0,1}: 0 = corrupted, 1 = known. Broadcast over channels.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::uint8_t fill = 1);

  int height() const { return height_; }
  int width() const { return width_; }
  Size2 size() const { return {height_, width_}; }

  std::uint8_t& at(int y, int x) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t at(int y, int x) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  std::size_t count_zeros() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> data_;
};

// u -> u/127.5 - 1
float normalize_sample(std::uint8_t u);
// Inverse with round-half-up, clamped to [0, 255].
std::uint8_t denormalize_sample(float v);

ImageTensor to_tensor(const ImageU8& img);
ImageU8 to_u8(const ImageTensor& img);

// Bilinear resize, half-pixel centers, edge-clamped. Output rounded half-up.
ImageU8 resize_bilinear(const ImageU8& img, Size2 target);

}  // namespace inpaint_lab

#include "data/mask.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace inpaint_lab::data {

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::kCenterBox:
      return "center-box";
    case MaskKind::kRandomBox:
      return "random-box";
    case MaskKind::kRandomPixels:
      return "random-pixels";
  }
  return "?";
}

MaskKind parse_mask_kind(std::string_view name) {
  if (name == "center-box") return MaskKind::kCenterBox;
  if (name == "random-box") return MaskKind::kRandomBox;
  if (name == "random-pixels") return MaskKind::kRandomPixels;
  fail_validation("unknown mask kind '" + std::string(name) +
                  "' (expected center-box, random-box or random-pixels)");
}

Size2 box_size(double fraction, Size2 image) {
  const double side = std::sqrt(fraction);
  return {static_cast<int>(std::floor(image.height * side)),
          static_cast<int>(std::floor(image.width * side))};
}

BinaryMask generate_mask(const MaskSpec& spec, Size2 size) {
  require(size.height > 0 && size.width > 0, "mask size must be positive");
  require(spec.fraction > 0.0 && spec.fraction < 1.0, "mask fraction must be in (0, 1)");
  BinaryMask mask(size.height, size.width, 1);
  Rng rng(spec.seed);

  if (spec.kind == MaskKind::kRandomPixels) {
    const auto total = static_cast<std::size_t>(size.height) * size.width;
    const auto zeros = static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(total)));
    if (zeros == 0) fail_validation("mask fraction corrupts 0 pixels at this image size");
    // Partial Fisher-Yates: the first `zeros` slots are the chosen pixels.
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < zeros; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
      std::swap(idx[i], idx[j]);
      mask.data()[idx[i]] = 0;
    }
    return mask;
  }

  const Size2 box = box_size(spec.fraction, size);
  if (box.height <= 0 || box.width <= 0)
    fail_validation("mask box area computes to 0 pixels at this image size");
  int top = (size.height - box.height) / 2;
  int left = (size.width - box.width) / 2;
  if (spec.kind == MaskKind::kRandomBox) {
    top = static_cast<int>(rng.below(static_cast<std::uint64_t>(size.height - box.height) + 1));
    left = static_cast<int>(rng.below(static_cast<std::uint64_t>(size.width - box.width) + 1));
  }
  for (int y = top; y < top + box.height; ++y)
    for (int x = left; x < left + box.width; ++x) mask.at(y, x) = 0;
  return mask;
}

namespace {

void check_shapes(const ImageTensor& image, const BinaryMask& mask) {
  if (image.size() != mask.size())
    fail_validation("mask shape " + std::to_string(mask.height()) + "x" +
                    std::to_string(mask.width()) + " does not match image shape " +
                    std::to_string(image.height()) + "x" + std::to_string(image.width()));
}

}  // namespace

ImageTensor apply_mask(const ImageTensor& image, const BinaryMask& mask) {
  check_shapes(image, mask);
  ImageTensor out = image;
  const std::size_t plane = image.plane();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < plane; ++i)
      if (!mask.data()[i]) out.data()[c * plane + i] = 0.0f;
  return out;
}

ImageTensor apply_complement(const ImageTensor& image, const BinaryMask& mask) {
  check_shapes(image, mask);
  ImageTensor out = image;
  const std::size_t plane = image.plane();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < plane; ++i)
      if (mask.data()[i]) out.data()[c * plane + i] = 0.0f;
  return out;
}

}  // namespace inpaint_lab::data

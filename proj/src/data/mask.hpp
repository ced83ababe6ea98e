#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "image/image.hpp"

namespace inpaint_lab::data {

enum class MaskKind { kCenterBox, kRandomBox, kRandomPixels };

std::string_view to_string(MaskKind kind);
MaskKind parse_mask_kind(std::string_view name);

struct MaskSpec {
  MaskKind kind = MaskKind::kCenterBox;
  double fraction = 0.25;  // share of pixels to corrupt, in (0, 1)
  std::uint64_t seed = 0;
};

// Box side lengths for the box kinds: floor(H*sqrt(f)) x floor(W*sqrt(f)),
// i.e. the largest box with the image's aspect ratio and area <= f*H*W.
Size2 box_size(double fraction, Size2 image);

BinaryMask generate_mask(const MaskSpec& spec, Size2 size);

// M ⊙ image, mask broadcast over channels. Corrupted samples become 0.
ImageTensor apply_mask(const ImageTensor& image, const BinaryMask& mask);

// (1 - M) ⊙ image.
ImageTensor apply_complement(const ImageTensor& image, const BinaryMask& mask);

}  // namespace inpaint_lab::data

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "image/image.hpp"

namespace inpaint_lab::data {

struct Sample {
  std::string id;
  ImageTensor image;
};

struct LoadReport {
  std::size_t candidates = 0;  // files with an image extension
  std::size_t loaded = 0;
  std::vector<std::string> skipped;  // "name: reason"
};

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::uint64_t seed = 0;
  LoadReport report;
};

// Number of training items for a split of `count` items: round(fraction *
// count), kept inside [1, count-1] so neither side is empty.
std::size_t train_count(std::size_t count, double split_fraction);

// Reads every PNG/JPEG in `directory` (sorted by filename), resizes to
// `target` with the bilinear filter, normalizes to [-1,1], shuffles with the
// seeded Fisher-Yates of common/rng.hpp and splits.
DatasetSplit load_dataset(const std::filesystem::path& directory, Size2 target,
                          double split_fraction, std::uint64_t seed);

// Deterministic images of anti-aliased ellipses/rectangles on gradient
// backgrounds. Same (count, size, seed) gives a bit-identical dataset.
DatasetSplit generate_synthetic_dataset(std::size_t count, Size2 size, std::uint64_t seed,
                                        double split_fraction = 0.9);

// One synthetic image; generate_synthetic_dataset calls this per index.
ImageU8 synthetic_image(Size2 size, std::uint64_t seed, std::size_t index);

}  // namespace inpaint_lab::data

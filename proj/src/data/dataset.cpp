#include "data/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "image/codec.hpp"

namespace inpaint_lab::data {

namespace fs = std::filesystem;

std::size_t train_count(std::size_t count, double split_fraction) {
  require(count >= 2, "dataset needs at least 2 usable images");
  require(split_fraction > 0.0 && split_fraction < 1.0, "split_fraction must be in (0, 1)");
  const auto n = static_cast<std::size_t>(std::llround(split_fraction * static_cast<double>(count)));
  return std::clamp<std::size_t>(n, 1, count - 1);
}

namespace {

DatasetSplit split_samples(std::vector<Sample> samples, double split_fraction, std::uint64_t seed) {
  const std::size_t n_train = train_count(samples.size(), split_fraction);
  Rng rng(seed);
  shuffle(samples, rng);
  DatasetSplit out;
  out.seed = seed;
  out.train.assign(std::make_move_iterator(samples.begin()),
                   std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)));
  out.test.assign(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)),
                  std::make_move_iterator(samples.end()));
  return out;
}

}  // namespace

DatasetSplit load_dataset(const fs::path& directory, Size2 target, double split_fraction,
                          std::uint64_t seed) {
  require(split_fraction > 0.0 && split_fraction < 1.0, "split_fraction must be in (0, 1)");
  require(target.height > 0 && target.width > 0, "target size must be positive");
  std::error_code ec;
  if (!fs::is_directory(directory, ec))
    fail_runtime("cannot read dataset directory " + directory.string());

  std::vector<fs::path> files;
  for (fs::directory_iterator it(directory, ec), end; !ec && it != end; it.increment(ec))
    if (it->is_regular_file() && has_image_extension(it->path())) files.push_back(it->path());
  if (ec) fail_runtime("cannot list " + directory.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  LoadReport report;
  report.candidates = files.size();
  std::vector<Sample> samples;
  for (const auto& f : files) {
    try {
      const ImageU8 raw = read_image(f);
      samples.push_back({f.stem().string(), to_tensor(resize_bilinear(raw, target))});
    } catch (const RuntimeFailure& e) {
      log_warning(fmt::format("skipping {}: {}", f.filename().string(), e.what()));
      report.skipped.push_back(f.filename().string() + ": " + e.what());
    }
  }
  report.loaded = samples.size();
  if (samples.size() < 2)
    fail_runtime(fmt::format("{} has {} usable images; need at least 2", directory.string(),
                             samples.size()));
  DatasetSplit out = split_samples(std::move(samples), split_fraction, seed);
  out.report = std::move(report);
  return out;
}

namespace {

struct Rgb {
  double r, g, b;
};

Rgb random_color(Rng& rng) { return {rng.uniform(0, 255), rng.uniform(0, 255), rng.uniform(0, 255)}; }

enum class ShapeKind { kEllipse, kRectangle };

struct Shape {
  ShapeKind kind;
  double cy, cx;    // center, pixels
  double ry, rx;    // half extents
  double cos_t, sin_t;
  Rgb color;

  bool contains(double y, double x) const {
    const double dy = y - cy;
    const double dx = x - cx;
    const double u = dx * cos_t + dy * sin_t;
    const double v = -dx * sin_t + dy * cos_t;
    if (kind == ShapeKind::kEllipse) return (u * u) / (rx * rx) + (v * v) / (ry * ry) <= 1.0;
    return std::abs(u) <= rx && std::abs(v) <= ry;
  }
};

}  // namespace

ImageU8 synthetic_image(Size2 size, std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, fmt::format("synthetic/{}", index)));
  const int h = size.height;
  const int w = size.width;
  const Rgb c0 = random_color(rng);
  const Rgb c1 = random_color(rng);
  const double angle = rng.uniform(0.0, 2.0 * M_PI);
  const double gx = std::cos(angle);
  const double gy = std::sin(angle);

  const int n_shapes = 1 + static_cast<int>(rng.below(3));
  std::vector<Shape> shapes;
  const double scale = std::min(h, w);
  for (int i = 0; i < n_shapes; ++i) {
    Shape s;
    s.kind = rng.below(2) == 0 ? ShapeKind::kEllipse : ShapeKind::kRectangle;
    s.cy = rng.uniform(0.2, 0.8) * h;
    s.cx = rng.uniform(0.2, 0.8) * w;
    s.ry = rng.uniform(0.1, 0.3) * scale;
    s.rx = rng.uniform(0.1, 0.3) * scale;
    const double t = rng.uniform(0.0, M_PI);
    s.cos_t = std::cos(t);
    s.sin_t = std::sin(t);
    s.color = random_color(rng);
    shapes.push_back(s);
  }

  // 4x4 supersampling for anti-aliased edges.
  constexpr int kSub = 4;
  ImageU8 img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::array<double, 3> acc{0, 0, 0};
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double py = y + (sy + 0.5) / kSub;
          const double px = x + (sx + 0.5) / kSub;
          const double t = std::clamp(0.5 + ((px / w - 0.5) * gx + (py / h - 0.5) * gy), 0.0, 1.0);
          Rgb c{c0.r + (c1.r - c0.r) * t, c0.g + (c1.g - c0.g) * t, c0.b + (c1.b - c0.b) * t};
          for (const Shape& s : shapes)
            if (s.contains(py, px)) c = s.color;  // later shapes paint over earlier ones
          acc[0] += c.r;
          acc[1] += c.g;
          acc[2] += c.b;
        }
      }
      for (int ch = 0; ch < 3; ++ch) {
        const double v = acc[ch] / (kSub * kSub);
        img.at(y, x, ch) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return img;
}

DatasetSplit generate_synthetic_dataset(std::size_t count, Size2 size, std::uint64_t seed,
                                        double split_fraction) {
  require(count >= 2, "synthetic dataset needs count >= 2");
  require(size.height > 0 && size.width > 0, "synthetic image size must be positive");
  std::vector<Sample> samples;
  samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    samples.push_back({fmt::format("synth_{:05d}", i), to_tensor(synthetic_image(size, seed, i))});
  DatasetSplit out = split_samples(std::move(samples), split_fraction, seed);
  out.report.candidates = count;
  out.report.loaded = count;
  return out;
}

}  // namespace inpaint_lab::data

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "image/image.hpp"

namespace inpaint_lab::metrics {

namespace fs = std::filesystem;

inline constexpr double kPsnrCapDb = 99.0;  // returned when MSE == 0

struct SsimParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;
  int window = 11;
  double sigma = 1.5;
  double dynamic_range = 255.0;

  void validate() const;
  nlohmann::json to_json() const;
};

// Mean squared difference over all H*W*3 samples.
double mse(const ImageU8& f, const ImageU8& g);
double psnr(const ImageU8& f, const ImageU8& g);
double psnr_from_mse(double mse);

// Normalized 2-D Gaussian window, row-major size*size.
std::vector<double> gaussian_window(int size, double sigma);
std::vector<double> luma(const ImageU8& image);

// SSIM on luma, averaged over all fully-contained window positions.
double ssim(const ImageU8& x, const ImageU8& y, const SsimParams& params = {});

struct NamedImage {
  std::string id;
  ImageU8 image;
};

struct MetricsRow {
  std::string id;
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<std::string> error;  // row excluded from aggregates when set
};

struct Aggregate {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // population
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  Aggregate psnr_db;
  Aggregate ssim;
  int included = 0;
  int excluded = 0;
  SsimParams params;
  std::string originals_source;
  std::string completed_source;
  std::string config_sha256;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // id,psnr_db,ssim over included rows
  void write(const fs::path& csv, const fs::path& json) const;
};

Aggregate aggregate(std::vector<double> values);

// Pairs originals[i] with completed[i]. A length mismatch is a validation
// error; a per-pair shape mismatch is recorded on the row and excluded.
MetricsReport evaluate_set(const std::vector<NamedImage>& originals,
                           const std::vector<NamedImage>& completed, const SsimParams& params = {});

}  // namespace inpaint_lab::metrics

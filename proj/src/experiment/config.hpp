#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "data/degrade.hpp"
#include "data/mask.hpp"
#include "enhance/enhancer.hpp"
#include "inpaint/inpaint.hpp"
#include "metrics/metrics.hpp"
#include "wgan/trainer.hpp"

namespace inpaint_lab::experiment {

namespace fs = std::filesystem;

enum class DataSource { kSynthetic, kDirectory };

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  std::string path;         // for kDirectory
  int image_size = 32;      // square, power of two >= 8
  double split_fraction = 0.9;
  int count = 284;          // synthetic images before the split
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DataConfig data;
  data::MaskSpec mask;
  wgan::GanConfig gan;
  inpaint::InpaintConfig inpaint;
  int inpaint_max_images = 20;  // 0 = every manifest entry
  enhance::EnhanceConfig enhance;
  data::DegradationSpec degradation;
  metrics::SsimParams ssim;

  // Normalized document: every field present, sub-seeds materialized.
  nlohmann::json to_json() const;
  // SHA-256 of the compact normalized document.
  std::string sha256() const;
};

// Type/range checks with every default materialized. All violations are
// collected and reported together, one per line, each prefixed with its JSON
// path. Missing sub-seeds are derived from the top-level seed.
ExperimentConfig validate_config(const nlohmann::json& doc);

// Parses JSON text; syntax errors become ValidationErrors with line/column.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);

// Reads, optionally overrides the top-level seed, validates.
ExperimentConfig load_config(const fs::path& path, const std::uint64_t* seed_override = nullptr);

}  // namespace inpaint_lab::experiment

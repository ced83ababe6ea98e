#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/fsutil.hpp"
#include "data/dataset.hpp"
#include "experiment/config.hpp"
#include "experiment/plot.hpp"
#include "image/image.hpp"
#include "metrics/metrics.hpp"

namespace inpaint_lab::experiment {

inline constexpr const char* kRunRootEnv = "INPAINT_LAB_RUN_ROOT";

// Where a run lives. An explicit directory wins (relative ones resolve under
// $INPAINT_LAB_RUN_ROOT when that is set); otherwise <root>/<hash[:12]> with
// root defaulting to ./runs.
fs::path resolve_run_dir(const std::optional<fs::path>& explicit_dir, const std::string& config_hash);

struct OpenOptions {
  std::optional<fs::path> config_path;  // absent: reuse run_dir/config.json
  std::optional<fs::path> run_dir;
  std::optional<std::uint64_t> seed;
};

// Owns one run directory for its lifetime (lock file). The normalized config
// is written to config.json on first use; later opens must agree with it.
class Run {
 public:
  static Run open(const OpenOptions& options);

  const ExperimentConfig& config() const { return config_; }
  const std::string& config_hash() const { return hash_; }
  const fs::path& dir() const { return dir_; }

  fs::path path(const fs::path& rel) const { return dir_ / rel; }

 private:
  Run(ExperimentConfig config, fs::path dir);

  ExperimentConfig config_;
  std::string hash_;
  fs::path dir_;
  std::unique_ptr<RunDirLock> lock_;
};

struct SplitImages {
  std::vector<data::Sample> train;
  std::vector<data::Sample> test;
};

struct MaskEntry {
  std::string id;
  fs::path image;  // relative to the run dir
  fs::path mask;
};

// prepare-data: data/{train,test}/<id>.png and data/split.json.
SplitImages prepare_data(Run& run);
SplitImages load_split(const Run& run);

// make-masks: masks/<id>.png for every test image and masks/manifest.json.
std::vector<MaskEntry> make_masks(Run& run);
std::vector<MaskEntry> read_mask_manifest(const fs::path& manifest);

// train-gan: history/gan.csv, checkpoints/{generator,critic,gan_state}.
void train_gan(Run& run, bool resume);

struct HeldOutRow {
  std::string id;
  double psnr_degraded = 0.0;
  double psnr_enhanced = 0.0;
};

// train-enhance: history/enhance.csv, checkpoints/enhancer, and
// report/enhance_heldout.csv comparing degraded vs enhanced test images.
std::vector<HeldOutRow> train_enhance(Run& run);

struct InpaintRow {
  std::string id;
  double initial_total = 0.0;
  double final_total = 0.0;
  int best_restart = 0;
};

// inpaint: results/<id>/{masked,raw,final}.png, trace.csv, z_star.json and
// results/summary.csv. Uses checkpoints/enhancer when present and allowed.
std::vector<InpaintRow> inpaint_batch(Run& run, const std::optional<fs::path>& manifest,
                                      bool use_enhancer);

struct EvaluationReports {
  metrics::MetricsReport completed;  // results/<id>/final.png
  metrics::MetricsReport raw;        // results/<id>/raw.png (before enhancement)
  metrics::MetricsReport zero_fill;  // masked input with the hole left at 0
};

// evaluate: report/{metrics,raw_metrics,zero_fill_metrics}.{csv,json}.
EvaluationReports evaluate(Run& run);

// plot with no explicit input: every history/trace present under the run,
// into plots/. Returns the summary paths written.
std::vector<fs::path> plot_all(Run& run);

}  // namespace inpaint_lab::experiment

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "image/image.hpp"
#include "wgan/losses.hpp"
#include "wgan/networks.hpp"

namespace inpaint_lab::wgan {

namespace fs = std::filesystem;

struct GanConfig {
  double lambda_gp = 10.0;
  int n_critic = 5;
  int batch_size = 64;
  double learning_rate = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.9;
  int total_steps = 2000;  // generator steps
  int checkpoint_interval = 500;
  int z_dim = 100;
  int base_width = 32;
  double leaky_slope = 0.2;
  PenaltySampling penalty_sampling = PenaltySampling::kInterpolate;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GanHistoryRow {
  std::int64_t step = 0;
  double critic_loss = 0.0;           // mean over the step's critic updates
  double wasserstein_estimate = 0.0;  // idem
  double generator_loss = 0.0;
  double grad_penalty = 0.0;          // idem, without lambda

  friend bool operator==(const GanHistoryRow&, const GanHistoryRow&) = default;
};

inline constexpr const char* kGanHistoryHeader =
    "step,critic_loss,wasserstein_estimate,generator_loss,grad_penalty";

struct GanTrainOptions {
  std::string config_sha256;  // recorded in checkpoint manifests
  bool resume = false;        // continue from run_dir/checkpoints
  bool write_samples = true;  // sample grids under run_dir/samples
};

struct GanResult {
  Generator<float> generator;
  Critic<float> critic;
  std::vector<GanHistoryRow> history;
};

// Alternating WGAN-GP training: per generator step, n_critic critic updates
// on fresh real/fake batches, then one generator update; Adam for both.
// Writes run_dir/history/gan.csv and checkpoints (every checkpoint_interval
// steps and at the end) under run_dir/checkpoints/{generator,critic,gan_state}.
// Bit-deterministic given the seed. A non-finite loss aborts with the last
// good checkpoint left in place.
GanResult train_gan(const std::vector<ImageTensor>& train, const GanConfig& config,
                    const fs::path& run_dir, const GanTrainOptions& options = {});

std::vector<GanHistoryRow> read_gan_history(const fs::path& csv);
void write_gan_history(const fs::path& csv, const std::vector<GanHistoryRow>& rows);

// Images [N,3,H,W] from a list of ImageTensors of equal size.
Tensor<float> stack_images(const std::vector<ImageTensor>& images);
ImageTensor unstack_image(const Tensor<float>& batch, int index);

// Square grid of generator samples (inference mode), as an 8-bit image.
ImageU8 sample_grid(Generator<float>& generator, std::uint64_t seed, int count);

}  // namespace inpaint_lab::wgan

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "data/mask.hpp"
#include "image/image.hpp"
#include "inpaint/losses.hpp"
#include "nn/tensor.hpp"
#include "wgan/networks.hpp"

namespace inpaint_lab::enhance {
template <class T>
class Enhancer;
}

namespace inpaint_lab::inpaint {

namespace fs = std::filesystem;
using nn::Tensor;

struct InpaintConfig {
  double q = 0.1;  // perceptual weight
  int iterations = 1500;
  double learning_rate = 0.03;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double z_clip = 1.0;
  int restarts = 1;
  PerceptualMode perceptual_mode = PerceptualMode::kLogSigmoid;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double contextual = 0.0;
  double perceptual = 0.0;
  double total = 0.0;
};

struct RestartResult {
  int index = 0;
  bool finite = true;
  std::vector<float> z_init;
  std::vector<float> z_final;
  std::vector<TraceRow> trace;  // losses at the iterate before each update
  LossTerms final_loss;         // losses at z_final
};

struct InpaintResult {
  std::vector<float> z_star;
  ImageTensor generated;      // G(z_star)
  ImageTensor reconstructed;  // M*y + (1-M)*G(z_star)
  std::vector<TraceRow> trace;
  LossTerms initial_loss;  // trace.front() of the selected restart
  LossTerms final_loss;
  int best_restart = 0;
  std::vector<RestartResult> restarts;
};

double contextual_loss(const ImageTensor& generated, const ImageTensor& y, const BinaryMask& mask);

// M*y + (1-M)*generated.
ImageTensor reconstruct(const ImageTensor& y, const BinaryMask& mask, const ImageTensor& generated);

InpaintResult optimize_latent(wgan::Generator<float>& generator, wgan::Critic<float>& critic,
                              const ImageTensor& y, const BinaryMask& mask,
                              const InpaintConfig& config);

struct CompletedImage {
  InpaintResult result;
  ImageTensor final_image;  // reconstructed, enhanced when an enhancer is given
};

CompletedImage inpaint_image(wgan::Generator<float>& generator, wgan::Critic<float>& critic,
                             enhance::Enhancer<float>* enhancer, const ImageTensor& y,
                             const BinaryMask& mask, const InpaintConfig& config);

// Writes raw.png, final.png, trace.csv and z_star.json into dir.
void write_outputs(const fs::path& dir, const CompletedImage& completed);

}  // namespace inpaint_lab::inpaint

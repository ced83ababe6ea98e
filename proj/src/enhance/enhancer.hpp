#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "image/image.hpp"
#include "nn/layers.hpp"
#include "nn/tensor.hpp"

namespace inpaint_lab {
class Rng;
}

namespace inpaint_lab::enhance {

namespace fs = std::filesystem;
using nn::Tensor;

// [Conv+ReLU] + (depth-2) x [Conv+BN+ReLU] + [Conv], 3x3 kernels, padding 1.
struct EnhancerArch {
  int depth = 10;
  int width = 64;

  void validate() const;
  friend bool operator==(const EnhancerArch&, const EnhancerArch&) = default;
};

template <class T>
struct EnhancerTape {
  bool train = true;
  std::vector<Tensor<T>> inputs;  // input of each conv
  std::vector<nn::BatchNormCache<T>> bn;
  std::vector<Tensor<T>> relu_out;
};

template <class T>
class Enhancer {
 public:
  using Scalar = T;

  explicit Enhancer(EnhancerArch arch = {});

  // He-normal conv weights, biases 0, BN gamma 1 / beta 0.
  void init(Rng& rng);

  // R(y). train=true uses batch statistics (and updates running averages).
  Tensor<T> forward(const Tensor<T>& y, bool train, EnhancerTape<T>* tape = nullptr);
  void backward(const EnhancerTape<T>& tape, const Tensor<T>& dresidual, Tensor<T>* dy,
                bool param_grads);

  const EnhancerArch& arch() const { return arch_; }
  std::vector<nn::Parameter<T>*> parameters();
  std::vector<nn::StateEntry<T>> state();

 private:
  bool has_bias(int layer) const { return layer == 0 || layer == arch_.depth - 1; }

  EnhancerArch arch_;
  std::vector<nn::Conv2d<T>> convs_;
  std::vector<nn::BatchNorm2d<T>> bns_;  // for layers 1 .. depth-2
};

// Inference-mode R(y) for a single image.
ImageTensor residual_forward(Enhancer<float>& r, const ImageTensor& y);
// clip(y - R(y), [-1, 1]).
ImageTensor enhance(Enhancer<float>& r, const ImageTensor& y);

// (1/2N) sum_i ||predicted_i - (degraded_i - clean_i)||^2 over a batch [N,3,H,W].
template <class T>
double residual_loss(const Tensor<T>& predicted, const Tensor<T>& degraded,
                     const Tensor<T>& clean);

// The same loss with R evaluated by the network. With accumulate_grads the
// parameter gradients are added into .grad.
template <class T>
double enhance_loss(Enhancer<T>& r, const Tensor<T>& degraded, const Tensor<T>& clean, bool train,
                    bool accumulate_grads);

struct TrainingPair {
  std::string id;
  ImageTensor clean;
  ImageTensor degraded;
};

enum class PairSource { kSynthetic, kProvided };
std::string_view to_string(PairSource s);
PairSource parse_pair_source(std::string_view name);

struct EnhanceConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  int depth = 10;
  int width = 64;
  int pair_count = 500;  // synthetic pairs drawn from the training images
  PairSource pair_source = PairSource::kSynthetic;
  std::string pairs_dir;  // for kProvided
  std::uint64_t seed = 0;

  void validate() const;
};

struct EnhanceHistoryRow {
  int epoch = 0;
  double mean_loss = 0.0;
  friend bool operator==(const EnhanceHistoryRow&, const EnhanceHistoryRow&) = default;
};

struct EnhanceTrainOptions {
  std::string config_sha256;
};

struct EnhanceResult {
  Enhancer<float> enhancer;
  std::vector<EnhanceHistoryRow> history;
};

// Adam over shuffled mini-batches; writes run_dir/history/enhance.csv after
// every epoch and run_dir/checkpoints/enhancer at the start and the end.
EnhanceResult train_enhancer(const std::vector<TrainingPair>& pairs, const EnhanceConfig& config,
                             const fs::path& run_dir, const EnhanceTrainOptions& options = {});

std::vector<EnhanceHistoryRow> read_enhance_history(const fs::path& csv);

void save_enhancer(const fs::path& dir, Enhancer<float>& r, std::int64_t epoch,
                   std::uint64_t seed, const std::string& config_sha256);
Enhancer<float> load_enhancer(const fs::path& dir);

// pairs/<id>_clean.png + pairs/<id>_degraded.png, sorted by id.
std::vector<TrainingPair> load_pairs(const fs::path& dir);

}  // namespace inpaint_lab::enhance

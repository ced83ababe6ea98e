#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nn/tensor.hpp"
#include "wgan/networks.hpp"

namespace inpaint_lab::wgan {

namespace fs = std::filesystem;

// Sidecar manifest.json of a checkpoint directory. The architecture fields
// present depend on `kind`; absent ones stay 0.
struct CheckpointManifest {
  std::string kind;  // generator | critic | enhancer
  int z_dim = 0;
  int image_size = 0;
  int base_width = 0;
  double leaky_slope = 0.0;  // critic
  int depth = 0;             // enhancer
  int width = 0;             // enhancer
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  std::string config_sha256;

  nlohmann::json to_json() const;
  static CheckpointManifest from_json(const nlohmann::json& j, const std::string& source);
};

CheckpointManifest manifest_for(const GeneratorArch& arch);
CheckpointManifest manifest_for(const CriticArch& arch);

// A checkpoint is a directory holding `weights.bin` + `manifest.json`.
template <class T>
void save_checkpoint(const fs::path& dir, const CheckpointManifest& manifest,
                     const std::vector<nn::StateEntry<T>>& state);

CheckpointManifest read_manifest(const fs::path& dir);

// Verifies kind and architecture fields of the stored manifest against
// `expected` (step/seed/hash are not compared), then loads the weights.
template <class T>
CheckpointManifest load_checkpoint(const fs::path& dir, const CheckpointManifest& expected,
                                   const std::vector<nn::StateEntry<T>>& state);

// Rebuild a network from the architecture recorded in its manifest.
Generator<float> load_generator(const fs::path& dir, CheckpointManifest* manifest = nullptr);
Critic<float> load_critic(const fs::path& dir, CheckpointManifest* manifest = nullptr);

}  // namespace inpaint_lab::wgan

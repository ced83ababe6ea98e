#pragma once

#include <cstdint>
#include <vector>

#include "nn/tensor.hpp"

namespace inpaint_lab::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

// Adam with bias correction. Owns first/second moment estimates for a fixed
// list of parameters; reads their .grad and updates their .value.
template <class T>
class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig config, std::vector<Parameter<T>*> params);

  void zero_grad();
  void step();

  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return steps_; }
  void set_steps(std::int64_t s) { steps_ = s; }

  // Moment tensors, named "adam.m.<param>" / "adam.v.<param>".
  std::vector<StateEntry<T>> state();

 private:
  AdamConfig config_;
  std::vector<Parameter<T>*> params_;
  std::vector<Tensor<T>> m_, v_;
  std::int64_t steps_ = 0;
};

}  // namespace inpaint_lab::nn

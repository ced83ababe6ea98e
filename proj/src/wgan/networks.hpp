#pragma once

#include <vector>

#include "nn/layers.hpp"
#include "nn/tensor.hpp"

namespace inpaint_lab {
class Rng;
}

namespace inpaint_lab::wgan {

using nn::Parameter;
using nn::Shape;
using nn::StateEntry;
using nn::Tensor;

// DCGAN-style generator: z -> 4x4x(8*base) -> stride-2 transposed-conv
// blocks (BN + ReLU) -> 3-channel tanh output at image_size x image_size.
struct GeneratorArch {
  int z_dim = 100;
  int image_size = 32;  // power of two, >= 8
  int base_width = 32;

  void validate() const;
  int upsample_blocks() const;
  friend bool operator==(const GeneratorArch&, const GeneratorArch&) = default;
};

// Stride-2 conv blocks with leaky ReLU down to 4x4, then a linear scalar
// head. No normalization layers, so each score depends on its own sample
// only and the per-sample input gradient is well defined.
struct CriticArch {
  int image_size = 32;
  int base_width = 32;
  double leaky_slope = 0.2;  // 1.0 makes the critic linear

  void validate() const;
  int downsample_blocks() const;
  friend bool operator==(const CriticArch&, const CriticArch&) = default;
};

template <class T>
struct GeneratorTape {
  bool train = true;
  Tensor<T> z;
  std::vector<nn::BatchNormCache<T>> bn;
  std::vector<Tensor<T>> activations;  // inputs of each transposed conv
  Tensor<T> out;
};

template <class T>
class Generator {
 public:
  using Scalar = T;
  using Tape = GeneratorTape<T>;

  explicit Generator(GeneratorArch arch = {});

  // DCGAN init: weights N(0, 0.02), BN gamma N(1, 0.02), biases 0.
  void init(Rng& rng);

  // train=true uses batch statistics and updates the BN running averages;
  // train=false is the deterministic inference path.
  Tensor<T> forward(const Tensor<T>& z, bool train, GeneratorTape<T>* tape = nullptr);
  void backward(const GeneratorTape<T>& tape, const Tensor<T>& dout, Tensor<T>* dz,
                bool param_grads);

  const GeneratorArch& arch() const { return arch_; }
  Shape image_shape(int batch) const { return {batch, 3, arch_.image_size, arch_.image_size}; }
  std::vector<Parameter<T>*> parameters();
  // Parameters plus BN running statistics.
  std::vector<StateEntry<T>> state();

 private:
  GeneratorArch arch_;
  nn::Linear<T> fc_;
  std::vector<nn::BatchNorm2d<T>> bns_;
  std::vector<nn::ConvTranspose2d<T>> ups_;
};

template <class T>
struct CriticTape {
  std::vector<Tensor<T>> inputs;  // input of each conv
  std::vector<Tensor<T>> pre;     // conv outputs before the activation
  Tensor<T> features;             // flattened input of the head
};

template <class T>
class Critic {
 public:
  using Scalar = T;
  using Tape = CriticTape<T>;

  explicit Critic(CriticArch arch = {});

  // Weights N(0, 0.02), biases 0.
  void init(Rng& rng);

  // One unbounded score per image: [N, 1].
  Tensor<T> forward(const Tensor<T>& x, CriticTape<T>* tape = nullptr) const;
  void backward(const CriticTape<T>& tape, const Tensor<T>& dscores, Tensor<T>* dx,
                bool param_grads);

  // D_i = <grad_x C(x_i), dir_i>, the derivative of each score along a
  // per-sample direction, by forward tangent propagation through the
  // primal pass recorded in `tape`.
  Tensor<T> directional(const CriticTape<T>& tape, const Tensor<T>& dir,
                        CriticTape<T>* tangent) const;
  // Accumulates d(sum_i dD_i * D_i)/d(params). Leaky-ReLU slopes are
  // piecewise constant, so only the tangent path carries parameter
  // dependence and biases receive no gradient.
  void directional_backward(const CriticTape<T>& tape, const CriticTape<T>& tangent,
                            const Tensor<T>& dD);

  const CriticArch& arch() const { return arch_; }
  std::vector<Parameter<T>*> parameters();
  std::vector<StateEntry<T>> state();

 private:
  CriticArch arch_;
  std::vector<nn::Conv2d<T>> convs_;
  nn::Linear<T> head_;
};

}  // namespace inpaint_lab::wgan

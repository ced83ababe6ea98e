#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include "common/error.hpp"
#include "image/image.hpp"
#include "nn/tensor.hpp"

// Completion objective: contextual L1 on the known region plus a weighted
// critic term. Generic over generator/critic types like wgan/losses.hpp.

namespace inpaint_lab::inpaint {

using nn::Tensor;

enum class PerceptualMode { kLogSigmoid, kNegativeCritic };
std::string_view to_string(PerceptualMode m);
PerceptualMode parse_perceptual_mode(std::string_view name);

inline constexpr double kLogClamp = 1e-12;

struct LossTerms {
  double total = 0.0;
  double contextual = 0.0;
  double perceptual = 0.0;
};

namespace detail {

template <class T>
void check_pair(const Tensor<T>& a, const Tensor<T>& b, const BinaryMask& mask) {
  if (!(a.shape() == b.shape()) || a.c() != 3 || a.h() != mask.height() || a.w() != mask.width())
    fail_validation("shape mismatch: " + a.shape().str() + " vs " + b.shape().str() + " with mask " +
                    std::to_string(mask.height()) + "x" + std::to_string(mask.width()));
}

// 1 - sigmoid(s) = sigmoid(-s), evaluated without overflow.
inline double one_minus_sigmoid(double s) {
  if (s >= 0.0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

}  // namespace detail

// sum |M * (generated - y)| over every sample of a [N,3,H,W] batch.
template <class T>
double contextual_loss(const Tensor<T>& generated, const Tensor<T>& y, const BinaryMask& mask) {
  detail::check_pair(generated, y, mask);
  const std::size_t plane = generated.shape().plane();
  const auto& m = mask.data();
  double sum = 0.0;
  for (std::size_t i = 0; i < generated.numel(); ++i)
    if (m[i % plane]) sum += std::abs(static_cast<double>(generated[i]) - static_cast<double>(y[i]));
  return sum;
}

inline double perceptual_from_scores(const std::vector<double>& scores, PerceptualMode mode) {
  require(!scores.empty(), "perceptual loss needs at least one score");
  double sum = 0.0;
  for (const double s : scores) {
    if (!std::isfinite(s)) fail_runtime("non-finite critic score in perceptual loss");
    sum += mode == PerceptualMode::kLogSigmoid
               ? std::log(std::max(detail::one_minus_sigmoid(s), kLogClamp))
               : -s;
  }
  return sum / static_cast<double>(scores.size());
}

// d(perceptual)/d(s_i). Zero where the log clamp is active.
inline std::vector<double> perceptual_score_gradient(const std::vector<double>& scores,
                                                     PerceptualMode mode) {
  std::vector<double> g(scores.size());
  const double inv = 1.0 / static_cast<double>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mode == PerceptualMode::kNegativeCritic) {
      g[i] = -inv;
    } else {
      const double q = detail::one_minus_sigmoid(scores[i]);
      g[i] = q < kLogClamp ? 0.0 : -(1.0 - q) * inv;
    }
  }
  return g;
}

template <class C>
std::vector<double> critic_scores(const C& critic, const Tensor<typename C::Scalar>& x,
                                  typename C::Tape* tape = nullptr) {
  const auto s = critic.forward(x, tape);
  std::vector<double> out(s.numel());
  for (std::size_t i = 0; i < s.numel(); ++i) out[i] = static_cast<double>(s[i]);
  return out;
}

template <class C>
double perceptual_loss(const C& critic, const Tensor<typename C::Scalar>& generated,
                       PerceptualMode mode) {
  require(generated.n() >= 1, "perceptual loss needs a nonempty batch");
  return perceptual_from_scores(critic_scores(critic, generated), mode);
}

template <class C>
LossTerms total_loss(const Tensor<typename C::Scalar>& generated,
                     const Tensor<typename C::Scalar>& y, const BinaryMask& mask, const C& critic,
                     double q, PerceptualMode mode) {
  LossTerms t;
  t.contextual = contextual_loss(generated, y, mask);
  t.perceptual = perceptual_loss(critic, generated, mode);
  t.total = t.contextual + q * t.perceptual;
  return t;
}

// Loss at z and, when dz is non-null, its gradient with respect to z.
// The generator runs in inference mode; no parameter gradients are touched.
template <class G, class C>
LossTerms loss_and_latent_gradient(G& generator, C& critic, const Tensor<typename G::Scalar>& z,
                                   const Tensor<typename G::Scalar>& y, const BinaryMask& mask,
                                   double q, PerceptualMode mode, Tensor<typename G::Scalar>* dz,
                                   Tensor<typename G::Scalar>* generated = nullptr) {
  using T = typename G::Scalar;
  typename G::Tape gtape;
  const Tensor<T> x = generator.forward(z, /*train=*/false, &gtape);
  detail::check_pair(x, y, mask);
  typename C::Tape ctape;
  const std::vector<double> scores = critic_scores(critic, x, &ctape);

  LossTerms t;
  t.contextual = contextual_loss(x, y, mask);
  t.perceptual = perceptual_from_scores(scores, mode);
  t.total = t.contextual + q * t.perceptual;
  if (generated) *generated = x;
  if (!dz) return t;

  const std::vector<double> ds = perceptual_score_gradient(scores, mode);
  Tensor<T> dscores({x.n(), 1});
  for (std::size_t i = 0; i < ds.size(); ++i) dscores[i] = static_cast<T>(q * ds[i]);
  Tensor<T> dx;
  critic.backward(ctape, dscores, &dx, /*param_grads=*/false);
  const std::size_t plane = x.shape().plane();
  const auto& m = mask.data();
  for (std::size_t i = 0; i < x.numel(); ++i) {
    if (!m[i % plane]) continue;
    const T d = x[i] - y[i];
    if (d > T(0))
      dx[i] += T(1);
    else if (d < T(0))
      dx[i] -= T(1);
  }
  generator.backward(gtape, dx, dz, /*param_grads=*/false);
  return t;
}

}  // namespace inpaint_lab::inpaint

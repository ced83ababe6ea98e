#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "nn/tensor.hpp"

// WGAN-GP objectives. The functions are generic over the critic so that the
// production network (wgan::Critic) and exact analytic critics used in tests
// go through the same code. A critic type C provides:
//
//   using Scalar; using Tape;
//   Tensor<Scalar> forward(const Tensor<Scalar>& x, Tape* tape) const;   // [N,1]
//   void backward(const Tape&, const Tensor<Scalar>& dscores,
//                 Tensor<Scalar>* dx, bool param_grads);
//   Tensor<Scalar> directional(const Tape&, const Tensor<Scalar>& dir, Tape* tangent) const;
//   void directional_backward(const Tape&, const Tape& tangent, const Tensor<Scalar>& dD);

namespace inpaint_lab::wgan {

using nn::Tensor;

// Where the penalty's gradient norm is evaluated.
enum class PenaltySampling {
  kInterpolate,  // x_hat = eps * x_real + (1 - eps) * x_fake, eps ~ U(0,1) per sample
  kFake,         // x_hat = x_fake
};

std::string_view to_string(PenaltySampling s);
PenaltySampling parse_penalty_sampling(std::string_view name);

// Batch of i.i.d. Uniform(-1,1) latent vectors, shape [batch, z_dim].
template <class T>
Tensor<T> sample_latent(int batch, int z_dim, Rng& rng) {
  require(batch >= 1, "latent batch must be >= 1");
  require(z_dim >= 1, "latent dimension must be >= 1");
  Tensor<T> z({batch, z_dim});
  for (auto& v : z.values()) v = static_cast<T>(rng.uniform_open(-1.0, 1.0));
  return z;
}

template <class C>
double mean_score(const C& critic, const Tensor<typename C::Scalar>& batch) {
  require(batch.n() >= 1, "critic batch must be nonempty");
  const auto s = critic.forward(batch, nullptr);
  double sum = 0.0;
  for (const auto v : s.values()) sum += v;
  return sum / s.n();
}

// mean(C(fake)) - mean(C(real)).
template <class C>
double wasserstein_estimate(const C& critic, const Tensor<typename C::Scalar>& real,
                            const Tensor<typename C::Scalar>& fake) {
  return mean_score(critic, fake) - mean_score(critic, real);
}

// Penalty sample points; one U(0,1) draw per sample for kInterpolate, none
// for kFake.
template <class T>
Tensor<T> penalty_points(const Tensor<T>& real, const Tensor<T>& fake, Rng& rng,
                         PenaltySampling sampling) {
  if (!(real.shape() == fake.shape()))
    fail_validation("real and fake batches differ in shape: " + real.shape().str() + " vs " +
                    fake.shape().str());
  if (sampling == PenaltySampling::kFake) return fake;
  Tensor<T> x(real.shape());
  const std::size_t per = real.shape().per_sample();
  for (int n = 0; n < real.n(); ++n) {
    const T eps = static_cast<T>(rng.uniform01());
    const T* r = real.sample(n);
    const T* f = fake.sample(n);
    T* o = x.sample(n);
    for (std::size_t i = 0; i < per; ++i) o[i] = eps * r[i] + (T(1) - eps) * f[i];
  }
  return x;
}

namespace detail {

// mean_i (|g_i| - 1)^2 from per-sample gradients; also returns the norms.
template <class T>
double penalty_from_gradients(const Tensor<T>& grads, std::vector<double>& norms) {
  const int n = grads.n();
  const std::size_t per = grads.shape().per_sample();
  norms.assign(static_cast<std::size_t>(n), 0.0);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double sq = 0.0;
    const T* g = grads.sample(i);
    for (std::size_t k = 0; k < per; ++k) sq += static_cast<double>(g[k]) * g[k];
    const double norm = std::sqrt(sq);
    if (!std::isfinite(norm)) fail_runtime("non-finite critic gradient in gradient penalty");
    norms[static_cast<std::size_t>(i)] = norm;
    sum += (norm - 1.0) * (norm - 1.0);
  }
  return sum / n;
}

}  // namespace detail

// Per-sample input gradients grad_x C(x_i), shape of x.
template <class C>
Tensor<typename C::Scalar> input_gradients(C& critic, const Tensor<typename C::Scalar>& x,
                                           typename C::Tape* tape_out = nullptr) {
  using T = typename C::Scalar;
  typename C::Tape local;
  typename C::Tape& tape = tape_out ? *tape_out : local;
  critic.forward(x, &tape);
  Tensor<T> grads;
  critic.backward(tape, Tensor<T>({x.n(), 1}, T(1)), &grads, /*param_grads=*/false);
  return grads;
}

// mean_i (||grad_x C(x_hat_i)||_2 - 1)^2, without the lambda factor.
template <class C>
double gradient_penalty(C& critic, const Tensor<typename C::Scalar>& real,
                        const Tensor<typename C::Scalar>& fake, Rng& rng,
                        PenaltySampling sampling = PenaltySampling::kInterpolate) {
  const auto x_hat = penalty_points(real, fake, rng, sampling);
  std::vector<double> norms;
  return detail::penalty_from_gradients(input_gradients(critic, x_hat), norms);
}

struct CriticLossTerms {
  double wasserstein = 0.0;
  double gradient_penalty = 0.0;
  double total = 0.0;  // wasserstein + lambda * gradient_penalty
};

// Critic objective. With accumulate_grads, adds d(total)/d(critic params)
// into the parameters' .grad.
template <class C>
CriticLossTerms critic_loss(C& critic, const Tensor<typename C::Scalar>& real,
                            const Tensor<typename C::Scalar>& fake, double lambda_gp, Rng& rng,
                            bool accumulate_grads,
                            PenaltySampling sampling = PenaltySampling::kInterpolate) {
  using T = typename C::Scalar;
  require(real.n() >= 1 && real.n() == fake.n(), "critic_loss needs equal nonempty batches");
  const int b = real.n();
  CriticLossTerms terms;

  typename C::Tape real_tape, fake_tape;
  const Tensor<T> sr = critic.forward(real, &real_tape);
  const Tensor<T> sf = critic.forward(fake, &fake_tape);
  double mr = 0.0, mf = 0.0;
  for (int i = 0; i < b; ++i) {
    mr += sr[static_cast<std::size_t>(i)];
    mf += sf[static_cast<std::size_t>(i)];
  }
  terms.wasserstein = mf / b - mr / b;
  if (accumulate_grads) {
    critic.backward(real_tape, Tensor<T>({b, 1}, static_cast<T>(-1.0 / b)), nullptr, true);
    critic.backward(fake_tape, Tensor<T>({b, 1}, static_cast<T>(1.0 / b)), nullptr, true);
  }

  const Tensor<T> x_hat = penalty_points(real, fake, rng, sampling);
  typename C::Tape tape;
  const Tensor<T> grads = input_gradients(critic, x_hat, &tape);
  std::vector<double> norms;
  terms.gradient_penalty = detail::penalty_from_gradients(grads, norms);
  terms.total = terms.wasserstein + lambda_gp * terms.gradient_penalty;

  if (accumulate_grads && lambda_gp != 0.0) {
    // d/dtheta of lambda * mean (|g_i| - 1)^2 equals d/dtheta of
    // sum_i <u_i, g_i(theta)> with u_i = (2 lambda / B)(|g_i| - 1) g_i / |g_i|
    // held fixed, and <u_i, g_i> is the derivative of C(x_hat_i) along u_i.
    Tensor<T> dir(grads.shape());
    const std::size_t per = grads.shape().per_sample();
    for (int i = 0; i < b; ++i) {
      const double norm = norms[static_cast<std::size_t>(i)];
      if (norm == 0.0) continue;
      const T scale = static_cast<T>(2.0 * lambda_gp / b * (norm - 1.0) / norm);
      const T* g = grads.sample(i);
      T* u = dir.sample(i);
      for (std::size_t k = 0; k < per; ++k) u[k] = scale * g[k];
    }
    typename C::Tape tangent;
    critic.directional(tape, dir, &tangent);
    critic.directional_backward(tape, tangent, Tensor<T>({b, 1}, T(1)));
  }
  return terms;
}

// -mean(C(fake)).
template <class C>
double generator_loss(const C& critic, const Tensor<typename C::Scalar>& fake) {
  return -mean_score(critic, fake);
}

// Generator step gradient: runs G(z) in training mode, scores the fakes and
// backpropagates -mean(C(G(z))) into the generator parameters only.
template <class G, class C>
double generator_loss_backward(G& generator, C& critic, const Tensor<typename C::Scalar>& z) {
  using T = typename C::Scalar;
  typename G::Tape gtape;
  const Tensor<T> fake = generator.forward(z, /*train=*/true, &gtape);
  typename C::Tape ctape;
  const Tensor<T> s = critic.forward(fake, &ctape);
  const int b = fake.n();
  double sum = 0.0;
  for (const T v : s.values()) sum += v;
  Tensor<T> dx;
  critic.backward(ctape, Tensor<T>({b, 1}, static_cast<T>(-1.0 / b)), &dx, /*param_grads=*/false);
  generator.backward(gtape, dx, nullptr, /*param_grads=*/true);
  return -sum / b;
}

}  // namespace inpaint_lab::wgan

#include "inpaint/inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "common/csv.hpp"
#include "common/fsutil.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "enhance/enhancer.hpp"
#include "image/codec.hpp"
#include "nn/adam.hpp"

namespace inpaint_lab::inpaint {

std::string_view to_string(PerceptualMode m) {
  return m == PerceptualMode::kLogSigmoid ? "log-sigmoid" : "negative-critic";
}

PerceptualMode parse_perceptual_mode(std::string_view name) {
  if (name == "log-sigmoid") return PerceptualMode::kLogSigmoid;
  if (name == "negative-critic") return PerceptualMode::kNegativeCritic;
  fail_validation("unknown perceptual mode '" + std::string(name) +
                  "' (expected log-sigmoid or negative-critic)");
}

void InpaintConfig::validate() const {
  require(std::isfinite(q) && q >= 0.0, "inpaint.q must be finite and >= 0");
  require(iterations >= 1, "inpaint.iterations must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate >= 0.0,
          "inpaint.learning_rate must be >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "inpaint.adam_beta1 must be in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "inpaint.adam_beta2 must be in [0, 1)");
  require(std::isfinite(z_clip) && z_clip > 0.0, "inpaint.z_clip must be > 0");
  require(restarts >= 1, "inpaint.restarts must be >= 1");
}

namespace {

Tensor<float> as_batch(const ImageTensor& img) {
  Tensor<float> t({1, 3, img.height(), img.width()});
  std::copy(img.data().begin(), img.data().end(), t.data());
  return t;
}

ImageTensor as_image(const Tensor<float>& t) {
  ImageTensor img(t.h(), t.w());
  std::copy(t.data(), t.data() + img.numel(), img.data().begin());
  return img;
}

void check_shapes(const ImageTensor& a, const ImageTensor& b, const BinaryMask& mask) {
  if (!(a.size() == b.size()) || !(a.size() == mask.size()))
    fail_validation(fmt::format("shape mismatch: {}x{} vs {}x{} with mask {}x{}", a.height(),
                                a.width(), b.height(), b.width(), mask.height(), mask.width()));
}

bool finite(const LossTerms& t) {
  return std::isfinite(t.total) && std::isfinite(t.contextual) && std::isfinite(t.perceptual);
}

RestartResult run_restart(wgan::Generator<float>& g, wgan::Critic<float>& c, const Tensor<float>& y,
                          const BinaryMask& mask, const InpaintConfig& config, int index) {
  RestartResult r;
  r.index = index;
  const int zd = g.arch().z_dim;
  const float clip = static_cast<float>(config.z_clip);
  Rng rng(derive_seed(config.seed, "inpaint/restart/" + std::to_string(index)));
  nn::Parameter<float> z("z", {1, zd});
  for (auto& v : z.value.values())
    v = std::clamp(static_cast<float>(rng.uniform_open(-1.0, 1.0)), -clip, clip);
  r.z_init = z.value.storage();

  nn::Adam<float> opt({config.learning_rate, config.adam_beta1, config.adam_beta2, 1e-8}, {&z});
  r.trace.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    const LossTerms t = loss_and_latent_gradient(g, c, z.value, y, mask, config.q,
                                                 config.perceptual_mode, &z.grad);
    r.trace.push_back({it, t.contextual, t.perceptual, t.total});
    if (!finite(t)) {
      r.finite = false;
      return r;
    }
    opt.step();
    for (auto& v : z.value.values()) v = std::clamp(v, -clip, clip);
  }
  r.z_final = z.value.storage();
  r.final_loss =
      loss_and_latent_gradient(g, c, z.value, y, mask, config.q, config.perceptual_mode, nullptr);
  r.finite = finite(r.final_loss);
  return r;
}

}  // namespace

double contextual_loss(const ImageTensor& generated, const ImageTensor& y, const BinaryMask& mask) {
  check_shapes(generated, y, mask);
  return contextual_loss(as_batch(generated), as_batch(y), mask);
}

ImageTensor reconstruct(const ImageTensor& y, const BinaryMask& mask, const ImageTensor& generated) {
  check_shapes(y, generated, mask);
  ImageTensor out(y.height(), y.width());
  const std::size_t plane = y.plane();
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = mask.data()[i % plane] ? y.data()[i] : generated.data()[i];
  return out;
}

InpaintResult optimize_latent(wgan::Generator<float>& generator, wgan::Critic<float>& critic,
                              const ImageTensor& y, const BinaryMask& mask,
                              const InpaintConfig& config) {
  config.validate();
  const int s = generator.arch().image_size;
  if (y.height() != s || y.width() != s || !(mask.size() == y.size()))
    fail_validation(fmt::format("image {}x{} / mask {}x{} do not match the generator output {}x{}",
                                y.height(), y.width(), mask.height(), mask.width(), s, s));
  if (critic.arch().image_size != s)
    fail_validation("critic and generator image sizes differ");

  const Tensor<float> yt = as_batch(y);
  InpaintResult result;
  int best = -1;
  for (int k = 0; k < config.restarts; ++k) {
    RestartResult r = run_restart(generator, critic, yt, mask, config, k);
    if (!r.finite) {
      log_warning(fmt::format("inpaint restart {} hit a non-finite loss and was discarded", k));
    } else if (best < 0 || r.final_loss.total <
                               result.restarts[static_cast<std::size_t>(best)].final_loss.total) {
      best = k;
    }
    result.restarts.push_back(std::move(r));
  }
  if (best < 0) fail_runtime("all inpainting restarts produced non-finite losses");

  const RestartResult& b = result.restarts[static_cast<std::size_t>(best)];
  result.best_restart = best;
  result.z_star = b.z_final;
  result.trace = b.trace;
  const TraceRow& first = b.trace.front();
  result.initial_loss = {first.total, first.contextual, first.perceptual};
  result.final_loss = b.final_loss;
  Tensor<float> z({1, generator.arch().z_dim});
  std::copy(b.z_final.begin(), b.z_final.end(), z.data());
  result.generated = as_image(generator.forward(z, /*train=*/false));
  result.reconstructed = reconstruct(y, mask, result.generated);
  return result;
}

CompletedImage inpaint_image(wgan::Generator<float>& generator, wgan::Critic<float>& critic,
                             enhance::Enhancer<float>* enhancer, const ImageTensor& y,
                             const BinaryMask& mask, const InpaintConfig& config) {
  CompletedImage out;
  out.result = optimize_latent(generator, critic, y, mask, config);
  out.final_image =
      enhancer ? enhance::enhance(*enhancer, out.result.reconstructed) : out.result.reconstructed;
  return out;
}

void write_outputs(const fs::path& dir, const CompletedImage& completed) {
  const InpaintResult& r = completed.result;
  write_png(dir / "raw.png", to_u8(r.reconstructed));
  write_png(dir / "final.png", to_u8(completed.final_image));
  CsvTable t;
  t.header = {"iter", "contextual", "perceptual", "total"};
  for (const auto& row : r.trace)
    t.rows.push_back({std::to_string(row.iter), format_real(row.contextual),
                      format_real(row.perceptual), format_real(row.total)});
  t.write(dir / "trace.csv");
  nlohmann::json z;
  z["z_star"] = r.z_star;
  z["best_restart"] = r.best_restart;
  z["initial_total"] = r.initial_loss.total;
  z["final_total"] = r.final_loss.total;
  z["final_contextual"] = r.final_loss.contextual;
  z["final_perceptual"] = r.final_loss.perceptual;
  nlohmann::json restarts = nlohmann::json::array();
  for (const auto& rr : r.restarts)
    restarts.push_back({{"index", rr.index},
                        {"finite", rr.finite},
                        {"final_total", rr.finite ? nlohmann::json(rr.final_loss.total)
                                                  : nlohmann::json(nullptr)}});
  z["restarts"] = restarts;
  write_file_atomic(dir / "z_star.json", z.dump(2) + "\n");
}

}  // namespace inpaint_lab::inpaint

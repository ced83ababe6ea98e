#include "wgan/trainer.hpp"

#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/fsutil.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "image/codec.hpp"
#include "nn/adam.hpp"
#include "nn/serialize.hpp"
#include "wgan/checkpoint.hpp"

namespace inpaint_lab::wgan {

using nlohmann::json;

void GanConfig::validate() const {
  require(std::isfinite(lambda_gp) && lambda_gp > 0.0, "gan.lambda_gp must be > 0");
  require(n_critic >= 1, "gan.n_critic must be >= 1");
  require(batch_size >= 1, "gan.batch_size must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "gan.learning_rate must be > 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "gan.adam_beta1 must be in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "gan.adam_beta2 must be in [0, 1)");
  require(total_steps >= 0, "gan.total_steps must be >= 0");
  require(checkpoint_interval >= 1, "gan.checkpoint_interval must be >= 1");
  require(z_dim >= 1, "gan.z_dim must be >= 1");
  require(base_width >= 1, "gan.base_width must be >= 1");
}

Tensor<float> stack_images(const std::vector<ImageTensor>& images) {
  require(!images.empty(), "cannot stack an empty image list");
  const Size2 size = images.front().size();
  Tensor<float> out({static_cast<int>(images.size()), 3, size.height, size.width});
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!(images[i].size() == size)) fail_validation("images differ in size");
    std::copy(images[i].data().begin(), images[i].data().end(), out.sample(static_cast<int>(i)));
  }
  return out;
}

ImageTensor unstack_image(const Tensor<float>& batch, int index) {
  ImageTensor img(batch.h(), batch.w());
  const float* p = batch.sample(index);
  std::copy(p, p + img.numel(), img.data().begin());
  return img;
}

ImageU8 sample_grid(Generator<float>& generator, std::uint64_t seed, int count) {
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  Rng rng(seed);
  const Tensor<float> z = sample_latent<float>(count, generator.arch().z_dim, rng);
  const Tensor<float> x = generator.forward(z, /*train=*/false);
  const int s = generator.arch().image_size;
  ImageU8 grid(side * s, side * s);
  for (int i = 0; i < count; ++i) {
    const ImageU8 tile = to_u8(unstack_image(x, i));
    const int oy = (i / side) * s;
    const int ox = (i % side) * s;
    for (int y = 0; y < s; ++y)
      for (int xx = 0; xx < s; ++xx)
        for (int c = 0; c < 3; ++c) grid.at(oy + y, ox + xx, c) = tile.at(y, xx, c);
  }
  return grid;
}

void write_gan_history(const fs::path& csv, const std::vector<GanHistoryRow>& rows) {
  CsvTable t;
  t.header = {"step", "critic_loss", "wasserstein_estimate", "generator_loss", "grad_penalty"};
  for (const auto& r : rows)
    t.rows.push_back({std::to_string(r.step), format_real(r.critic_loss),
                      format_real(r.wasserstein_estimate), format_real(r.generator_loss),
                      format_real(r.grad_penalty)});
  t.write(csv);
}

std::vector<GanHistoryRow> read_gan_history(const fs::path& csv) {
  const CsvTable t = CsvTable::read(csv);
  const auto step = t.numeric_column("step");
  const auto cl = t.numeric_column("critic_loss");
  const auto we = t.numeric_column("wasserstein_estimate");
  const auto gl = t.numeric_column("generator_loss");
  const auto gp = t.numeric_column("grad_penalty");
  std::vector<GanHistoryRow> rows;
  for (std::size_t i = 0; i < step.size(); ++i)
    rows.push_back({static_cast<std::int64_t>(step[i]), cl[i], we[i], gl[i], gp[i]});
  return rows;
}

namespace {

struct Paths {
  fs::path generator, critic, state, history, samples;
  explicit Paths(const fs::path& run_dir)
      : generator(run_dir / "checkpoints" / "generator"),
        critic(run_dir / "checkpoints" / "critic"),
        state(run_dir / "checkpoints" / "gan_state"),
        history(run_dir / "history" / "gan.csv"),
        samples(run_dir / "samples") {}
};

class GanTrainer {
 public:
  GanTrainer(const std::vector<ImageTensor>& train, const GanConfig& config, const fs::path& run_dir,
             const GanTrainOptions& options)
      : config_(config),
        options_(options),
        paths_(run_dir),
        data_(stack_images(train)),
        generator_(GeneratorArch{config.z_dim, data_.h(), config.base_width}),
        critic_(CriticArch{data_.h(), config.base_width, config.leaky_slope}),
        rng_(config.seed) {
    if (data_.h() != data_.w()) fail_validation("GAN training needs square images");
    Rng init_rng(derive_seed(config.seed, "gan/init"));
    generator_.init(init_rng);
    critic_.init(init_rng);
    const nn::AdamConfig adam{config.learning_rate, config.adam_beta1, config.adam_beta2, 1e-8};
    gen_opt_ = nn::Adam<float>(adam, generator_.parameters());
    critic_opt_ = nn::Adam<float>(adam, critic_.parameters());
  }

  GanResult run() {
    if (options_.resume) {
      restore();
    } else {
      save(/*final=*/false);
    }
    const int b = config_.batch_size;
    while (step_ < config_.total_steps) {
      GanHistoryRow row;
      row.step = step_ + 1;
      for (int k = 0; k < config_.n_critic; ++k) {
        const Tensor<float> real = real_batch(b);
        const Tensor<float> z = sample_latent<float>(b, config_.z_dim, rng_);
        const Tensor<float> fake = generator_.forward(z, /*train=*/true);
        critic_opt_.zero_grad();
        CriticLossTerms terms;
        try {
          terms = critic_loss(critic_, real, fake, config_.lambda_gp, rng_, true,
                              config_.penalty_sampling);
        } catch (const RuntimeFailure& e) {
          fail_runtime(fmt::format("step {}: {}", row.step, e.what()));
        }
        critic_opt_.step();
        row.critic_loss += terms.total / config_.n_critic;
        row.wasserstein_estimate += terms.wasserstein / config_.n_critic;
        row.grad_penalty += terms.gradient_penalty / config_.n_critic;
      }
      const Tensor<float> z = sample_latent<float>(b, config_.z_dim, rng_);
      gen_opt_.zero_grad();
      row.generator_loss = generator_loss_backward(generator_, critic_, z);
      gen_opt_.step();

      if (!std::isfinite(row.critic_loss) || !std::isfinite(row.wasserstein_estimate) ||
          !std::isfinite(row.generator_loss) || !std::isfinite(row.grad_penalty))
        fail_runtime(fmt::format(
            "non-finite loss at step {} (critic {}, generator {}); last good checkpoint kept at {}",
            row.step, row.critic_loss, row.generator_loss, paths_.generator.parent_path().string()));
      history_.push_back(row);
      ++step_;
      if (step_ % 100 == 0)
        log_info(fmt::format("gan step {}/{}: critic {:.4f} W {:.4f} gen {:.4f} gp {:.4f}", step_,
                             config_.total_steps, row.critic_loss, row.wasserstein_estimate,
                             row.generator_loss, row.grad_penalty));
      if (step_ % config_.checkpoint_interval == 0 && step_ < config_.total_steps) save(false);
    }
    save(/*final=*/true);
    return {std::move(generator_), std::move(critic_), std::move(history_)};
  }

 private:
  Tensor<float> real_batch(int b) {
    Tensor<float> out({b, 3, data_.h(), data_.w()});
    const std::size_t per = data_.shape().per_sample();
    for (int i = 0; i < b; ++i) {
      const int idx = static_cast<int>(rng_.below(static_cast<std::uint64_t>(data_.n())));
      std::copy(data_.sample(idx), data_.sample(idx) + per, out.sample(i));
    }
    return out;
  }

  std::vector<nn::StateEntry<float>> optimizer_state() {
    std::vector<nn::StateEntry<float>> s = gen_opt_.state();
    for (auto& e : s) e.name = "gen." + e.name;
    for (auto e : critic_opt_.state()) {
      e.name = "critic." + e.name;
      s.push_back(e);
    }
    return s;
  }

  CheckpointManifest stamp(CheckpointManifest m) const {
    m.step = step_;
    m.seed = config_.seed;
    m.config_sha256 = options_.config_sha256;
    return m;
  }

  void save(bool final) {
    save_checkpoint(paths_.generator, stamp(manifest_for(generator_.arch())), generator_.state());
    save_checkpoint(paths_.critic, stamp(manifest_for(critic_.arch())), critic_.state());
    nn::save_tensors(paths_.state / "adam.bin", optimizer_state());
    json st;
    st["step"] = step_;
    st["rng"] = rng_.save_state();
    st["generator_adam_steps"] = gen_opt_.steps();
    st["critic_adam_steps"] = critic_opt_.steps();
    st["epochs"] = static_cast<double>(step_) * config_.n_critic * config_.batch_size / data_.n();
    write_file_atomic(paths_.state / "state.json", st.dump(2) + "\n");
    write_gan_history(paths_.history, history_);
    if (options_.write_samples)
      write_png(paths_.samples / fmt::format("gan_step_{:06d}.png", step_),
                sample_grid(generator_, derive_seed(config_.seed, "gan/samples"), 16));
    if (final) log_info(fmt::format("gan training finished at step {}", step_));
  }

  void restore() {
    const CheckpointManifest gm =
        load_checkpoint(paths_.generator, manifest_for(generator_.arch()), generator_.state());
    const CheckpointManifest cm =
        load_checkpoint(paths_.critic, manifest_for(critic_.arch()), critic_.state());
    nn::load_tensors(paths_.state / "adam.bin", optimizer_state());
    json st;
    try {
      st = json::parse(read_file(paths_.state / "state.json"));
      step_ = st.at("step").get<std::int64_t>();
      rng_.load_state(st.at("rng").get<std::string>());
      gen_opt_.set_steps(st.at("generator_adam_steps").get<std::int64_t>());
      critic_opt_.set_steps(st.at("critic_adam_steps").get<std::int64_t>());
    } catch (const json::exception& e) {
      fail_runtime("corrupt training state: " + std::string(e.what()));
    }
    if (gm.step != step_ || cm.step != step_)
      fail_runtime("checkpoint steps disagree (generator " + std::to_string(gm.step) + ", critic " +
                   std::to_string(cm.step) + ", state " + std::to_string(step_) + ")");
    history_ = read_gan_history(paths_.history);
    std::erase_if(history_, [&](const GanHistoryRow& r) { return r.step > step_; });
    if (static_cast<std::int64_t>(history_.size()) != step_)
      fail_runtime("history has " + std::to_string(history_.size()) + " rows for step " +
                   std::to_string(step_));
    log_info(fmt::format("resuming gan training from step {}", step_));
  }

  GanConfig config_;
  GanTrainOptions options_;
  Paths paths_;
  Tensor<float> data_;
  Generator<float> generator_;
  Critic<float> critic_;
  nn::Adam<float> gen_opt_;
  nn::Adam<float> critic_opt_;
  Rng rng_;
  std::int64_t step_ = 0;
  std::vector<GanHistoryRow> history_;
};

}  // namespace

GanResult train_gan(const std::vector<ImageTensor>& train, const GanConfig& config,
                    const fs::path& run_dir, const GanTrainOptions& options) {
  config.validate();
  require(!train.empty(), "GAN training needs at least one image");
  GanTrainer trainer(train, config, run_dir, options);
  return trainer.run();
}

}  // namespace inpaint_lab::wgan

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "data/dataset.hpp"
#include "oracles.hpp"
#include "wgan/checkpoint.hpp"
#include "wgan/losses.hpp"
#include "wgan/networks.hpp"
#include "wgan/trainer.hpp"

using namespace inpaint_lab;
using namespace inpaint_lab::wgan;
namespace fs = std::filesystem;

namespace {

const GeneratorArch kTinyG{4, 8, 2};
const CriticArch kTinyC{8, 2, 0.2};

template <class T>
Tensor<T> random_batch(int n, int s, Rng& rng) {
  Tensor<T> t({n, 3, s, s});
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-1.0, 1.0));
  return t;
}

template <class T>
Critic<T> tiny_critic(std::uint64_t seed, double slope = 0.2) {
  Critic<T> c(CriticArch{8, 2, slope});
  Rng rng(seed);
  c.init(rng);
  // Default N(0, 0.02) weights give nearly-zero gradients; scale them up so
  // the checks exercise the nonlinearity.
  for (auto* p : c.parameters())
    for (auto& v : p->value.values()) v *= T(20);
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inpaint_lab_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<ImageTensor> tiny_images(int n) {
  auto split = data::generate_synthetic_dataset(static_cast<std::size_t>(n + 1), {8, 8}, 5, 0.9);
  std::vector<ImageTensor> out;
  for (auto& s : split.train) out.push_back(s.image);
  for (auto& s : split.test) out.push_back(s.image);
  return out;
}

GanConfig tiny_config(int steps) {
  GanConfig c;
  c.total_steps = steps;
  c.batch_size = 4;
  c.n_critic = 2;
  c.z_dim = 4;
  c.base_width = 2;
  c.checkpoint_interval = 2;
  c.seed = 42;
  return c;
}

}  // namespace

TEST_CASE("sample_latent") {
  Rng a(1), b(1);
  const auto z = sample_latent<float>(2, 4, a);
  CHECK(z.numel() == 8);
  for (float v : z.values()) {
    CHECK(v > -1.0f);
    CHECK(v < 1.0f);
  }
  CHECK(z == sample_latent<float>(2, 4, b));
  Rng big(2);
  const auto many = sample_latent<double>(1000, 100, big);
  double s = 0.0;
  for (double v : many.values()) s += v;
  CHECK(std::abs(s / 1e5) < 0.02);
  CHECK_THROWS_AS(sample_latent<float>(0, 4, a), ValidationError);
}

TEST_CASE("generator contract") {
  Generator<float> g(kTinyG);
  Rng rng(3);
  g.init(rng);
  const auto z = sample_latent<float>(3, 4, rng);
  const auto x = g.forward(z, false);
  CHECK(x.shape() == g.image_shape(3));
  for (float v : x.values()) {
    CHECK(v > -1.0f);
    CHECK(v < 1.0f);
  }
  CHECK(g.forward(z, false) == x);
  bool differs = false;
  for (std::size_t i = 0; i < x.shape().per_sample(); ++i) differs |= x.sample(0)[i] != x.sample(1)[i];
  CHECK(differs);
  CHECK_THROWS_AS(g.forward(Tensor<float>({1, 5}), false), ValidationError);
}

TEST_CASE("wasserstein estimate") {
  Rng rng(4);
  const auto real = random_batch<double>(3, 8, rng), fake = random_batch<double>(3, 8, rng);
  oracle::ConstantCritic<double> k{2.5, 192};
  CHECK(wasserstein_estimate(k, real, fake) == 0.0);
  const Tensor<double> ones({2, 3, 8, 8}, 1.0), minus({2, 3, 8, 8}, -1.0);
  oracle::SumCritic<double> sum;
  CHECK(wasserstein_estimate(sum, ones, minus) == -2.0 * 192);
  const auto c = tiny_critic<double>(5);
  CHECK(wasserstein_estimate(c, real, real) == 0.0);
}

TEST_CASE("gradient penalty anchors") {
  Rng rng(6);
  const auto real = random_batch<double>(4, 8, rng), fake = random_batch<double>(4, 8, rng);
  oracle::LinearCritic<double> lin;
  lin.w.resize(192);
  double norm = 0.0;
  for (auto& w : lin.w) {
    w = rng.normal();
    norm += w * w;
  }
  for (auto& w : lin.w) w /= std::sqrt(norm);
  CHECK(std::abs(gradient_penalty(lin, real, fake, rng)) <= 1e-6);
  oracle::ConstantCritic<double> k{3.0, 192};
  CHECK(std::abs(gradient_penalty(k, real, fake, rng) - 1.0) <= 1e-6);
  CHECK(std::abs(critic_loss(k, real, fake, 10.0, rng, false).total - 10.0) <= 1e-6);
}

TEST_CASE("gradient penalty matches finite differences of the critic") {
  auto c = tiny_critic<double>(7);
  Rng rng(8);
  const auto real = random_batch<double>(2, 8, rng), fake = random_batch<double>(2, 8, rng);
  Rng draw(9);
  Rng replay = draw;
  const double gp = gradient_penalty(c, real, fake, draw);
  auto x_hat = penalty_points(real, fake, replay, PenaltySampling::kInterpolate);
  double expected = 0.0;
  for (int n = 0; n < x_hat.n(); ++n) {
    double sq = 0.0;
    for (std::size_t i = 0; i < x_hat.shape().per_sample(); ++i) {
      const double g = oracle::central_difference<double>(
          [&] { return c.forward(x_hat, nullptr)[static_cast<std::size_t>(n)]; }, x_hat.sample(n)[i], 1e-6);
      sq += g * g;
    }
    expected += (std::sqrt(sq) - 1.0) * (std::sqrt(sq) - 1.0);
  }
  expected /= x_hat.n();
  CHECK(oracle::relative_error(gp, expected) < 1e-3);
}

TEST_CASE("critic loss composition") {
  auto c = tiny_critic<double>(10);
  Rng rng(11);
  const auto real = random_batch<double>(3, 8, rng), fake = random_batch<double>(3, 8, rng);
  Rng a(12), b(12);
  CHECK(critic_loss(c, real, fake, 0.0, a, false).total == wasserstein_estimate(c, real, fake));
  Rng p(13), q(13);
  const auto terms = critic_loss(c, real, fake, 10.0, p, false);
  const double w = wasserstein_estimate(c, real, fake);
  const double gp = gradient_penalty(c, real, fake, q);
  CHECK(terms.total == doctest::Approx(w + 10.0 * gp).epsilon(1e-12));
  CHECK(terms.wasserstein == doctest::Approx(w).epsilon(1e-12));
}

TEST_CASE("critic loss parameter gradient matches finite differences") {
  for (const auto sampling : {PenaltySampling::kInterpolate, PenaltySampling::kFake}) {
    auto c = tiny_critic<double>(14);
    Rng rng(15);
    const auto real = random_batch<double>(3, 8, rng), fake = random_batch<double>(3, 8, rng);
    const Rng start(16);
    for (auto* p : c.parameters()) p->zero_grad();
    Rng r0 = start;
    critic_loss(c, real, fake, 10.0, r0, true, sampling);

    auto loss = [&] {
      Rng r = start;
      return critic_loss(c, real, fake, 10.0, r, false, sampling).total;
    };
    Rng pick(17);
    const auto params = c.parameters();
    int checked = 0;
    while (checked < 10) {
      auto* p = params[pick.below(params.size())];
      const std::size_t i = pick.below(p->value.numel());
      const double numeric = oracle::central_difference<double>(loss, p->value[i], 1e-6);
      const double analytic = p->grad[i];
      INFO("param ", p->name, "[", i, "] analytic ", analytic, " numeric ", numeric);
      CHECK(oracle::relative_error(analytic, numeric) < 1e-3);
      ++checked;
    }
  }
}

TEST_CASE("generator loss") {
  Rng rng(18);
  const auto real = random_batch<double>(3, 8, rng), fake = random_batch<double>(3, 8, rng);
  oracle::ConstantCritic<double> k{1.5, 192};
  CHECK(generator_loss(k, fake) == -1.5);
  const auto c = tiny_critic<double>(19);
  const double mr = mean_score(c, real);
  CHECK(generator_loss(c, fake) == doctest::Approx(-(wasserstein_estimate(c, real, fake) + mr)).epsilon(1e-12));
  const auto s = c.forward(fake, nullptr);
  CHECK(generator_loss(c, fake) == doctest::Approx(-(s[0] + s[1] + s[2]) / 3.0).epsilon(1e-12));
}

TEST_CASE("a small critic step does not increase the critic loss") {
  auto c = tiny_critic<double>(20);
  Rng rng(21);
  const auto real = random_batch<double>(4, 8, rng), fake = random_batch<double>(4, 8, rng);
  const Rng start(22);
  Rng r0 = start;
  for (auto* p : c.parameters()) p->zero_grad();
  const double before = critic_loss(c, real, fake, 10.0, r0, true).total;
  for (auto* p : c.parameters())
    for (std::size_t i = 0; i < p->value.numel(); ++i) p->value[i] -= 1e-5 * p->grad[i];
  Rng r1 = start;
  CHECK(critic_loss(c, real, fake, 10.0, r1, false).total <= before);
}

TEST_CASE("checkpoint round trip and architecture mismatch") {
  const fs::path dir = scratch("ckpt");
  Generator<float> g(kTinyG);
  Rng rng(23);
  g.init(rng);
  save_checkpoint(dir / "g", manifest_for(g.arch()), g.state());
  CheckpointManifest m;
  Generator<float> back = load_generator(dir / "g", &m);
  CHECK(m.kind == "generator");
  CHECK(m.z_dim == 4);
  const auto a = g.parameters(), b = back.parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value == b[i]->value);

  Generator<float> wrong(GeneratorArch{5, 8, 2});
  CHECK_THROWS_AS(load_checkpoint(dir / "g", manifest_for(wrong.arch()), wrong.state()), RuntimeFailure);
  Critic<float> c(kTinyC);
  CHECK_THROWS_AS(load_checkpoint(dir / "g", manifest_for(c.arch()), c.state()), RuntimeFailure);
}

TEST_CASE("train_gan with zero steps") {
  const fs::path dir = scratch("gan0");
  const auto res = train_gan(tiny_images(8), tiny_config(0), dir);
  CHECK(res.history.empty());
  CHECK(fs::exists(dir / "checkpoints" / "generator" / "manifest.json"));
  CHECK(read_manifest(dir / "checkpoints" / "generator").step == 0);
  CHECK(read_gan_history(dir / "history" / "gan.csv").empty());
}

TEST_CASE("train_gan is deterministic and resumable") {
  const auto images = tiny_images(8);
  const fs::path full = scratch("gan_full"), half = scratch("gan_half");
  const auto a = train_gan(images, tiny_config(4), full);
  REQUIRE(a.history.size() == 4);
  for (const auto& r : a.history) {
    CHECK(std::isfinite(r.critic_loss));
    CHECK(std::isfinite(r.generator_loss));
  }
  CHECK(read_gan_history(full / "history" / "gan.csv") == a.history);

  train_gan(images, tiny_config(2), half);
  GanTrainOptions resume;
  resume.resume = true;
  const auto b = train_gan(images, tiny_config(4), half, resume);
  CHECK(b.history == a.history);

  Generator<float> g = load_generator(full / "checkpoints" / "generator");
  Rng rng(1);
  for (float v : g.forward(sample_latent<float>(4, 4, rng), false).values()) {
    CHECK(v > -1.0f);
    CHECK(v < 1.0f);
  }
}

TEST_CASE("non-finite training aborts and keeps the last checkpoint") {
  const fs::path dir = scratch("gan_nan");
  GanConfig c = tiny_config(6);
  c.learning_rate = 1e30;
  c.lambda_gp = 1e300;
  CHECK_THROWS_AS(train_gan(tiny_images(8), c, dir), RuntimeFailure);
  CHECK(fs::exists(dir / "checkpoints" / "generator" / "manifest.json"));
}

TEST_CASE("gan config validation") {
  GanConfig c;
  c.lambda_gp = -1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = GanConfig{};
  c.n_critic = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  CHECK(parse_penalty_sampling("fake") == PenaltySampling::kFake);
}

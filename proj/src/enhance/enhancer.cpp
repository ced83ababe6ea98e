#include "enhance/enhancer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "image/codec.hpp"
#include "nn/adam.hpp"
#include "wgan/checkpoint.hpp"

namespace inpaint_lab::enhance {

void EnhancerArch::validate() const {
  require(depth >= 2, "enhancer depth must be >= 2");
  require(width >= 1, "enhancer width must be >= 1");
}

template <class T>
Enhancer<T>::Enhancer(EnhancerArch arch) : arch_(arch) {
  arch_.validate();
  for (int i = 0; i < arch_.depth; ++i) {
    const int in = i == 0 ? 3 : arch_.width;
    const int out = i + 1 == arch_.depth ? 3 : arch_.width;
    convs_.emplace_back("enh.conv" + std::to_string(i), in, out, 3, 1, 1);
    if (!has_bias(i)) bns_.emplace_back("enh.bn" + std::to_string(i), out);
  }
}

template <class T>
void Enhancer<T>::init(Rng& rng) {
  for (auto& c : convs_) {
    const double fan_in = static_cast<double>(c.in_channels()) * c.kernel() * c.kernel();
    nn::fill_normal(c.weight.value, rng, std::sqrt(2.0 / fan_in));
    c.bias.value.fill(T(0));
  }
  for (auto& bn : bns_) {
    bn.gamma.value.fill(T(1));
    bn.beta.value.fill(T(0));
    bn.running_mean.fill(T(0));
    bn.running_var.fill(T(1));
  }
}

template <class T>
Tensor<T> Enhancer<T>::forward(const Tensor<T>& y, bool train, EnhancerTape<T>* tape) {
  if (y.c() != 3) fail_validation("enhancer expects 3-channel input, got " + y.shape().str());
  if (y.h() < 3 || y.w() < 3)
    fail_validation("enhancer input " + y.shape().str() + " is below the 3x3 kernel support");
  EnhancerTape<T> local;
  EnhancerTape<T>& t = tape ? *tape : local;
  t.train = train;
  t.inputs.clear();
  t.relu_out.clear();
  t.bn.assign(bns_.size(), {});

  Tensor<T> h = y;
  const int last = arch_.depth - 1;
  for (int i = 0;; ++i) {
    t.inputs.push_back(h);
    Tensor<T> u = convs_[static_cast<std::size_t>(i)].forward(h, has_bias(i));
    if (i == last) return u;
    if (!has_bias(i)) {
      auto& bn = bns_[static_cast<std::size_t>(i - 1)];
      auto* cache = &t.bn[static_cast<std::size_t>(i - 1)];
      u = train ? bn.forward_train(u, cache) : bn.forward_eval(u, cache);
    }
    h = nn::relu(u);
    t.relu_out.push_back(h);
  }
}

template <class T>
void Enhancer<T>::backward(const EnhancerTape<T>& tape, const Tensor<T>& dresidual, Tensor<T>* dy,
                           bool param_grads) {
  Tensor<T> g = dresidual;
  for (int i = arch_.depth - 1; i >= 0; --i) {
    const auto idx = static_cast<std::size_t>(i);
    if (i < arch_.depth - 1) {
      g = nn::relu_backward(tape.relu_out[idx], g);
      if (!has_bias(i)) {
        Tensor<T> dpre;
        auto& bn = bns_[idx - 1];
        if (tape.train)
          bn.backward_train(tape.bn[idx - 1], g, &dpre, param_grads);
        else
          bn.backward_eval(tape.bn[idx - 1], g, &dpre, param_grads);
        g = std::move(dpre);
      }
    }
    Tensor<T> dx;
    Tensor<T>* target = i > 0 ? &dx : dy;
    convs_[idx].backward(tape.inputs[idx], g, target, param_grads, has_bias(i));
    if (i > 0) g = std::move(dx);
  }
}

template <class T>
std::vector<nn::Parameter<T>*> Enhancer<T>::parameters() {
  std::vector<nn::Parameter<T>*> out;
  for (int i = 0; i < arch_.depth; ++i) {
    auto& c = convs_[static_cast<std::size_t>(i)];
    out.push_back(&c.weight);
    if (has_bias(i)) {
      out.push_back(&c.bias);
    } else {
      auto& bn = bns_[static_cast<std::size_t>(i - 1)];
      out.push_back(&bn.gamma);
      out.push_back(&bn.beta);
    }
  }
  return out;
}

template <class T>
std::vector<nn::StateEntry<T>> Enhancer<T>::state() {
  std::vector<nn::StateEntry<T>> out;
  for (auto* p : parameters()) out.push_back({p->name, &p->value});
  for (auto& bn : bns_) {
    out.push_back({bn.name + ".running_mean", &bn.running_mean});
    out.push_back({bn.name + ".running_var", &bn.running_var});
  }
  return out;
}

template class Enhancer<float>;
template class Enhancer<double>;

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

}  // namespace

ImageTensor residual_forward(Enhancer<float>& r, const ImageTensor& y) {
  return as_image(r.forward(as_batch(y), /*train=*/false));
}

ImageTensor enhance(Enhancer<float>& r, const ImageTensor& y) {
  const ImageTensor res = residual_forward(r, y);
  ImageTensor out(y.height(), y.width());
  for (std::size_t i = 0; i < out.numel(); ++i)
    out.data()[i] = std::clamp(y.data()[i] - res.data()[i], -1.0f, 1.0f);
  return out;
}

template <class T>
double residual_loss(const Tensor<T>& predicted, const Tensor<T>& degraded,
                     const Tensor<T>& clean) {
  if (!(predicted.shape() == degraded.shape()) || !(degraded.shape() == clean.shape()))
    fail_validation("enhance_loss shape mismatch: " + predicted.shape().str() + ", " +
                    degraded.shape().str() + ", " + clean.shape().str());
  require(predicted.n() >= 1, "enhance_loss needs a nonempty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.numel(); ++i) {
    const double d = static_cast<double>(predicted[i]) - (static_cast<double>(degraded[i]) - clean[i]);
    sum += d * d;
  }
  return sum / (2.0 * predicted.n());
}

template <class T>
double enhance_loss(Enhancer<T>& r, const Tensor<T>& degraded, const Tensor<T>& clean, bool train,
                    bool accumulate_grads) {
  EnhancerTape<T> tape;
  const Tensor<T> pred = r.forward(degraded, train, &tape);
  const double loss = residual_loss(pred, degraded, clean);
  if (accumulate_grads) {
    Tensor<T> d(pred.shape());
    const T scale = static_cast<T>(1.0 / pred.n());
    for (std::size_t i = 0; i < pred.numel(); ++i)
      d[i] = scale * (pred[i] - (degraded[i] - clean[i]));
    r.backward(tape, d, nullptr, /*param_grads=*/true);
  }
  return loss;
}

template double residual_loss<float>(const Tensor<float>&, const Tensor<float>&,
                                     const Tensor<float>&);
template double residual_loss<double>(const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&);
template double enhance_loss<float>(Enhancer<float>&, const Tensor<float>&, const Tensor<float>&,
                                    bool, bool);
template double enhance_loss<double>(Enhancer<double>&, const Tensor<double>&,
                                     const Tensor<double>&, bool, bool);

std::string_view to_string(PairSource s) {
  return s == PairSource::kSynthetic ? "synthetic" : "provided-pairs";
}

PairSource parse_pair_source(std::string_view name) {
  if (name == "synthetic") return PairSource::kSynthetic;
  if (name == "provided-pairs") return PairSource::kProvided;
  fail_validation("unknown pair source '" + std::string(name) +
                  "' (expected synthetic or provided-pairs)");
}

void EnhanceConfig::validate() const {
  require(epochs >= 0, "enhance.epochs must be >= 0");
  require(batch_size >= 1, "enhance.batch_size must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0,
          "enhance.learning_rate must be > 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "enhance.adam_beta1 must be in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "enhance.adam_beta2 must be in [0, 1)");
  require(pair_count >= 2, "enhance.pair_count must be >= 2");
  EnhancerArch{depth, width}.validate();
}

void save_enhancer(const fs::path& dir, Enhancer<float>& r, std::int64_t epoch, std::uint64_t seed,
                   const std::string& config_sha256) {
  wgan::CheckpointManifest m;
  m.kind = "enhancer";
  m.depth = r.arch().depth;
  m.width = r.arch().width;
  m.step = epoch;
  m.seed = seed;
  m.config_sha256 = config_sha256;
  wgan::save_checkpoint(dir, m, r.state());
}

Enhancer<float> load_enhancer(const fs::path& dir) {
  const wgan::CheckpointManifest m = wgan::read_manifest(dir);
  if (m.kind != "enhancer") fail_runtime(dir.string() + " is a " + m.kind + " checkpoint");
  EnhancerArch arch{m.depth, m.width};
  try {
    arch.validate();
  } catch (const ValidationError& e) {
    fail_runtime(dir.string() + ": invalid enhancer architecture: " + e.what());
  }
  Enhancer<float> r(arch);
  wgan::CheckpointManifest expected;
  expected.kind = "enhancer";
  expected.depth = arch.depth;
  expected.width = arch.width;
  wgan::load_checkpoint(dir, expected, r.state());
  return r;
}

std::vector<EnhanceHistoryRow> read_enhance_history(const fs::path& csv) {
  const CsvTable t = CsvTable::read(csv);
  const auto e = t.numeric_column("epoch");
  const auto l = t.numeric_column("mean_loss");
  std::vector<EnhanceHistoryRow> rows;
  for (std::size_t i = 0; i < e.size(); ++i) rows.push_back({static_cast<int>(e[i]), l[i]});
  return rows;
}

namespace {

void write_history(const fs::path& csv, const std::vector<EnhanceHistoryRow>& rows) {
  CsvTable t;
  t.header = {"epoch", "mean_loss"};
  for (const auto& r : rows) t.rows.push_back({std::to_string(r.epoch), format_real(r.mean_loss)});
  t.write(csv);
}

}  // namespace

EnhanceResult train_enhancer(const std::vector<TrainingPair>& pairs, const EnhanceConfig& config,
                             const fs::path& run_dir, const EnhanceTrainOptions& options) {
  config.validate();
  if (pairs.size() < 2) fail_validation("enhancer training needs at least 2 pairs");
  const Size2 size = pairs.front().clean.size();
  for (const auto& p : pairs)
    if (!(p.clean.size() == size) || !(p.degraded.size() == size))
      fail_validation("training pair '" + p.id + "' differs in size from the first pair");

  const fs::path ckpt = run_dir / "checkpoints" / "enhancer";
  const fs::path history_csv = run_dir / "history" / "enhance.csv";
  EnhanceResult result{Enhancer<float>(EnhancerArch{config.depth, config.width}), {}};
  Enhancer<float>& r = result.enhancer;
  Rng init_rng(derive_seed(config.seed, "enhance/init"));
  r.init(init_rng);
  nn::Adam<float> opt({config.learning_rate, config.adam_beta1, config.adam_beta2, 1e-8},
                      r.parameters());
  save_enhancer(ckpt, r, 0, config.seed, options.config_sha256);
  write_history(history_csv, result.history);

  Rng order_rng(derive_seed(config.seed, "enhance/shuffle"));
  std::vector<std::size_t> order(pairs.size());
  const std::size_t per = 3 * static_cast<std::size_t>(size.height) * size.width;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, order_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const int b = static_cast<int>(end - start);
      Tensor<float> degraded({b, 3, size.height, size.width});
      Tensor<float> clean({b, 3, size.height, size.width});
      for (int k = 0; k < b; ++k) {
        const auto& p = pairs[order[start + static_cast<std::size_t>(k)]];
        std::copy(p.degraded.data().begin(), p.degraded.data().end(), degraded.data() + k * per);
        std::copy(p.clean.data().begin(), p.clean.data().end(), clean.data() + k * per);
      }
      opt.zero_grad();
      const double loss = enhance_loss(r, degraded, clean, /*train=*/true, /*accumulate_grads=*/true);
      if (!std::isfinite(loss))
        fail_runtime(fmt::format("non-finite enhancer loss in epoch {}; last good checkpoint kept at {}",
                                 epoch, ckpt.string()));
      opt.step();
      total += loss * b;
    }
    const double mean = total / static_cast<double>(pairs.size());
    result.history.push_back({epoch, mean});
    write_history(history_csv, result.history);
    log_info(fmt::format("enhance epoch {}/{}: mean loss {:.6f}", epoch, config.epochs, mean));
  }
  save_enhancer(ckpt, r, config.epochs, config.seed, options.config_sha256);
  return result;
}

std::vector<TrainingPair> load_pairs(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail_runtime("pairs directory not found: " + dir.string());
  std::map<std::string, std::pair<fs::path, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    auto match = [&](const std::string& suffix) {
      return name.size() > suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (match("_clean.png"))
      found[name.substr(0, name.size() - 10)].first = entry.path();
    else if (match("_degraded.png"))
      found[name.substr(0, name.size() - 13)].second = entry.path();
  }
  std::vector<TrainingPair> pairs;
  for (const auto& [id, paths] : found) {
    if (paths.first.empty() || paths.second.empty()) {
      log_warning("pair '" + id + "' is incomplete, skipped");
      continue;
    }
    TrainingPair p{id, to_tensor(read_image(paths.first)), to_tensor(read_image(paths.second))};
    if (!(p.clean.size() == p.degraded.size()))
      fail_validation("pair '" + id + "': clean and degraded sizes differ");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace inpaint_lab::enhance

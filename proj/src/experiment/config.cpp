#include "experiment/config.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "common/error.hpp"
#include "common/fsutil.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"

namespace inpaint_lab::experiment {

using nlohmann::json;

namespace {

// Reads one JSON object section, recording every problem under its path.
class Section {
 public:
  Section(const json* obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (obj_ && !obj_->is_object()) {
      error(path_, "must be an object");
      obj_ = nullptr;
    }
  }

  ~Section() {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items())
      if (!known_.count(key)) error(child(key), "unknown key");
  }

  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  const json* sub(const std::string& key) {
    known_.insert(key);
    if (!obj_) return nullptr;
    const auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  double real(const std::string& key, double fallback, const std::function<bool(double)>& ok,
              const char* rule) {
    const json* v = sub(key);
    if (!v) return fallback;
    if (!v->is_number()) {
      error(child(key), "must be a number");
      return fallback;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d) || !ok(d)) {
      error(child(key), std::string("must be ") + rule + ", got " + v->dump());
      return fallback;
    }
    return d;
  }

  int integer(const std::string& key, int fallback, const std::function<bool(long long)>& ok,
              const char* rule) {
    const json* v = sub(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      error(child(key), "must be an integer");
      return fallback;
    }
    const long long i = v->is_number_unsigned() && v->get<std::uint64_t>() > INT32_MAX
                            ? static_cast<long long>(INT32_MAX) + 1
                            : v->get<long long>();
    if (i < INT32_MIN || i > INT32_MAX || !ok(i)) {
      error(child(key), std::string("must be ") + rule + ", got " + v->dump());
      return fallback;
    }
    return static_cast<int>(i);
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const json* v = sub(key);
    if (!v) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<long long>() >= 0)
      return static_cast<std::uint64_t>(v->get<long long>());
    error(child(key), "must be a non-negative integer");
    return fallback;
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = sub(key);
    if (!v) return fallback;
    if (!v->is_string()) {
      error(child(key), "must be a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  // Enum stored as string; `parse` throws ValidationError on unknown names.
  template <class E, class Parse>
  E choice(const std::string& key, E fallback, Parse parse) {
    const json* v = sub(key);
    if (!v) return fallback;
    if (!v->is_string()) {
      error(child(key), "must be a string");
      return fallback;
    }
    try {
      return parse(v->get<std::string>());
    } catch (const ValidationError& e) {
      error(child(key), e.what());
      return fallback;
    }
  }

  void error(const std::string& path, const std::string& msg) {
    errors_.push_back((path.empty() ? std::string("<root>") : path) + ": " + msg);
  }

 private:
  const json* obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

const auto any_real = [](double) { return true; };
const auto positive = [](double v) { return v > 0.0; };
const auto non_negative = [](double v) { return v >= 0.0; };
const auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
const auto beta_range = [](double v) { return v >= 0.0 && v < 1.0; };
const auto at_least = [](long long lo) { return [lo](long long v) { return v >= lo; }; };

std::string_view to_string(DataSource s) { return s == DataSource::kSynthetic ? "synthetic" : "directory"; }

DataSource parse_data_source(std::string_view name) {
  if (name == "synthetic") return DataSource::kSynthetic;
  if (name == "directory") return DataSource::kDirectory;
  fail_validation("unknown data source '" + std::string(name) + "' (expected synthetic or directory)");
}

}  // namespace

ExperimentConfig validate_config(const json& doc) {
  std::vector<std::string> errors;
  ExperimentConfig c;
  {
    Section root(&doc, "", errors);
    c.seed = root.seed("seed", 0);
    auto seed_for = [&](Section& s, const char* name) {
      return s.seed("seed", derive_seed(c.seed, name));
    };

    {
      Section s(root.sub("data"), "data", errors);
      c.data.source = s.choice("source", DataSource::kSynthetic, parse_data_source);
      c.data.path = s.string("path", "");
      c.data.image_size = s.integer(
          "image_size", 32,
          [](long long v) { return v >= 8 && v <= 4096 && std::has_single_bit(static_cast<unsigned>(v)); },
          "a power of two in [8, 4096]");
      c.data.split_fraction = s.real("split_fraction", 0.9, open_unit, "in (0, 1)");
      c.data.count = s.integer("count", 284, at_least(2), ">= 2");
      c.data.seed = seed_for(s, "data");
      if (c.data.source == DataSource::kDirectory && c.data.path.empty())
        s.error("data.path", "required when data.source is directory");
    }
    {
      Section s(root.sub("mask"), "mask", errors);
      c.mask.kind = s.choice("kind", data::MaskKind::kCenterBox, data::parse_mask_kind);
      c.mask.fraction = s.real("fraction", 0.25, open_unit, "in (0, 1)");
      c.mask.seed = seed_for(s, "mask");
    }
    {
      Section s(root.sub("gan"), "gan", errors);
      auto& g = c.gan;
      g.lambda_gp = s.real("lambda_gp", 10.0, positive, "> 0");
      g.n_critic = s.integer("n_critic", 5, at_least(1), ">= 1");
      g.batch_size = s.integer("batch_size", 64, at_least(1), ">= 1");
      g.learning_rate = s.real("learning_rate", 1e-4, positive, "> 0");
      g.adam_beta1 = s.real("adam_beta1", 0.5, beta_range, "in [0, 1)");
      g.adam_beta2 = s.real("adam_beta2", 0.9, beta_range, "in [0, 1)");
      g.total_steps = s.integer("total_steps", 2000, at_least(0), ">= 0");
      g.checkpoint_interval = s.integer("checkpoint_interval", 500, at_least(1), ">= 1");
      g.z_dim = s.integer("z_dim", 100, at_least(1), ">= 1");
      g.base_width = s.integer("base_width", 32, at_least(1), ">= 1");
      g.leaky_slope = s.real("leaky_slope", 0.2, [](double v) { return v > 0.0 && v <= 1.0; },
                             "in (0, 1]");
      g.penalty_sampling = s.choice("penalty_sampling", wgan::PenaltySampling::kInterpolate,
                                    wgan::parse_penalty_sampling);
      g.seed = seed_for(s, "gan");
    }
    {
      Section s(root.sub("inpaint"), "inpaint", errors);
      auto& p = c.inpaint;
      p.q = s.real("q", 0.1, non_negative, ">= 0");
      p.iterations = s.integer("iterations", 1500, at_least(1), ">= 1");
      p.learning_rate = s.real("learning_rate", 0.03, non_negative, ">= 0");
      p.adam_beta1 = s.real("adam_beta1", 0.9, beta_range, "in [0, 1)");
      p.adam_beta2 = s.real("adam_beta2", 0.999, beta_range, "in [0, 1)");
      p.z_clip = s.real("z_clip", 1.0, positive, "> 0");
      p.restarts = s.integer("restarts", 1, at_least(1), ">= 1");
      p.perceptual_mode = s.choice("perceptual_mode", inpaint::PerceptualMode::kLogSigmoid,
                                   inpaint::parse_perceptual_mode);
      c.inpaint_max_images = s.integer("max_images", 20, at_least(0), ">= 0");
      p.seed = seed_for(s, "inpaint");
    }
    {
      Section s(root.sub("enhance"), "enhance", errors);
      auto& e = c.enhance;
      e.epochs = s.integer("epochs", 50, at_least(0), ">= 0");
      e.batch_size = s.integer("batch_size", 32, at_least(1), ">= 1");
      e.learning_rate = s.real("learning_rate", 1e-3, positive, "> 0");
      e.adam_beta1 = s.real("adam_beta1", 0.9, beta_range, "in [0, 1)");
      e.adam_beta2 = s.real("adam_beta2", 0.999, beta_range, "in [0, 1)");
      e.depth = s.integer("depth", 10, at_least(2), ">= 2");
      e.width = s.integer("width", 64, at_least(1), ">= 1");
      e.pair_count = s.integer("pair_count", 500, at_least(2), ">= 2");
      e.pair_source = s.choice("pair_source", enhance::PairSource::kSynthetic,
                               enhance::parse_pair_source);
      e.pairs_dir = s.string("pairs_dir", "");
      e.seed = seed_for(s, "enhance");
      if (e.pair_source == enhance::PairSource::kProvided && e.pairs_dir.empty())
        s.error("enhance.pairs_dir", "required when enhance.pair_source is provided-pairs");
      {
        Section d(s.sub("degradation"), "enhance.degradation", errors);
        auto& g = c.degradation;
        g.noise_sigma = d.real("noise_sigma", 0.1, non_negative, ">= 0");
        g.blur_sigma = d.real("blur_sigma", 1.0, non_negative, ">= 0");
        g.blur_kernel_size = d.integer(
            "blur_kernel_size", 5, [](long long v) { return v >= 1 && v % 2 == 1; },
            "odd and >= 1");
        g.seed = d.seed("seed", derive_seed(c.seed, "enhance/degradation"));
      }
    }
    {
      Section s(root.sub("metrics"), "metrics", errors);
      auto& m = c.ssim;
      m.alpha = s.real("alpha", 1.0, positive, "> 0");
      m.beta = s.real("beta", 1.0, positive, "> 0");
      m.gamma = s.real("gamma", 1.0, positive, "> 0");
      m.k1 = s.real("k1", 0.01, positive, "> 0");
      m.k2 = s.real("k2", 0.03, positive, "> 0");
      m.window = s.integer("window", 11, [](long long v) { return v >= 1 && v % 2 == 1; },
                           "odd and >= 1");
      m.sigma = s.real("sigma", 1.5, positive, "> 0");
      m.dynamic_range = s.real("dynamic_range", 255.0, positive, "> 0");
      (void)any_real;
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid config (" + std::to_string(errors.size()) + " problem" +
                      (errors.size() == 1 ? "" : "s") + "):";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ValidationError(msg);
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["data"] = {{"source", to_string(data.source)},
               {"path", data.path},
               {"image_size", data.image_size},
               {"split_fraction", data.split_fraction},
               {"count", data.count},
               {"seed", data.seed}};
  j["mask"] = {{"kind", data::to_string(mask.kind)}, {"fraction", mask.fraction}, {"seed", mask.seed}};
  j["gan"] = {{"lambda_gp", gan.lambda_gp},
              {"n_critic", gan.n_critic},
              {"batch_size", gan.batch_size},
              {"learning_rate", gan.learning_rate},
              {"adam_beta1", gan.adam_beta1},
              {"adam_beta2", gan.adam_beta2},
              {"total_steps", gan.total_steps},
              {"checkpoint_interval", gan.checkpoint_interval},
              {"z_dim", gan.z_dim},
              {"base_width", gan.base_width},
              {"leaky_slope", gan.leaky_slope},
              {"penalty_sampling", wgan::to_string(gan.penalty_sampling)},
              {"seed", gan.seed}};
  j["inpaint"] = {{"q", inpaint.q},
                  {"iterations", inpaint.iterations},
                  {"learning_rate", inpaint.learning_rate},
                  {"adam_beta1", inpaint.adam_beta1},
                  {"adam_beta2", inpaint.adam_beta2},
                  {"z_clip", inpaint.z_clip},
                  {"restarts", inpaint.restarts},
                  {"perceptual_mode", inpaint::to_string(inpaint.perceptual_mode)},
                  {"max_images", inpaint_max_images},
                  {"seed", inpaint.seed}};
  j["enhance"] = {{"epochs", enhance.epochs},
                  {"batch_size", enhance.batch_size},
                  {"learning_rate", enhance.learning_rate},
                  {"adam_beta1", enhance.adam_beta1},
                  {"adam_beta2", enhance.adam_beta2},
                  {"depth", enhance.depth},
                  {"width", enhance.width},
                  {"pair_count", enhance.pair_count},
                  {"pair_source", enhance::to_string(enhance.pair_source)},
                  {"pairs_dir", enhance.pairs_dir},
                  {"seed", enhance.seed},
                  {"degradation",
                   {{"noise_sigma", degradation.noise_sigma},
                    {"blur_sigma", degradation.blur_sigma},
                    {"blur_kernel_size", degradation.blur_kernel_size},
                    {"seed", degradation.seed}}}};
  j["metrics"] = {{"alpha", ssim.alpha}, {"beta", ssim.beta},   {"gamma", ssim.gamma},
                  {"k1", ssim.k1},       {"k2", ssim.k2},       {"window", ssim.window},
                  {"sigma", ssim.sigma}, {"dynamic_range", ssim.dynamic_range}};
  return j;
}

std::string ExperimentConfig::sha256() const { return sha256_hex(to_json().dump()); }

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset -> line/column (1-based) of the offending character.
    const std::size_t pos = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto colon = what.find("syntax error");
    if (colon != std::string::npos) what = what.substr(colon);
    fail_validation(fmt::format("{}:{}:{}: malformed JSON: {}", source, line, col, what));
  }
}

ExperimentConfig load_config(const fs::path& path, const std::uint64_t* seed_override) {
  if (!fs::exists(path)) fail_validation("config file not found: " + path.string());
  json doc = parse_json_text(read_file(path), path.string());
  if (seed_override) {
    if (!doc.is_object()) fail_validation(path.string() + ": config must be a JSON object");
    doc["seed"] = *seed_override;
  }
  return validate_config(doc);
}

}  // namespace inpaint_lab::experiment

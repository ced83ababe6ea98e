#include "experiment/run.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "data/degrade.hpp"
#include "data/mask.hpp"
#include "enhance/enhancer.hpp"
#include "image/codec.hpp"
#include "inpaint/inpaint.hpp"
#include "nn/blas.hpp"
#include "wgan/checkpoint.hpp"
#include "wgan/trainer.hpp"

namespace inpaint_lab::experiment {

using nlohmann::json;

namespace {

std::optional<fs::path> env_root() {
  const char* v = std::getenv(kRunRootEnv);
  if (!v || !*v) return std::nullopt;
  return fs::path(v);
}

json read_json(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) fail_validation(path.string() + " not found; " + hint);
  return parse_json_text(read_file(path), path.string());
}

std::vector<data::Sample> read_samples(const fs::path& dir, const json& ids) {
  std::vector<data::Sample> out;
  for (const auto& id : ids) {
    const std::string s = id.get<std::string>();
    out.push_back({s, to_tensor(read_image(dir / (s + ".png")))});
  }
  return out;
}

double u8_psnr(const ImageTensor& a, const ImageTensor& b) {
  return metrics::psnr(to_u8(a), to_u8(b));
}

}  // namespace

fs::path resolve_run_dir(const std::optional<fs::path>& explicit_dir, const std::string& config_hash) {
  const auto root = env_root();
  if (explicit_dir) {
    if (explicit_dir->is_relative() && root) return *root / *explicit_dir;
    return *explicit_dir;
  }
  return root.value_or(fs::path("runs")) / config_hash.substr(0, 12);
}

Run::Run(ExperimentConfig config, fs::path dir)
    : config_(std::move(config)), hash_(config_.sha256()), dir_(std::move(dir)) {}

Run Run::open(const OpenOptions& options) {
  nn::init_compute_runtime();
  const std::uint64_t* seed = options.seed ? &*options.seed : nullptr;
  ExperimentConfig cfg;
  fs::path dir;
  if (options.config_path) {
    cfg = load_config(*options.config_path, seed);
    dir = resolve_run_dir(options.run_dir, cfg.sha256());
  } else {
    if (!options.run_dir) fail_validation("either --config or --run-dir is required");
    dir = resolve_run_dir(options.run_dir, "");
    const fs::path stored = dir / "config.json";
    if (!fs::exists(stored))
      fail_validation("no --config given and " + stored.string() + " does not exist");
    cfg = load_config(stored, seed);
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail_runtime("cannot create run directory " + dir.string() + ": " + ec.message());
  Run run(std::move(cfg), dir);
  run.lock_ = std::make_unique<RunDirLock>(dir);

  const fs::path stored = dir / "config.json";
  if (fs::exists(stored)) {
    const ExperimentConfig existing =
        validate_config(parse_json_text(read_file(stored), stored.string()));
    if (existing.sha256() != run.hash_)
      fail_validation(fmt::format("run directory {} belongs to config {} but this invocation has {}",
                                  dir.string(), existing.sha256().substr(0, 12),
                                  run.hash_.substr(0, 12)));
  } else {
    write_file_atomic(stored, run.config_.to_json().dump(2) + "\n");
  }
  return run;
}

SplitImages prepare_data(Run& run) {
  const DataConfig& d = run.config().data;
  const Size2 size{d.image_size, d.image_size};
  data::DatasetSplit split =
      d.source == DataSource::kSynthetic
          ? data::generate_synthetic_dataset(static_cast<std::size_t>(d.count), size, d.seed,
                                             d.split_fraction)
          : data::load_dataset(d.path, size, d.split_fraction, d.seed);

  json ids_train = json::array(), ids_test = json::array();
  for (const auto& s : split.train) {
    write_png(run.path("data/train") / (s.id + ".png"), to_u8(s.image));
    ids_train.push_back(s.id);
  }
  for (const auto& s : split.test) {
    write_png(run.path("data/test") / (s.id + ".png"), to_u8(s.image));
    ids_test.push_back(s.id);
  }
  json j;
  j["source"] = d.source == DataSource::kSynthetic ? "synthetic" : d.path;
  j["seed"] = d.seed;
  j["image_size"] = d.image_size;
  j["train"] = ids_train;
  j["test"] = ids_test;
  j["candidates"] = split.report.candidates;
  j["skipped"] = split.report.skipped;
  j["config_sha256"] = run.config_hash();
  write_file_atomic(run.path("data/split.json"), j.dump(2) + "\n");
  log_info(fmt::format("prepared {} train / {} test images", split.train.size(), split.test.size()));
  return {std::move(split.train), std::move(split.test)};
}

SplitImages load_split(const Run& run) {
  const json j = read_json(run.path("data/split.json"), "run prepare-data first");
  SplitImages s;
  try {
    s.train = read_samples(run.path("data/train"), j.at("train"));
    s.test = read_samples(run.path("data/test"), j.at("test"));
  } catch (const json::exception& e) {
    fail_validation("malformed data/split.json: " + std::string(e.what()));
  }
  return s;
}

std::vector<MaskEntry> make_masks(Run& run) {
  const SplitImages split = load_split(run);
  const data::MaskSpec& spec = run.config().mask;
  json entries = json::array();
  std::vector<MaskEntry> out;
  for (const auto& s : split.test) {
    data::MaskSpec per = spec;
    per.seed = derive_seed(spec.seed, "mask/" + s.id);
    const BinaryMask m = data::generate_mask(per, s.image.size());
    MaskEntry e{s.id, fs::path("data/test") / (s.id + ".png"), fs::path("masks") / (s.id + ".png")};
    write_mask_png(run.path(e.mask), m);
    entries.push_back({{"id", e.id},
                       {"image", e.image.generic_string()},
                       {"mask", e.mask.generic_string()},
                       {"corrupted_pixels", m.count_zeros()}});
    out.push_back(std::move(e));
  }
  json j;
  j["kind"] = data::to_string(spec.kind);
  j["fraction"] = spec.fraction;
  j["seed"] = spec.seed;
  j["entries"] = entries;
  write_file_atomic(run.path("masks/manifest.json"), j.dump(2) + "\n");
  log_info(fmt::format("wrote {} masks ({})", out.size(), data::to_string(spec.kind)));
  return out;
}

std::vector<MaskEntry> read_mask_manifest(const fs::path& manifest) {
  const json j = read_json(manifest, "run make-masks first");
  std::vector<MaskEntry> out;
  try {
    for (const auto& e : j.at("entries"))
      out.push_back({e.at("id").get<std::string>(), e.at("image").get<std::string>(),
                     e.at("mask").get<std::string>()});
  } catch (const json::exception& e) {
    fail_validation(manifest.string() + ": malformed manifest: " + e.what());
  }
  if (out.empty()) fail_validation(manifest.string() + ": no entries");
  return out;
}

void train_gan(Run& run, bool resume) {
  const SplitImages split = load_split(run);
  std::vector<ImageTensor> images;
  images.reserve(split.train.size());
  for (const auto& s : split.train) images.push_back(s.image);
  wgan::GanTrainOptions opt;
  opt.config_sha256 = run.config_hash();
  opt.resume = resume;
  wgan::train_gan(images, run.config().gan, run.dir(), opt);
}

std::vector<HeldOutRow> train_enhance(Run& run) {
  const ExperimentConfig& cfg = run.config();
  const SplitImages split = load_split(run);
  std::vector<enhance::TrainingPair> pairs;
  if (cfg.enhance.pair_source == enhance::PairSource::kSynthetic) {
    const std::size_t n = split.train.size();
    for (int i = 0; i < cfg.enhance.pair_count; ++i) {
      const auto& clean = split.train[static_cast<std::size_t>(i) % n].image;
      data::DegradationSpec spec = cfg.degradation;
      spec.seed = derive_seed(cfg.degradation.seed, fmt::format("pair/{}", i));
      pairs.push_back({fmt::format("pair_{:05d}", i), clean,
                       data::synthesize_degraded_pair(clean, spec).degraded});
    }
  } else {
    pairs = enhance::load_pairs(cfg.enhance.pairs_dir);
  }

  enhance::EnhanceTrainOptions opt;
  opt.config_sha256 = run.config_hash();
  enhance::EnhanceResult res = enhance::train_enhancer(pairs, cfg.enhance, run.dir(), opt);

  // Held-out check on the test split, degraded the same way.
  std::vector<HeldOutRow> rows;
  CsvTable t;
  t.header = {"id", "psnr_degraded", "psnr_enhanced"};
  for (const auto& s : split.test) {
    data::DegradationSpec spec = cfg.degradation;
    spec.seed = derive_seed(cfg.degradation.seed, "heldout/" + s.id);
    const ImageTensor degraded = data::synthesize_degraded_pair(s.image, spec).degraded;
    const ImageTensor restored = enhance::enhance(res.enhancer, degraded);
    HeldOutRow r{s.id, u8_psnr(s.image, degraded), u8_psnr(s.image, restored)};
    t.rows.push_back({r.id, format_real(r.psnr_degraded), format_real(r.psnr_enhanced)});
    rows.push_back(std::move(r));
  }
  t.write(run.path("report/enhance_heldout.csv"));
  return rows;
}

std::vector<InpaintRow> inpaint_batch(Run& run, const std::optional<fs::path>& manifest,
                                      bool use_enhancer) {
  const ExperimentConfig& cfg = run.config();
  std::vector<MaskEntry> entries =
      read_mask_manifest(manifest.value_or(run.path("masks/manifest.json")));
  if (cfg.inpaint_max_images > 0 &&
      entries.size() > static_cast<std::size_t>(cfg.inpaint_max_images))
    entries.resize(static_cast<std::size_t>(cfg.inpaint_max_images));

  const fs::path ck = run.path("checkpoints");
  if (!fs::exists(ck / "generator" / "manifest.json"))
    fail_validation("no generator checkpoint under " + ck.string() + "; run train-gan first");
  wgan::Generator<float> g = wgan::load_generator(ck / "generator");
  wgan::Critic<float> c = wgan::load_critic(ck / "critic");
  std::optional<enhance::Enhancer<float>> enh;
  if (use_enhancer) {
    if (fs::exists(ck / "enhancer" / "manifest.json"))
      enh.emplace(enhance::load_enhancer(ck / "enhancer"));
    else
      log_warning("no enhancer checkpoint; writing unenhanced completions");
  }

  std::vector<InpaintRow> rows;
  CsvTable t;
  t.header = {"id", "image", "mask", "initial_total", "final_total", "best_restart", "enhanced"};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const MaskEntry& e = entries[i];
    const ImageTensor original = to_tensor(read_image(run.path(e.image)));
    const BinaryMask mask = read_mask_png(run.path(e.mask));
    if (!(mask.size() == original.size()))
      fail_validation(fmt::format("{}: mask {}x{} does not match image {}x{}", e.id, mask.height(),
                                  mask.width(), original.height(), original.width()));
    const ImageTensor y = data::apply_mask(original, mask);
    inpaint::InpaintConfig ic = cfg.inpaint;
    ic.seed = derive_seed(cfg.inpaint.seed, "image/" + e.id);
    const inpaint::CompletedImage done =
        inpaint::inpaint_image(g, c, enh ? &*enh : nullptr, y, mask, ic);
    const fs::path out = run.path("results") / e.id;
    write_png(out / "masked.png", to_u8(y));
    inpaint::write_outputs(out, done);

    InpaintRow r{e.id, done.result.initial_loss.total, done.result.final_loss.total,
                 done.result.best_restart};
    log_info(fmt::format("inpaint {}/{} {}: total {:.4f} -> {:.4f}", i + 1, entries.size(), e.id,
                         r.initial_total, r.final_total));
    t.rows.push_back({r.id, e.image.generic_string(), e.mask.generic_string(),
                      format_real(r.initial_total), format_real(r.final_total),
                      std::to_string(r.best_restart), enh ? "1" : "0"});
    rows.push_back(std::move(r));
  }
  t.write(run.path("results/summary.csv"));
  return rows;
}

EvaluationReports evaluate(Run& run) {
  const fs::path summary = run.path("results/summary.csv");
  if (!fs::exists(summary)) fail_validation(summary.string() + " not found; run inpaint first");
  const CsvTable t = CsvTable::read(summary);
  const std::size_t ci = t.column("id"), cimg = t.column("image"), cm = t.column("mask");
  if (t.rows.empty()) fail_validation(summary.string() + ": no completed images");

  std::vector<metrics::NamedImage> originals, finals, raws, zero;
  for (const auto& row : t.rows) {
    const std::string& id = row[ci];
    const ImageU8 orig = read_image(run.path(row[cimg]));
    const BinaryMask mask = read_mask_png(run.path(row[cm]));
    originals.push_back({id, orig});
    finals.push_back({id, read_image(run.path("results") / id / "final.png")});
    raws.push_back({id, read_image(run.path("results") / id / "raw.png")});
    zero.push_back({id, to_u8(data::apply_mask(to_tensor(orig), mask))});
  }

  const metrics::SsimParams& p = run.config().ssim;
  auto finish = [&](std::vector<metrics::NamedImage>& other, const std::string& src,
                    const std::string& stem) {
    metrics::MetricsReport r = metrics::evaluate_set(originals, other, p);
    r.originals_source = run.path("results/summary.csv").string() + " (image column)";
    r.completed_source = src;
    r.config_sha256 = run.config_hash();
    r.write(run.path("report") / (stem + ".csv"), run.path("report") / (stem + ".json"));
    return r;
  };
  EvaluationReports out;
  out.completed = finish(finals, run.path("results").string() + "/<id>/final.png", "metrics");
  out.raw = finish(raws, run.path("results").string() + "/<id>/raw.png", "raw_metrics");
  out.zero_fill = finish(zero, "masked input, hole filled with 0", "zero_fill_metrics");
  log_info(fmt::format("mean PSNR {:.3f} dB (zero-fill {:.3f}), mean SSIM {:.4f}",
                       out.completed.psnr_db.mean, out.zero_fill.psnr_db.mean,
                       out.completed.ssim.mean));
  return out;
}

std::vector<fs::path> plot_all(Run& run) {
  std::vector<fs::path> out;
  const fs::path plots = run.path("plots");
  if (fs::exists(run.path("history/gan.csv")))
    out.push_back(emit_plot(run.path("history/gan.csv"), plots / "gan_loss.png", PlotKind::kGanLoss));
  if (fs::exists(run.path("history/enhance.csv")))
    out.push_back(emit_plot(run.path("history/enhance.csv"), plots / "enhance_loss.png",
                            PlotKind::kEnhanceLoss));
  if (fs::exists(run.path("results"))) {
    std::vector<fs::path> traces;
    for (const auto& e : fs::directory_iterator(run.path("results")))
      if (e.is_directory() && fs::exists(e.path() / "trace.csv")) traces.push_back(e.path());
    std::sort(traces.begin(), traces.end());
    for (const auto& d : traces)
      out.push_back(emit_plot(d / "trace.csv",
                              plots / ("inpaint_trace_" + d.filename().string() + ".png"),
                              PlotKind::kInpaintTrace));
  }
  if (out.empty()) fail_validation("nothing to plot under " + run.dir().string());
  return out;
}

}  // namespace inpaint_lab::experiment

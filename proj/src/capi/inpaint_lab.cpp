#include "inpaint_lab/inpaint_lab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "common/error.hpp"
#include "experiment/config.hpp"
#include "experiment/plot.hpp"
#include "experiment/run.hpp"
#include "metrics/metrics.hpp"
#include "nn/blas.hpp"

struct il_run {
  inpaint_lab::experiment::Run run;
  std::string dir;
};

namespace {

using namespace inpaint_lab;

thread_local std::string g_last_error;

template <class F>
il_status guarded(F&& f) {
  g_last_error.clear();
  try {
    nn::init_compute_runtime();
    f();
    return IL_OK;
  } catch (const ValidationError& e) {
    g_last_error = e.what();
    return IL_ERR_VALIDATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return IL_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return IL_ERR_RUNTIME;
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) fail_validation(std::string(what) + " must not be NULL");
}

ImageU8 wrap(const uint8_t* data, int h, int w) {
  require(h > 0 && w > 0, "image dimensions must be positive");
  ImageU8 img(h, w);
  std::memcpy(img.data().data(), data, img.data().size());
  return img;
}

}  // namespace

extern "C" {

const char* il_version(void) { return "0.1.0"; }

const char* il_last_error(void) { return g_last_error.c_str(); }

void il_free_string(char* s) { std::free(s); }

il_status il_validate_config(const char* config_path, const uint64_t* seed, char** normalized_json) {
  return guarded([&] {
    need(config_path, "config_path");
    need(normalized_json, "normalized_json");
    *normalized_json = nullptr;
    const auto cfg = experiment::load_config(config_path, seed);
    *normalized_json = dup_string(cfg.to_json().dump(2));
  });
}

il_status il_run_open(const char* config_path, const char* run_dir, const uint64_t* seed,
                      il_run** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    experiment::OpenOptions o;
    if (config_path) o.config_path = config_path;
    if (run_dir) o.run_dir = run_dir;
    if (seed) o.seed = *seed;
    experiment::Run run = experiment::Run::open(o);
    std::string dir = run.dir().string();
    *out = new il_run{std::move(run), std::move(dir)};
  });
}

void il_run_close(il_run* run) { delete run; }

const char* il_run_dir(const il_run* run) { return run ? run->dir.c_str() : ""; }

const char* il_run_config_hash(const il_run* run) {
  return run ? run->run.config_hash().c_str() : "";
}

il_status il_prepare_data(il_run* run) {
  return guarded([&] {
    need(run, "run");
    experiment::prepare_data(run->run);
  });
}

il_status il_make_masks(il_run* run) {
  return guarded([&] {
    need(run, "run");
    experiment::make_masks(run->run);
  });
}

il_status il_train_gan(il_run* run, int resume) {
  return guarded([&] {
    need(run, "run");
    experiment::train_gan(run->run, resume != 0);
  });
}

il_status il_train_enhance(il_run* run) {
  return guarded([&] {
    need(run, "run");
    experiment::train_enhance(run->run);
  });
}

il_status il_inpaint(il_run* run, const char* manifest, int use_enhancer) {
  return guarded([&] {
    need(run, "run");
    std::optional<std::filesystem::path> m;
    if (manifest) m = manifest;
    experiment::inpaint_batch(run->run, m, use_enhancer != 0);
  });
}

il_status il_evaluate(il_run* run) {
  return guarded([&] {
    need(run, "run");
    experiment::evaluate(run->run);
  });
}

il_status il_plot(il_run* run) {
  return guarded([&] {
    need(run, "run");
    experiment::plot_all(run->run);
  });
}

il_status il_emit_plot(const char* csv_path, const char* out_png, il_plot_kind kind) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(out_png, "out_png");
    experiment::PlotKind k;
    switch (kind) {
      case IL_PLOT_GAN_LOSS: k = experiment::PlotKind::kGanLoss; break;
      case IL_PLOT_ENHANCE_LOSS: k = experiment::PlotKind::kEnhanceLoss; break;
      case IL_PLOT_INPAINT_TRACE: k = experiment::PlotKind::kInpaintTrace; break;
      default: fail_validation("unknown plot kind " + std::to_string(static_cast<int>(kind)));
    }
    experiment::emit_plot(csv_path, out_png, k);
  });
}

il_status il_parse_plot_kind(const char* name, il_plot_kind* out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = static_cast<il_plot_kind>(experiment::parse_plot_kind(name));
  });
}

il_status il_psnr(const uint8_t* a, const uint8_t* b, int height, int width, double* out_db) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out_db, "out_db");
    *out_db = metrics::psnr(wrap(a, height, width), wrap(b, height, width));
  });
}

il_status il_ssim(const uint8_t* a, const uint8_t* b, int height, int width, double* out) {
  return guarded([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    *out = metrics::ssim(wrap(a, height, width), wrap(b, height, width), {});
  });
}

}  // extern "C"

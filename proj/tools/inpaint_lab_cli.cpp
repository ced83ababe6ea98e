// Command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "inpaint_lab/inpaint_lab.h"

namespace {

struct Common {
  std::string config;
  std::string run_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)");
  cmd->add_option("--run-dir", c.run_dir, "run directory (default: $INPAINT_LAB_RUN_ROOT/<hash>)");
  cmd->add_option("--seed", c.seed, "overrides the config's top-level seed");
}

int report(il_status st) {
  if (st != IL_OK) std::fprintf(stderr, "error: %s\n", il_last_error());
  return static_cast<int>(st);
}

template <class F>
int with_run(const Common& c, F&& f) {
  il_run* run = nullptr;
  const std::uint64_t* seed = c.seed ? &*c.seed : nullptr;
  il_status st = il_run_open(c.config.empty() ? nullptr : c.config.c_str(),
                             c.run_dir.empty() ? nullptr : c.run_dir.c_str(), seed, &run);
  if (st != IL_OK) return report(st);
  st = f(run);
  if (st == IL_OK) std::printf("%s\n", il_run_dir(run));
  il_run_close(run);
  return report(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic image completion: WGAN-GP prior, latent search, residual enhancer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(il_version()));

  Common common;
  auto* prepare = app.add_subcommand("prepare-data", "build the train/test split");
  auto* masks = app.add_subcommand("make-masks", "generate masks for the test images");
  auto* gan = app.add_subcommand("train-gan", "train the WGAN-GP generator and critic");
  auto* enh = app.add_subcommand("train-enhance", "train the residual enhancement network");
  auto* inp = app.add_subcommand("inpaint", "complete masked test images");
  auto* eval = app.add_subcommand("evaluate", "PSNR/SSIM of completions against originals");
  auto* plot = app.add_subcommand("plot", "loss plots with machine-readable summaries");
  for (auto* cmd : {prepare, masks, gan, enh, inp, eval, plot}) add_common(cmd, common);

  bool resume = false;
  gan->add_flag("--resume", resume, "continue from the last checkpoint");
  std::string manifest;
  bool no_enhance = false;
  inp->add_option("--manifest", manifest, "mask manifest (default: <run>/masks/manifest.json)");
  inp->add_flag("--no-enhance", no_enhance, "skip the enhancement network");
  std::string kind, input, output;
  plot->add_option("--kind", kind, "gan-loss | enhance-loss | inpaint-trace");
  plot->add_option("--input", input, "CSV to plot (with --kind and --output)");
  plot->add_option("--output", output, "PNG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
    return 1;
  }

  if (*prepare) return with_run(common, [](il_run* r) { return il_prepare_data(r); });
  if (*masks) return with_run(common, [](il_run* r) { return il_make_masks(r); });
  if (*gan) return with_run(common, [&](il_run* r) { return il_train_gan(r, resume ? 1 : 0); });
  if (*enh) return with_run(common, [](il_run* r) { return il_train_enhance(r); });
  if (*inp)
    return with_run(common, [&](il_run* r) {
      return il_inpaint(r, manifest.empty() ? nullptr : manifest.c_str(), no_enhance ? 0 : 1);
    });
  if (*eval) return with_run(common, [](il_run* r) { return il_evaluate(r); });

  // plot
  if (!input.empty() || !output.empty() || !kind.empty()) {
    if (input.empty() || output.empty() || kind.empty()) {
      std::fprintf(stderr, "error: --input, --output and --kind go together\n\n%s",
                   plot->help().c_str());
      return 1;
    }
    il_plot_kind k;
    il_status st = il_parse_plot_kind(kind.c_str(), &k);
    if (st == IL_OK) st = il_emit_plot(input.c_str(), output.c_str(), k);
    return report(st);
  }
  return with_run(common, [](il_run* r) { return il_plot(r); });
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/fsutil.hpp"
#include "common/rng.hpp"
#include "experiment/config.hpp"
#include "experiment/plot.hpp"
#include "experiment/run.hpp"

using namespace inpaint_lab;
using namespace inpaint_lab::experiment;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inpaint_lab_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string error_of(const json& doc) {
  try {
    validate_config(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

// Small enough to run the whole pipeline in a few seconds.
json tiny_doc() {
  return json::parse(R"({
    "seed": 5,
    "data": {"image_size": 8, "count": 12, "split_fraction": 0.75},
    "gan": {"total_steps": 3, "batch_size": 4, "n_critic": 2, "z_dim": 4, "base_width": 2,
            "checkpoint_interval": 2},
    "inpaint": {"iterations": 6, "max_images": 2},
    "enhance": {"epochs": 2, "batch_size": 4, "depth": 3, "width": 4, "pair_count": 8,
                "degradation": {"blur_kernel_size": 3}},
    "metrics": {"window": 7}
  })");
}

fs::path write_config(const fs::path& dir, const json& doc, const std::string& name = "c.json") {
  write_file_atomic(dir / name, doc.dump(2));
  return dir / name;
}

}  // namespace

TEST_CASE("empty config is fully defaulted") {
  const ExperimentConfig c = validate_config(json::object());
  CHECK(c.gan.lambda_gp == 10.0);
  CHECK(c.gan.n_critic == 5);
  CHECK(c.inpaint.q == 0.1);
  CHECK(c.inpaint.iterations == 1500);
  CHECK(c.enhance.depth == 10);
  CHECK(c.ssim.window == 11);
  CHECK(c.mask.kind == data::MaskKind::kCenterBox);
  const json j = c.to_json();
  for (const char* k : {"seed", "data", "mask", "gan", "inpaint", "enhance", "metrics"}) CHECK(j.contains(k));
  CHECK(j["gan"]["seed"] == derive_seed(0, "gan"));
  CHECK(j["enhance"]["degradation"].contains("noise_sigma"));
}

TEST_CASE("normalization is idempotent") {
  const ExperimentConfig once = validate_config(tiny_doc());
  const ExperimentConfig twice = validate_config(once.to_json());
  CHECK(twice.to_json() == once.to_json());
  CHECK(twice.sha256() == once.sha256());
  CHECK(once.sha256().size() == 64);
}

TEST_CASE("range and type errors name their paths") {
  CHECK(error_of(json::parse(R"({"gan": {"lambda_gp": -1}})")).find("gan.lambda_gp") != std::string::npos);
  const std::string all = error_of(json::parse(
      R"({"gan": {"lambda_gp": -1, "lamda": 3}, "inpaint": {"iterations": 0},
          "bogus": 1, "data": {"image_size": "big"}, "mask": {"kind": "blob"}})"));
  for (const char* path : {"gan.lambda_gp", "gan.lamda", "inpaint.iterations", "bogus", "data.image_size", "mask.kind"})
    CHECK_MESSAGE(all.find(path) != std::string::npos, path);
  CHECK(all.find("6 problems") != std::string::npos);
  CHECK(error_of(json::parse(R"({"data": {"source": "directory"}})")).find("data.path") != std::string::npos);
  CHECK(error_of(json::parse(R"({"metrics": {"window": 4}})")).find("metrics.window") != std::string::npos);
  CHECK(error_of(json::parse("[1, 2]")).find("must be an object") != std::string::npos);
  CHECK(error_of(json::parse(R"({"seed": -3})")).find("seed") != std::string::npos);
}

TEST_CASE("malformed json reports line and column") {
  try {
    parse_json_text("{\n  \"gan\": {\n    \"lambda_gp\": ,\n  }\n}", "c.json");
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("c.json:3:") != std::string::npos);
  }
}

TEST_CASE("seed override flows into derived sub-seeds only") {
  const fs::path dir = scratch("seed");
  json doc = tiny_doc();
  doc["gan"]["seed"] = 77;
  const fs::path p = write_config(dir, doc);
  const std::uint64_t s = 123;
  const ExperimentConfig a = load_config(p);
  const ExperimentConfig b = load_config(p, &s);
  CHECK(b.seed == 123);
  CHECK(b.gan.seed == 77);
  CHECK(b.inpaint.seed == derive_seed(123, "inpaint"));
  CHECK(a.inpaint.seed != b.inpaint.seed);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ValidationError);
}

TEST_CASE("plot summaries") {
  const fs::path dir = scratch("plot");
  write_file_atomic(dir / "e.csv", std::string("epoch,mean_loss\n1,0.5\n2,0.25\n"));
  const fs::path sp = emit_plot(dir / "e.csv", dir / "e.png", PlotKind::kEnhanceLoss);
  CHECK(sp == dir / "e.summary.json");
  CHECK(fs::exists(dir / "e.png"));
  const auto s = PlotSummary::from_json(json::parse(read_file(sp)));
  CHECK(s.rows == 2);
  CHECK(s.series.at("mean_loss").first == 0.5);
  CHECK(s.series.at("mean_loss").last == 0.25);
  CHECK(s.series.at("mean_loss").min == 0.25);

  write_file_atomic(dir / "t.csv", std::string("iter,contextual,perceptual,total\n0,2,-1,1.9\n1,1,-3,0.7\n"));
  const auto t = summarize_csv(dir / "t.csv", PlotKind::kInpaintTrace);
  CHECK(t.series.at("perceptual").max_abs == 3.0);
  CHECK(*t.max_abs_total_minus_contextual == doctest::Approx(0.3).epsilon(1e-12));

  write_file_atomic(dir / "empty.csv", std::string("epoch,mean_loss\n"));
  CHECK_THROWS_AS(emit_plot(dir / "empty.csv", dir / "x.png", PlotKind::kEnhanceLoss), ValidationError);
  CHECK_THROWS_AS(emit_plot(dir / "e.csv", dir / "x.png", PlotKind::kGanLoss), ValidationError);
  CHECK_THROWS_AS(emit_plot(dir / "nope.csv", dir / "x.png", PlotKind::kGanLoss), ValidationError);
  CHECK(parse_plot_kind("inpaint-trace") == PlotKind::kInpaintTrace);
}

TEST_CASE("run directory resolution") {
  const char* old = std::getenv(kRunRootEnv);
  const std::string saved = old ? old : "";
  ::unsetenv(kRunRootEnv);
  CHECK(resolve_run_dir(std::nullopt, "abcdef0123456789") == fs::path("runs") / "abcdef012345");
  CHECK(resolve_run_dir(fs::path("x/y"), "h") == fs::path("x/y"));
  ::setenv(kRunRootEnv, "/tmp/root", 1);
  CHECK(resolve_run_dir(std::nullopt, "abcdef0123456789") == fs::path("/tmp/root/abcdef012345"));
  CHECK(resolve_run_dir(fs::path("r1"), "h") == fs::path("/tmp/root/r1"));
  CHECK(resolve_run_dir(fs::path("/abs"), "h") == fs::path("/abs"));
  if (old)
    ::setenv(kRunRootEnv, saved.c_str(), 1);
  else
    ::unsetenv(kRunRootEnv);
}

TEST_CASE("run directory ownership") {
  const fs::path dir = scratch("runown");
  const fs::path cfg = write_config(dir, tiny_doc());
  OpenOptions o;
  o.config_path = cfg;
  o.run_dir = dir / "run";
  {
    Run run = Run::open(o);
    CHECK(fs::exists(dir / "run" / "config.json"));
    CHECK_THROWS_AS(Run::open(o), RuntimeFailure);  // locked
  }
  // Self-describing: reopen without --config.
  OpenOptions bare;
  bare.run_dir = dir / "run";
  CHECK(Run::open(bare).config_hash() == validate_config(tiny_doc()).sha256());
  // Same directory, different config.
  json other = tiny_doc();
  other["gan"]["lambda_gp"] = 5.0;
  o.config_path = write_config(dir, other, "other.json");
  CHECK_THROWS_AS(Run::open(o), ValidationError);
  OpenOptions none;
  CHECK_THROWS_AS(Run::open(none), ValidationError);
}

TEST_CASE("tiny pipeline end to end") {
  const fs::path dir = scratch("pipeline");
  OpenOptions o;
  o.config_path = write_config(dir, tiny_doc());
  o.run_dir = dir / "run";
  Run run = Run::open(o);
  CHECK_THROWS_AS(make_masks(run), ValidationError);  // no data yet

  const auto split = prepare_data(run);
  CHECK(split.train.size() == 9);
  CHECK(split.test.size() == 3);
  const auto back = load_split(run);
  CHECK(back.train[0].image == split.train[0].image);

  const auto masks = make_masks(run);
  CHECK(masks.size() == 3);
  CHECK_THROWS_AS(inpaint_batch(run, std::nullopt, true), ValidationError);  // no generator

  train_gan(run, false);
  CHECK(CsvTable::read(run.path("history/gan.csv")).rows.size() == 3);
  const auto held = train_enhance(run);
  CHECK(held.size() == 3);
  CHECK(CsvTable::read(run.path("history/enhance.csv")).rows.size() == 2);

  const auto rows = inpaint_batch(run, std::nullopt, true);
  CHECK(rows.size() == 2);
  for (const char* f : {"masked.png", "raw.png", "final.png", "trace.csv", "z_star.json"})
    CHECK(fs::exists(run.path("results") / rows[0].id / f));

  const auto reports = evaluate(run);
  CHECK(reports.completed.included == 2);
  CHECK(fs::exists(run.path("report/metrics.csv")));
  CHECK(fs::exists(run.path("report/zero_fill_metrics.json")));
  CHECK(CsvTable::read(run.path("report/metrics.csv")).header ==
        std::vector<std::string>{"id", "psnr_db", "ssim"});

  const auto plots = plot_all(run);
  CHECK(plots.size() == 4);
  CHECK(fs::exists(run.path("plots/gan_loss.png")));
  CHECK(fs::exists(run.path("plots/enhance_loss.summary.json")));
}

// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "inpaint_lab/inpaint_lab.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("inpaint_lab_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("version and error state") {
  CHECK(std::string(il_version()).size() > 0);
  il_run* run = nullptr;
  CHECK(il_run_open(nullptr, nullptr, nullptr, &run) == IL_ERR_VALIDATION);
  CHECK(run == nullptr);
  CHECK(std::string(il_last_error()).find("--config") != std::string::npos);
  CHECK(il_prepare_data(nullptr) == IL_ERR_VALIDATION);
}

TEST_CASE("config validation through the C API") {
  const fs::path dir = scratch("cfg");
  write(dir / "ok.json", R"({"gan": {"total_steps": 3}})");
  char* out = nullptr;
  REQUIRE(il_validate_config((dir / "ok.json").c_str(), nullptr, &out) == IL_OK);
  CHECK(std::string(out).find("\"lambda_gp\"") != std::string::npos);
  il_free_string(out);

  write(dir / "bad.json", "{\"gan\": {\"lambda_gp\": -1}}");
  CHECK(il_validate_config((dir / "bad.json").c_str(), nullptr, &out) == IL_ERR_VALIDATION);
  CHECK(std::string(il_last_error()).find("gan.lambda_gp") != std::string::npos);

  write(dir / "broken.json", "{\n\"gan\": [\n");
  CHECK(il_validate_config((dir / "broken.json").c_str(), nullptr, &out) == IL_ERR_VALIDATION);
  CHECK(std::string(il_last_error()).find(":") != std::string::npos);
}

TEST_CASE("metrics on raw buffers") {
  std::vector<uint8_t> a(16 * 16 * 3, 0), b(16 * 16 * 3, 255);
  double v = 0.0;
  REQUIRE(il_psnr(a.data(), a.data(), 16, 16, &v) == IL_OK);
  CHECK(v == 99.0);
  REQUIRE(il_psnr(a.data(), b.data(), 16, 16, &v) == IL_OK);
  CHECK(v == doctest::Approx(0.0));
  REQUIRE(il_ssim(a.data(), b.data(), 16, 16, &v) == IL_OK);
  CHECK(v == doctest::Approx(9.9990e-5).epsilon(1e-4));
  CHECK(il_ssim(a.data(), b.data(), 4, 4, &v) == IL_ERR_VALIDATION);
  CHECK(il_psnr(nullptr, b.data(), 4, 4, &v) == IL_ERR_VALIDATION);
}

TEST_CASE("plot kinds") {
  il_plot_kind k;
  REQUIRE(il_parse_plot_kind("enhance-loss", &k) == IL_OK);
  CHECK(k == IL_PLOT_ENHANCE_LOSS);
  CHECK(il_parse_plot_kind("pie", &k) == IL_ERR_VALIDATION);
  const fs::path dir = scratch("plot");
  write(dir / "h.csv", "epoch,mean_loss\n1,2\n2,1\n");
  CHECK(il_emit_plot((dir / "h.csv").c_str(), (dir / "h.png").c_str(), IL_PLOT_ENHANCE_LOSS) == IL_OK);
  CHECK(fs::exists(dir / "h.summary.json"));
}

TEST_CASE("run handle lifecycle") {
  const fs::path dir = scratch("run");
  write(dir / "c.json", R"({"data": {"image_size": 8, "count": 6}})");
  il_run* run = nullptr;
  const uint64_t seed = 9;
  REQUIRE(il_run_open((dir / "c.json").c_str(), (dir / "r").c_str(), &seed, &run) == IL_OK);
  CHECK(std::string(il_run_dir(run)) == (dir / "r").string());
  CHECK(std::string(il_run_config_hash(run)).size() == 64);
  il_run* second = nullptr;
  CHECK(il_run_open((dir / "c.json").c_str(), (dir / "r").c_str(), &seed, &second) == IL_ERR_RUNTIME);
  CHECK(il_make_masks(run) == IL_ERR_VALIDATION);
  CHECK(il_prepare_data(run) == IL_OK);
  CHECK(il_make_masks(run) == IL_OK);
  CHECK(fs::exists(dir / "r" / "masks" / "manifest.json"));
  il_run_close(run);
}

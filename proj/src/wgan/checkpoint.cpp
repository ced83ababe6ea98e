#include "wgan/checkpoint.hpp"

#include <fmt/format.h>

#include "common/error.hpp"
#include "common/fsutil.hpp"
#include "nn/serialize.hpp"

namespace inpaint_lab::wgan {

using nlohmann::json;

json CheckpointManifest::to_json() const {
  json j;
  j["kind"] = kind;
  if (kind == "generator") {
    j["z_dim"] = z_dim;
    j["image_size"] = image_size;
    j["base_width"] = base_width;
  } else if (kind == "critic") {
    j["image_size"] = image_size;
    j["base_width"] = base_width;
    j["leaky_slope"] = leaky_slope;
  } else {
    j["depth"] = depth;
    j["width"] = width;
  }
  j["step"] = step;
  j["seed"] = seed;
  j["config_sha256"] = config_sha256;
  return j;
}

CheckpointManifest CheckpointManifest::from_json(const json& j, const std::string& source) {
  CheckpointManifest m;
  try {
    m.kind = j.at("kind").get<std::string>();
    if (m.kind != "generator" && m.kind != "critic" && m.kind != "enhancer")
      fail_runtime(source + ": unknown checkpoint kind '" + m.kind + "'");
    m.z_dim = j.value("z_dim", 0);
    m.image_size = j.value("image_size", 0);
    m.base_width = j.value("base_width", 0);
    m.leaky_slope = j.value("leaky_slope", 0.0);
    m.depth = j.value("depth", 0);
    m.width = j.value("width", 0);
    m.step = j.at("step").get<std::int64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_sha256 = j.value("config_sha256", std::string{});
  } catch (const json::exception& e) {
    fail_runtime(source + ": malformed manifest: " + e.what());
  }
  return m;
}

CheckpointManifest manifest_for(const GeneratorArch& arch) {
  CheckpointManifest m;
  m.kind = "generator";
  m.z_dim = arch.z_dim;
  m.image_size = arch.image_size;
  m.base_width = arch.base_width;
  return m;
}

CheckpointManifest manifest_for(const CriticArch& arch) {
  CheckpointManifest m;
  m.kind = "critic";
  m.image_size = arch.image_size;
  m.base_width = arch.base_width;
  m.leaky_slope = arch.leaky_slope;
  return m;
}

template <class T>
void save_checkpoint(const fs::path& dir, const CheckpointManifest& manifest,
                     const std::vector<nn::StateEntry<T>>& state) {
  fs::create_directories(dir);
  nn::save_tensors(dir / "weights.bin", state);
  write_file_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

CheckpointManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) fail_runtime("no checkpoint manifest at " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail_runtime(path.string() + ": " + e.what());
  }
  return CheckpointManifest::from_json(j, path.string());
}

namespace {

void check_field(const std::string& source, const char* field, double stored, double expected) {
  if (stored != expected)
    fail_runtime(fmt::format("{}: architecture mismatch: manifest {}={}, expected {}", source, field,
                             stored, expected));
}

}  // namespace

template <class T>
CheckpointManifest load_checkpoint(const fs::path& dir, const CheckpointManifest& expected,
                                   const std::vector<nn::StateEntry<T>>& state) {
  const CheckpointManifest m = read_manifest(dir);
  const std::string source = (dir / "manifest.json").string();
  if (m.kind != expected.kind)
    fail_runtime(source + ": checkpoint kind '" + m.kind + "', expected '" + expected.kind + "'");
  check_field(source, "z_dim", m.z_dim, expected.z_dim);
  check_field(source, "image_size", m.image_size, expected.image_size);
  check_field(source, "base_width", m.base_width, expected.base_width);
  check_field(source, "leaky_slope", m.leaky_slope, expected.leaky_slope);
  check_field(source, "depth", m.depth, expected.depth);
  check_field(source, "width", m.width, expected.width);
  nn::load_tensors(dir / "weights.bin", state);
  return m;
}

Generator<float> load_generator(const fs::path& dir, CheckpointManifest* manifest) {
  const CheckpointManifest m = read_manifest(dir);
  if (m.kind != "generator") fail_runtime(dir.string() + " is a " + m.kind + " checkpoint");
  GeneratorArch arch{m.z_dim, m.image_size, m.base_width};
  try {
    arch.validate();
  } catch (const ValidationError& e) {
    fail_runtime(dir.string() + ": invalid generator architecture: " + e.what());
  }
  Generator<float> g(arch);
  const CheckpointManifest loaded = load_checkpoint(dir, manifest_for(arch), g.state());
  if (manifest) *manifest = loaded;
  return g;
}

Critic<float> load_critic(const fs::path& dir, CheckpointManifest* manifest) {
  const CheckpointManifest m = read_manifest(dir);
  if (m.kind != "critic") fail_runtime(dir.string() + " is a " + m.kind + " checkpoint");
  CriticArch arch{m.image_size, m.base_width, m.leaky_slope};
  try {
    arch.validate();
  } catch (const ValidationError& e) {
    fail_runtime(dir.string() + ": invalid critic architecture: " + e.what());
  }
  Critic<float> c(arch);
  const CheckpointManifest loaded = load_checkpoint(dir, manifest_for(arch), c.state());
  if (manifest) *manifest = loaded;
  return c;
}

template void save_checkpoint<float>(const fs::path&, const CheckpointManifest&,
                                     const std::vector<nn::StateEntry<float>>&);
template void save_checkpoint<double>(const fs::path&, const CheckpointManifest&,
                                      const std::vector<nn::StateEntry<double>>&);
template CheckpointManifest load_checkpoint<float>(const fs::path&, const CheckpointManifest&,
                                                   const std::vector<nn::StateEntry<float>>&);
template CheckpointManifest load_checkpoint<double>(const fs::path&, const CheckpointManifest&,
                                                    const std::vector<nn::StateEntry<double>>&);

}  // namespace inpaint_lab::wgan

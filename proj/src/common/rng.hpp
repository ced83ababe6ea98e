#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace inpaint_lab {

// Portable random source. The engine is std::mt19937_64 (its output sequence
// is fixed by the standard); the real-valued transforms are implemented here
// because the std:: distributions are implementation-defined and would break
// bit-exact reproducibility across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (lo, hi).
  double uniform_open(double lo, double hi);

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (one draw per call, no cached spare so the
  // state is fully captured by the engine).
  double normal();

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Engine state as text (std::mt19937_64 stream format).
  std::string save_state() const;
  void load_state(const std::string& state);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

// Derive a subsystem seed from the global seed: splitmix64 over
// (seed XOR fnv1a(name)).
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view name);

// Fisher-Yates shuffle with a seeded Rng.
template <class Vec>
void shuffle(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace inpaint_lab

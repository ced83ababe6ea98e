#include "wgan/losses.hpp"

#include <string>

namespace inpaint_lab::wgan {

std::string_view to_string(PenaltySampling s) {
  return s == PenaltySampling::kInterpolate ? "interpolate" : "fake";
}

PenaltySampling parse_penalty_sampling(std::string_view name) {
  if (name == "interpolate") return PenaltySampling::kInterpolate;
  if (name == "fake") return PenaltySampling::kFake;
  fail_validation("unknown penalty sampling '" + std::string(name) +
                  "' (expected interpolate or fake)");
}

}  // namespace inpaint_lab::wgan

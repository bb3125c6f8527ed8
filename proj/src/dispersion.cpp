#include "gwloc/dispersion.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "gwloc/error.hpp"
#include "gwloc/rng.hpp"

namespace gwloc::dispersion {

namespace {
constexpr int kMaxAlphaRejections = 10000;
}  // namespace

void validate(const ModeCurve& curve) {
  if (!(curve.constant > 0.0) || !std::isfinite(curve.constant)) {
    fail(ErrorCode::kInvalidArgument,
         "dispersion mode constant must be positive and finite, got " +
             std::to_string(curve.constant));
  }
}

DispersionModel::DispersionModel()
    : DispersionModel({ModeCurve::linear(5400.0), ModeCurve::square_root(0.25)}) {}

DispersionModel::DispersionModel(std::vector<ModeCurve> modes, double alpha)
    : modes_(std::move(modes)), alpha_(alpha) {
  if (modes_.empty()) {
    fail(ErrorCode::kInvalidArgument, "dispersion model needs at least one mode");
  }
  for (const auto& m : modes_) validate(m);
  if (!(alpha_ >= kAlphaMin && alpha_ <= kAlphaMax)) {
    fail(ErrorCode::kDomain, "alpha " + std::to_string(alpha_) + " outside [0.7, 1.3]");
  }
}

DispersionModel DispersionModel::with_alpha(double alpha) const {
  return DispersionModel(modes_, alpha);
}

const ModeCurve& DispersionModel::mode(std::size_t mode_index) const {
  if (mode_index >= modes_.size()) {
    fail(ErrorCode::kIndex, "mode index " + std::to_string(mode_index) + " out of range (" +
                                std::to_string(modes_.size()) + " modes)");
  }
  return modes_[mode_index];
}

double DispersionModel::wavenumber(std::size_t mode_index, double omega) const {
  const ModeCurve& m = mode(mode_index);
  if (!(omega >= 0.0)) fail(ErrorCode::kDomain, "negative angular frequency");
  switch (m.kind) {
    case ModeKind::kLinear:
      return alpha_ * (omega / m.constant);
    case ModeKind::kSquareRoot:
      return alpha_ * std::sqrt(omega / m.constant);
  }
  fail(ErrorCode::kInternal, "unknown mode kind");
}

double DispersionModel::group_velocity(std::size_t mode_index, double omega) const {
  const ModeCurve& m = mode(mode_index);
  if (!(omega >= 0.0)) fail(ErrorCode::kDomain, "negative angular frequency");
  switch (m.kind) {
    case ModeKind::kLinear:
      return m.constant / alpha_;
    case ModeKind::kSquareRoot:
      // omega = d * (kappa / alpha)^2, so d(omega)/d(kappa) = (2 / alpha) sqrt(d omega).
      if (omega == 0.0) fail(ErrorCode::kDomain, "group velocity of a square-root mode vanishes at omega = 0");
      return (2.0 / alpha_) * std::sqrt(m.constant * omega);
  }
  fail(ErrorCode::kInternal, "unknown mode kind");
}

double sample_alpha(std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  for (int i = 0; i < kMaxAlphaRejections; ++i) {
    const double a = rng.gaussian(1.0, 1.0);
    if (a >= kAlphaMin && a <= kAlphaMax) return a;
  }
  fail(ErrorCode::kInternal, "alpha rejection sampler exceeded 10000 draws");
}

}  // namespace gwloc::dispersion

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gwloc::dispersion {

enum class ModeKind { kLinear, kSquareRoot };

// One wavenumber curve. Linear: kappa = omega / c (c in m/s).
// SquareRoot: kappa = sqrt(omega / d) (d in m^2/s, flexural-like).
struct ModeCurve {
  ModeKind kind = ModeKind::kLinear;
  double constant = 5400.0;

  static ModeCurve linear(double c) { return {ModeKind::kLinear, c}; }
  static ModeCurve square_root(double d) { return {ModeKind::kSquareRoot, d}; }
};

inline constexpr double kAlphaMin = 0.7;
inline constexpr double kAlphaMax = 1.3;

class DispersionModel {
 public:
  // Two-mode default: nondispersive c = 5400 m/s plus flexural d = 0.25 m^2/s.
  DispersionModel();
  explicit DispersionModel(std::vector<ModeCurve> modes, double alpha = 1.0);

  const std::vector<ModeCurve>& modes() const { return modes_; }
  std::size_t mode_count() const { return modes_.size(); }
  double alpha() const { return alpha_; }

  // Same curves, different uncertainty scale.
  DispersionModel with_alpha(double alpha) const;

  // alpha * kappa_mode(omega), rad/m.
  double wavenumber(std::size_t mode_index, double omega) const;

  // d(omega)/d(kappa_eff), m/s.
  double group_velocity(std::size_t mode_index, double omega) const;

 private:
  const ModeCurve& mode(std::size_t mode_index) const;

  std::vector<ModeCurve> modes_;
  double alpha_;
};

// Gaussian(mean 1, sd 1) rejection-sampled into [0.7, 1.3].
double sample_alpha(std::uint64_t rng_seed);

void validate(const ModeCurve& curve);

}  // namespace gwloc::dispersion

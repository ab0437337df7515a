#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>

#include "bellturb/channels.hpp"
#include "bellturb/photocount.hpp"

namespace bellturb {

// Polarization angles of the two settings per side, in radians.
struct AngleSettings {
  double theta_a1 = 0.0;
  double theta_b1 = 0.0;
  double theta_a2 = 0.0;
  double theta_b2 = 0.0;

  // (0, pi/8, pi/4, 3pi/8).
  static AngleSettings canonical();
  // Every angle reduced to [0, pi).
  AngleSettings reduced() const;
  std::array<double, 4> as_array() const { return {theta_a1, theta_b1, theta_a2, theta_b2}; }
};

struct BellResult {
  double bell_value = 0.0;
  AngleSettings settings;
  // E11, E12, E22, E21 with Ejk = E(theta_Aj, theta_Bk).
  std::array<double, 4> correlations{};
  double std_error = 0.0;
  // Value and error at the canonical angles, reported alongside the optimum.
  double canonical_value = 0.0;
  double canonical_std_error = 0.0;
};

// (p_same - p_different) / (p_same + p_different); UndefinedCorrelation when the sum is 0.
double correlation(double p_same, double p_different);

// |e11 - e12| + |e22 + e21|.
double bell_parameter(double e11, double e12, double e22, double e21);

// Bell parameter of a PDC source at fixed angles over fixed transmittance pairs.
BellResult evaluate_bell(const PdcKernel& kernel, const AngleSettings& settings);

struct NelderMeadResult {
  std::array<double, 3> x{};
  double value = 0.0;
  int evaluations = 0;
};

// Minimizes f over R^3; stops when the simplex diameter and spread of values
// fall below tol or after max_evaluations.
NelderMeadResult nelder_mead(const std::function<double(const std::array<double, 3>&)>& f,
                             const std::array<double, 3>& start, double step, double tol, int max_evaluations);

/// Bell parameter maximized over the polarization angles.
///
/// Transmittance pairs are drawn once and reused for every angle evaluation.
/// BellState sources use the closed form at the canonical angles. For PDC
/// sources the angles are parameterized as (0, x1, x2, x3) and refined by
/// Nelder-Mead from the canonical pattern, its mirror image and a restart
/// from the best point; the result never falls below the canonical value.
BellResult maximize_bell(const SourceModel& source, const ChannelScenario& scenario, const DetectorParams& detector,
                         bool include_double_clicks, std::size_t count, std::uint64_t seed);

// Same, over caller-supplied pairs.
BellResult maximize_bell(const SourceModel& source, std::span<const TransmittancePair> pairs,
                         const DetectorParams& detector, bool include_double_clicks);

}  // namespace bellturb

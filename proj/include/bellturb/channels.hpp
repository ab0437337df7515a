#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "bellturb/numerics.hpp"

namespace bellturb {

/// Elliptic-beam channel of a weak- to moderate-turbulence link.
///
/// The random beam is described by its centroid (x0, y0) and the log-scale
/// semiaxis parameters Theta1, Theta2 with W_i^2 = W0^2 exp(Theta_i), plus a
/// uniformly distributed orientation angle. Moments of (x0, y0, Theta1,
/// Theta2) follow from the Rytov and Fresnel parameters; `eta_m` folds in
/// deterministic absorption and optics losses.
struct EllipticBeamChannel {
  double rytov_sq = 0.0;    // sigma_R^2
  double fresnel = 1.0;     // Omega = k W0^2 / (2L)
  double beam_waist = 0.0;  // W0 [m]
  double aperture = 0.0;    // receiver aperture radius a [m]
  double length = 0.0;      // L [m]
  double eta_m = 1.0;

  void validate() const;
};

/// Log-normal transmittance restricted to [0, eta_m] and renormalized.
/// Density is proportional to exp[-(ln eta + mu)^2 / (2 sigma^2)] / eta.
struct TruncatedLogNormalChannel {
  double mu = 0.0;
  double sigma = 1.0;
  double eta_m = 1.0;

  void validate() const;
  // Standardized truncation point (ln eta_m + mu) / sigma.
  double upper_z() const;
  // F(eta_m): untruncated log-normal CDF at eta_m.
  double normalization() const;
};

class TransmittanceModel;

struct Deterministic {
  double eta0 = 1.0;
};

// Inner PDT conditioned on eta >= eta_ps.
struct Postselected {
  std::shared_ptr<const TransmittanceModel> inner;
  double eta_ps = 0.0;
};

// Resampled from a sorted list of measured transmittances.
struct Empirical {
  std::shared_ptr<const std::vector<double>> sorted;
};

/// Probability distribution of the transmittance of one channel.
class TransmittanceModel {
 public:
  using Variant = std::variant<Deterministic, TruncatedLogNormalChannel, EllipticBeamChannel, Postselected, Empirical>;

  static TransmittanceModel deterministic(double eta0);
  static TransmittanceModel truncated_log_normal(const TruncatedLogNormalChannel& channel);
  static TransmittanceModel elliptic_beam(const EllipticBeamChannel& channel);
  // eta_ps in [0, 1). Throws FeasibilityError when the inner exceedance at
  // eta_ps is known in closed form to vanish.
  static TransmittanceModel postselected(const TransmittanceModel& inner, double eta_ps);
  static TransmittanceModel empirical(std::vector<double> samples);

  const Variant& variant() const { return variant_; }
  // True when every draw returns the same value.
  bool is_deterministic() const;

 private:
  explicit TransmittanceModel(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

// Both entangled modes traverse the same channel realization (eta_A = eta_B).
struct Copropagating {
  TransmittanceModel model;
};

// Independent channels for the two modes.
struct Counterpropagating {
  TransmittanceModel model_a;
  TransmittanceModel model_b;
};

using ChannelScenario = std::variant<Copropagating, Counterpropagating>;

bool is_deterministic(const ChannelScenario& scenario);

struct TransmittancePair {
  double eta_a = 0.0;
  double eta_b = 0.0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct McOptions {
  std::size_t count = 100000;
  std::uint64_t seed = 0;
};

// sigma_R^2 = 1.23 Cn^2 k^(7/6) L^(11/6).
double rytov_parameter(double cn2, double wavenumber, double length);

// Omega = k W0^2 / (2L).
double fresnel_parameter(double beam_waist, double wavenumber, double length);

// Mean and covariance of (x0, y0, Theta1, Theta2) for Kolmogorov turbulence.
GaussianSpec elliptic_moments(double rytov_sq, double fresnel, double beam_waist);

// Scale R(xi) and shape lambda(xi) of the transmittance profile for
// aperture radius `aperture`. Small-argument limits are taken by series.
struct ScaleShape {
  double scale = 0.0;
  double shape = 2.0;
};
ScaleShape scale_shape(double xi, double aperture);

// Transmittance of a centred elliptic beam with semiaxes W_i^2 = W0^2 e^Theta_i.
double elliptic_centered_transmittance(double theta1, double theta2, const EllipticBeamChannel& channel);

// Squared effective spot radius for orientation chi.
double elliptic_effective_width_sq(double theta1, double theta2, double chi, const EllipticBeamChannel& channel);

/// eta_m * eta(v, chi) for beam parameters v = (x0, y0, Theta1, Theta2) and
/// ellipse orientation chi. Result is in [0, 1]; throws EvaluationError when
/// an intermediate is not finite.
double elliptic_transmittance(const Vector4& v, double chi, const EllipticBeamChannel& channel);

// Deterministic in (seed, count). Throws FeasibilityError for postselection
// with acceptance probability below 1e-6.
std::vector<double> sample_pdt(const TransmittanceModel& model, std::size_t count, std::uint64_t seed);

struct PdtMoments {
  Estimate mean;
  Estimate second;
  Estimate variance;
};

// Monte Carlo moments; exact with zero error for deterministic models.
PdtMoments pdt_moments(const TransmittanceModel& model, std::size_t count, std::uint64_t seed);
PdtMoments sample_moments(const std::vector<double>& samples);

// Closed-form moments where the model admits them (deterministic, truncated
// log-normal, empirical, and postselected variants of these).
std::optional<PdtMoments> analytic_moments(const TransmittanceModel& model);

// Pre-truncation log-normal fit; eta_m is taken as given.
TruncatedLogNormalChannel lognormal_from_moments(double mean, double variance, double eta_m = 1.0);

// P(eta >= eta_ps). Monte Carlo (with standard error) only for elliptic beams.
Estimate exceedance(const TransmittanceModel& model, double eta_ps, const McOptions& mc = {});

// Probability that both channels exceed eta_ps.
Estimate joint_feasibility(const ChannelScenario& scenario, double eta_ps, const McOptions& mc = {});

std::vector<TransmittancePair> sample_pairs(const ChannelScenario& scenario, std::size_t count, std::uint64_t seed);

// Wraps every model of the scenario in Postselected(., eta_ps).
ChannelScenario postselect(const ChannelScenario& scenario, double eta_ps);

}  // namespace bellturb

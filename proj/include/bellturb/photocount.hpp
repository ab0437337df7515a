#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "bellturb/channels.hpp"

namespace bellturb {

// On/off detector: efficiency eta_c in (0,1], mean noise counts nu >= 0 per pulse.
struct DetectorParams {
  double eta_c = 1.0;
  double nu = 0.0;

  void validate() const;
};

struct PdcSource {
  double xi = 0.0;  // squeezing parameter
};

// Single-pair singlet, the weak-pumping conditional limit of the PDC state.
struct BellStateSource {};

using SourceModel = std::variant<PdcSource, BellStateSource>;

struct PdcCoefficients {
  double c0 = 1.0;
  double c1a = 0.0;
  double c1b = 0.0;
  double c_same = 0.0;
  double c_different = 0.0;
};

// Coefficients of the PDC click probabilities at t = tanh^2 xi.
PdcCoefficients pdc_coefficients(double xi, const DetectorParams& detector, double eta_a, double eta_b,
                                 double delta_theta);

/// Per-pair terms of P_same / P_different for one (eta_A, eta_B).
///
/// With s = sin^2(theta_A - theta_B) the probabilities are
///   with double clicks:    P_same = base + gain * h * (2s - 1) / ((H - h s)(H - h (1 - s)))
///   without double clicks: P_same = base + gain / (H - h s)
/// and P_different(s) = P_same(1 - s). The double-click base is evaluated
/// in a form free of cancellation so tiny click rates keep full precision.
struct PdcPairTerms {
  double base = 0.0;
  double gain = 0.0;
  double h_total = 1.0;  // H
  double h_angle = 0.0;  // h

  double same(double s, bool include_double_clicks) const;
  // Both probabilities at once: (P_same(s), P_different(s)).
  std::pair<double, double> both(double s, bool include_double_clicks) const;
};

PdcPairTerms pdc_pair_terms(double xi, const DetectorParams& detector, double eta_a, double eta_b,
                            bool include_double_clicks);

struct ClickProbs {
  double p_same = 0.0;
  double p_different = 0.0;
  double same_std_error = 0.0;
  double different_std_error = 0.0;
};

// Mean over the pairs of the per-pair click probabilities.
ClickProbs pdc_click_probs(double xi, const DetectorParams& detector, std::span<const TransmittancePair> pairs,
                           double delta_theta, bool include_double_clicks);

/// Precomputed per-pair terms for repeated angle evaluations over one fixed
/// set of transmittance samples.
class PdcKernel {
 public:
  PdcKernel(double xi, const DetectorParams& detector, std::span<const TransmittancePair> pairs,
            bool include_double_clicks);

  // Mean (P_same, P_different) at angle difference delta.
  ClickProbs mean(double delta) const;
  // Per-pair values, written to same[i], different[i].
  void per_pair(double delta, std::vector<double>& same, std::vector<double>& different) const;
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<PdcPairTerms> terms_;
  bool include_double_clicks_;
};

struct BellChannelProbs {
  double p0 = 0.0;
  double p1 = 0.0;
  double pB = 0.0;
  // <eta_A (1 - eta_B) + eta_B (1 - eta_A)> estimated directly.
  double p1_direct = 0.0;
  // Covariance of the estimates of (p0, pB); zero for deterministic channels.
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();
};

BellChannelProbs bell_channel_probs(const ChannelScenario& scenario, std::size_t count, std::uint64_t seed);
BellChannelProbs bell_channel_probs(std::span<const TransmittancePair> pairs);

double bell_state_correlation(const BellChannelProbs& probs, const DetectorParams& detector, double theta_a,
                              double theta_b, bool include_double_clicks = true);

// Bell parameter of the singlet at angles (0, pi/8, pi/4, 3pi/8).
double bell_state_bell_parameter(const BellChannelProbs& probs, const DetectorParams& detector,
                                 bool include_double_clicks);

// Same, with a delta-method standard error from probs.covariance.
Estimate bell_state_bell_estimate(const BellChannelProbs& probs, const DetectorParams& detector,
                                  bool include_double_clicks);

}  // namespace bellturb

#include "bellturb/photocount.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "bellturb/error.hpp"
#include "bellturb/random.hpp"

namespace bellturb {

namespace {

struct PdcScalars {
  double t;  // tanh^2 xi
  double u;  // 1 - t = 1 / cosh^2 xi
};

PdcScalars pdc_scalars(double xi) {
  if (!std::isfinite(xi) || xi < 0.0) throw DomainError("squeezing parameter must be finite and >= 0");
  const double c = std::cosh(xi);
  const double u = 1.0 / (c * c);
  const double th = std::tanh(xi);
  if (!(u > 0.0)) throw DomainError("squeezing parameter too large: 1 - tanh^2 xi underflows");
  return {th * th, u};
}

void check_eta(double eta, const char* name) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError(std::string(name) + " must lie in [0,1]");
}

// Weights of the singlet denominator p_B w_B + p_0 w_0 + p_1 w_1 and the prefactor of p_B.
struct BellWeights {
  double k;
  double w_b;
  double w0;
  double w1;
};

BellWeights bell_weights(const DetectorParams& d, bool include_double_clicks) {
  if (include_double_clicks) {
    const double em1 = std::expm1(2.0 * d.nu);  // e^{2nu} - 1
    const double shifted = em1 + d.eta_c;       // e^{2nu} + eta_c - 1
    return {d.eta_c * d.eta_c * std::exp(2.0 * d.nu), shifted * shifted, em1 * em1, em1 * shifted};
  }
  const double e = std::exp(d.nu);
  const double em1 = std::expm1(d.nu);
  // (1 - eta_c)(e - 2) + e = eta_c + (2 - eta_c)(e - 1)
  const double single = d.eta_c + (2.0 - d.eta_c) * em1;
  return {d.eta_c * d.eta_c * std::exp(2.0 * d.nu), single * single,
          4.0 * em1 * em1, 2.0 * em1 * (d.eta_c * e + 2.0 * em1 * (1.0 - d.eta_c))};
}

double bell_denominator(const BellChannelProbs& p, const BellWeights& w) {
  return p.pB * w.w_b + p.p0 * w.w0 + p.p1 * w.w1;
}

double mean_std_error(const std::vector<double>& values, double mean) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  CompensatedSum ss;
  for (double v : values) ss.add((v - mean) * (v - mean));
  return std::sqrt(ss.value() / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

void DetectorParams::validate() const {
  if (!(eta_c > 0.0 && eta_c <= 1.0)) throw DomainError("eta_c must lie in (0,1]");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("nu must be finite and >= 0");
}

PdcCoefficients pdc_coefficients(double xi, const DetectorParams& detector, double eta_a, double eta_b,
                                 double delta_theta) {
  detector.validate();
  check_eta(eta_a, "eta_a");
  check_eta(eta_b, "eta_b");
  const auto [t, u] = pdc_scalars(xi);
  const double tau_a = detector.eta_c * eta_a;
  const double tau_b = detector.eta_c * eta_b;
  // t eta_c^2 eta_A eta_B - (1 + (tau_A - 1) t)(1 + (tau_B - 1) t) = -u D, expanded in t.
  const double d = u + t * (tau_a + tau_b - tau_a * tau_b);
  const double bracket = -u * d;
  const double s = std::sin(delta_theta);
  const double c = std::cos(delta_theta);
  const double pre = tau_a * tau_b * t * u * u;
  const double x = (1.0 - tau_a) * (1.0 - tau_b) * t;

  PdcCoefficients k;
  k.c0 = bracket * bracket;
  k.c1a = detector.eta_c * eta_b * (1.0 - tau_a) * u * t * bracket;
  k.c1b = detector.eta_c * eta_a * (1.0 - tau_b) * u * t * bracket;
  k.c_same = pre * (x - s * s);
  k.c_different = pre * (x - c * c);
  return k;
}

double PdcPairTerms::same(double s, bool include_double_clicks) const {
  double p;
  if (include_double_clicks) {
    const double a = h_total - h_angle * s;
    const double b = h_total - h_angle * (1.0 - s);
    p = base + gain * h_angle * (2.0 * s - 1.0) / (a * b);
  } else {
    p = base + gain / (h_total - h_angle * s);
  }
  // Only rounding residue can leave [0, 1].
  return std::clamp(p, 0.0, 1.0);
}

std::pair<double, double> PdcPairTerms::both(double s, bool include_double_clicks) const {
  if (include_double_clicks) {
    const double r = gain * h_angle * (2.0 * s - 1.0) / ((h_total - h_angle * s) * (h_total - h_angle * (1.0 - s)));
    return {std::clamp(base + r, 0.0, 1.0), std::clamp(base - r, 0.0, 1.0)};
  }
  return {std::clamp(base + gain / (h_total - h_angle * s), 0.0, 1.0),
          std::clamp(base + gain / (h_total - h_angle * (1.0 - s)), 0.0, 1.0)};
}

PdcPairTerms pdc_pair_terms(double xi, const DetectorParams& detector, double eta_a, double eta_b,
                            bool include_double_clicks) {
  const PdcCoefficients k = pdc_coefficients(xi, detector, eta_a, eta_b, 0.0);
  const auto [t, u] = pdc_scalars(xi);
  const double nu = detector.nu;
  const double tau_a = detector.eta_c * eta_a;
  const double tau_b = detector.eta_c * eta_b;
  const double d = u + t * (tau_a + tau_b - tau_a * tau_b);
  const double ma = u + t * tau_a;
  const double mb = u + t * tau_b;

  PdcPairTerms terms;
  terms.h_total = k.c0 + k.c1a + k.c1b + k.c_same;
  terms.h_angle = k.c_same - k.c_different;
  const double u2 = u * u;
  if (include_double_clicks) {
    // base = (1 - Q_A - Q_B + Q_AB) / 2 with Q the no-click probabilities,
    // regrouped as (1 - Q_A)(1 - Q_B) + (Q_AB - Q_A Q_B).
    const double not_qa = -std::expm1(-2.0 * nu - 2.0 * std::log1p(t * tau_a / u));
    const double not_qb = -std::expm1(-2.0 * nu - 2.0 * std::log1p(t * tau_b / u));
    const double m = ma * mb;
    const double cross = std::exp(-4.0 * nu) * u2 * t * tau_a * tau_b * (m + u * d) / (d * d * m * m);
    terms.base = 0.5 * (not_qa * not_qb + cross);
    terms.gain = std::exp(-2.0 * nu) * u2 * u2;
  } else {
    terms.base = 2.0 * u2 *
                 (std::exp(-4.0 * nu) / (d * d) - std::exp(-3.0 * nu) / (d * ma) - std::exp(-3.0 * nu) / (d * mb));
    terms.gain = 2.0 * u2 * u2 * std::exp(-2.0 * nu);
  }
  if (!std::isfinite(terms.base) || !std::isfinite(terms.gain) || !std::isfinite(terms.h_total) ||
      !std::isfinite(terms.h_angle)) {
    std::ostringstream msg;
    msg << "non-finite click-probability terms at xi=" << xi << " eta_a=" << eta_a << " eta_b=" << eta_b
        << " eta_c=" << detector.eta_c << " nu=" << nu;
    throw EvaluationError(msg.str());
  }
  return terms;
}

PdcKernel::PdcKernel(double xi, const DetectorParams& detector, std::span<const TransmittancePair> pairs,
                     bool include_double_clicks)
    : include_double_clicks_(include_double_clicks) {
  if (pairs.empty()) throw DomainError("click probabilities need at least one transmittance pair");
  terms_.reserve(pairs.size());
  for (const auto& p : pairs) terms_.push_back(pdc_pair_terms(xi, detector, p.eta_a, p.eta_b, include_double_clicks));
}

ClickProbs PdcKernel::mean(double delta) const {
  const double sn = std::sin(delta);
  const double s = sn * sn;
  CompensatedSum same;
  CompensatedSum different;
  for (const auto& t : terms_) {
    const auto [ps, pd] = t.both(s, include_double_clicks_);
    same.add(ps);
    different.add(pd);
  }
  const double n = static_cast<double>(terms_.size());
  ClickProbs out;
  out.p_same = same.value() / n;
  out.p_different = different.value() / n;
  if (!std::isfinite(out.p_same) || !std::isfinite(out.p_different)) {
    throw EvaluationError("non-finite mean click probability");
  }
  return out;
}

void PdcKernel::per_pair(double delta, std::vector<double>& same, std::vector<double>& different) const {
  const double sn = std::sin(delta);
  const double s = sn * sn;
  same.resize(terms_.size());
  different.resize(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    std::tie(same[i], different[i]) = terms_[i].both(s, include_double_clicks_);
  }
}

ClickProbs pdc_click_probs(double xi, const DetectorParams& detector, std::span<const TransmittancePair> pairs,
                           double delta_theta, bool include_double_clicks) {
  const PdcKernel kernel(xi, detector, pairs, include_double_clicks);
  std::vector<double> same;
  std::vector<double> different;
  kernel.per_pair(delta_theta, same, different);
  ClickProbs out = kernel.mean(delta_theta);
  out.same_std_error = mean_std_error(same, out.p_same);
  out.different_std_error = mean_std_error(different, out.p_different);
  return out;
}

BellChannelProbs bell_channel_probs(std::span<const TransmittancePair> pairs) {
  if (pairs.empty()) throw DomainError("bell_channel_probs: no transmittance pairs");
  const double n = static_cast<double>(pairs.size());
  CompensatedSum s0;
  CompensatedSum sb;
  CompensatedSum s1;
  for (const auto& p : pairs) {
    s0.add((1.0 - p.eta_a) * (1.0 - p.eta_b));
    sb.add(p.eta_a * p.eta_b);
    s1.add(p.eta_a * (1.0 - p.eta_b) + p.eta_b * (1.0 - p.eta_a));
  }
  BellChannelProbs out;
  out.p0 = s0.value() / n;
  out.pB = sb.value() / n;
  out.p1 = 1.0 - out.p0 - out.pB;
  out.p1_direct = s1.value() / n;
  if (pairs.size() > 1) {
    CompensatedSum c00;
    CompensatedSum c0b;
    CompensatedSum cbb;
    for (const auto& p : pairs) {
      const double d0 = (1.0 - p.eta_a) * (1.0 - p.eta_b) - out.p0;
      const double db = p.eta_a * p.eta_b - out.pB;
      c00.add(d0 * d0);
      c0b.add(d0 * db);
      cbb.add(db * db);
    }
    const double scale = 1.0 / ((n - 1.0) * n);
    out.covariance << c00.value() * scale, c0b.value() * scale, c0b.value() * scale, cbb.value() * scale;
  }
  return out;
}

BellChannelProbs bell_channel_probs(const ChannelScenario& scenario, std::size_t count, std::uint64_t seed) {
  if (is_deterministic(scenario)) return bell_channel_probs(sample_pairs(scenario, 1, seed));
  return bell_channel_probs(sample_pairs(scenario, count, seed));
}

double bell_state_correlation(const BellChannelProbs& probs, const DetectorParams& detector, double theta_a,
                              double theta_b, bool include_double_clicks) {
  detector.validate();
  if (probs.pB == 0.0) return 0.0;
  const BellWeights w = bell_weights(detector, include_double_clicks);
  return -w.k * probs.pB * std::cos(2.0 * (theta_a - theta_b)) / bell_denominator(probs, w);
}

double bell_state_bell_parameter(const BellChannelProbs& probs, const DetectorParams& detector,
                                 bool include_double_clicks) {
  return bell_state_bell_estimate(probs, detector, include_double_clicks).value;
}

Estimate bell_state_bell_estimate(const BellChannelProbs& probs, const DetectorParams& detector,
                                  bool include_double_clicks) {
  detector.validate();
  if (probs.pB == 0.0) return {0.0, 0.0};
  const BellWeights w = bell_weights(detector, include_double_clicks);
  const double k = 2.0 * std::numbers::sqrt2 * w.k;
  const double den = bell_denominator(probs, w);
  const double value = k * probs.pB / den;
  // p1 = 1 - p0 - pB, so the estimate depends on (p0, pB) only.
  Eigen::Vector2d grad;
  grad[0] = -k * probs.pB * (w.w0 - w.w1) / (den * den);
  grad[1] = k / den - k * probs.pB * (w.w_b - w.w1) / (den * den);
  const double var = grad.dot(probs.covariance * grad);
  return {value, std::sqrt(std::max(0.0, var))};
}

}  // namespace bellturb

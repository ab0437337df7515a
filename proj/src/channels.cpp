#include "bellturb/channels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "bellturb/error.hpp"
#include "bellturb/random.hpp"

namespace bellturb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMinFeasibility = 1e-6;
constexpr std::uint64_t kPilotSeed = 0x5EEDF00DULL;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool finite_in(double x, double lo, double hi) { return std::isfinite(x) && x >= lo && x <= hi; }

// Phi(hi) - Phi(lo) without cancellation in either tail.
double normal_mass(double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (lo >= 0.0) return normal_sf(lo) - normal_sf(hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

// Inverse-CDF draw of a standard normal restricted to [lo, hi].
double truncated_normal(double lo, double hi, double u) {
  if (lo >= 0.0) {
    const double q_hi = normal_sf(lo);
    const double q_lo = normal_sf(hi);
    const double q = q_lo + u * (q_hi - q_lo);
    return std::clamp(normal_sf_quantile(q), lo, hi);
  }
  const double p_lo = normal_cdf(lo);
  const double p_hi = normal_cdf(hi);
  const double p = p_lo + u * (p_hi - p_lo);
  return std::clamp(normal_quantile(p), lo, hi);
}

double log_normal_z(const TruncatedLogNormalChannel& c, double eta) {
  if (eta <= 0.0) return -kInf;
  return (std::log(eta) + c.mu) / c.sigma;
}

// Log-normal moments E[eta^k] restricted to standardized [lo, hi].
double truncated_log_normal_raw_moment(const TruncatedLogNormalChannel& c, double lo, double hi, int k) {
  const double mass = normal_mass(lo, hi);
  const double shift = k * c.sigma;
  return std::exp(-k * c.mu + 0.5 * shift * shift) * normal_mass(lo - shift, hi - shift) / mass;
}

// I0(z) - 1 by its power series; z <= 0.5.
double bessel_i0_minus_one(double z) {
  const double q = 0.25 * z * z;
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < 30; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// 1 - exp(-z) I0(z) without cancellation for small z.
double one_minus_scaled_i0(double z) {
  if (z > 0.5) return 1.0 - bessel_i0_scaled(z);
  return -std::expm1(-z) - std::exp(-z) * bessel_i0_minus_one(z);
}

// ln[2 (1 - exp(-z/2)) / (1 - exp(-z) I0(z))]. The ratio minus one is
// [(1 - exp(-z/2))^2 + exp(-z) (I0(z) - 1)] / (1 - exp(-z) I0(z)), a sum of
// positive terms, so the logarithm keeps full relative precision as z -> 0.
double scale_log_term(double z, double denom) {
  if (z > 0.5) return std::log(-2.0 * std::expm1(-0.5 * z) / denom);
  const double h = std::expm1(-0.5 * z);
  return std::log1p((h * h + std::exp(-z) * bessel_i0_minus_one(z)) / denom);
}

struct Beam {
  double w1_sq;
  double w2_sq;
  double p;  // a^2 / W1^2
  double q;  // a^2 / W2^2
};

Beam make_beam(double theta1, double theta2, const EllipticBeamChannel& c) {
  const double w0_sq = c.beam_waist * c.beam_waist;
  const double a_sq = c.aperture * c.aperture;
  Beam b{w0_sq * std::exp(theta1), w0_sq * std::exp(theta2), 0.0, 0.0};
  if (!std::isfinite(b.w1_sq) || !std::isfinite(b.w2_sq) || b.w1_sq <= 0.0 || b.w2_sq <= 0.0) {
    throw EvaluationError("elliptic beam: semiaxis exp(Theta) is not finite");
  }
  b.p = a_sq / b.w1_sq;
  b.q = a_sq / b.w2_sq;
  return b;
}

double centered_transmittance(const Beam& b, double theta1, double theta2, double aperture) {
  // I0(|p-q|) exp(-(p+q)) = [exp(-|p-q|) I0(|p-q|)] exp(-2 min(p,q)).
  const double first = bessel_i0_scaled(std::abs(b.p - b.q)) * std::exp(-2.0 * std::min(b.p, b.q));
  double second = 0.0;
  if (std::abs(theta1 - theta2) >= 1e-9) {
    const double w1 = std::sqrt(b.w1_sq);
    const double w2 = std::sqrt(b.w2_sq);
    const double xi = std::abs(1.0 / w1 - 1.0 / w2);
    const ScaleShape ss = scale_shape(xi, aperture);
    const double ratio = ((w1 + w2) / std::abs(w1 - w2)) / ss.scale;
    second = -2.0 * std::expm1(-0.5 * aperture * aperture * xi * xi) * std::exp(-std::pow(ratio, ss.shape));
  }
  return 1.0 - first - second;
}

double effective_width_sq(const Beam& b, double chi, double aperture) {
  const double a_sq = aperture * aperture;
  const double c2 = std::cos(chi) * std::cos(chi);
  const double s2 = std::sin(chi) * std::sin(chi);
  const double log_arg = std::log(4.0 * a_sq / std::sqrt(b.w1_sq * b.w2_sq)) + b.p * (1.0 + 2.0 * c2) + b.q * (1.0 + 2.0 * s2);
  return 4.0 * a_sq / lambert_w0_of_exp(log_arg);
}

using Draw = std::function<double(Engine&)>;

std::optional<double> exact_exceedance(const TransmittanceModel& model, double x);

void check_feasibility(const TransmittanceModel& model, double threshold);

Draw make_draw(const TransmittanceModel& model, double threshold) {
  return std::visit(
      Overloaded{
          [&](const Deterministic& d) -> Draw {
            if (d.eta0 < threshold) throw FeasibilityError("postselection threshold exceeds deterministic transmittance");
            const double eta = d.eta0;
            return [eta](Engine&) { return eta; };
          },
          [&](const TruncatedLogNormalChannel& c) -> Draw {
            const double hi = c.upper_z();
            const double lo = log_normal_z(c, threshold);
            if (!(lo < hi)) throw FeasibilityError("postselection threshold exceeds eta_m of the log-normal channel");
            const double eta_lo = threshold;
            return [c, lo, hi, eta_lo](Engine& e) {
              const double z = truncated_normal(lo, hi, uniform_open(e));
              return std::clamp(std::exp(c.sigma * z - c.mu), eta_lo, c.eta_m);
            };
          },
          [&](const EllipticBeamChannel& c) -> Draw {
            GaussianSampler sampler(elliptic_moments(c.rytov_sq, c.fresnel, c.beam_waist));
            return [c, sampler, threshold](Engine& e) mutable {
              // Feasibility >= 1e-6 was checked up front; the cap only guards runaway loops.
              for (long attempt = 0; attempt < 200'000'000L; ++attempt) {
                const Vector4 v = sampler(e);
                const double chi = 0.5 * std::numbers::pi * uniform01(e);
                const double eta = elliptic_transmittance(v, chi, c);
                if (eta >= threshold) return eta;
              }
              throw FeasibilityError("elliptic postselection rejection sampling stalled");
            };
          },
          [&](const Postselected& p) -> Draw { return make_draw(*p.inner, std::max(threshold, p.eta_ps)); },
          [&](const Empirical& emp) -> Draw {
            const auto& s = *emp.sorted;
            const auto first = std::lower_bound(s.begin(), s.end(), threshold);
            if (first == s.end()) throw FeasibilityError("no empirical sample reaches the postselection threshold");
            const std::size_t offset = static_cast<std::size_t>(first - s.begin());
            const std::size_t n = s.size() - offset;
            auto data = emp.sorted;
            return [data, offset, n](Engine& e) {
              const std::size_t i = std::min(n - 1, static_cast<std::size_t>(uniform01(e) * static_cast<double>(n)));
              return (*data)[offset + i];
            };
          },
      },
      model.variant());
}

// Acceptance fraction of the elliptic rejection sampler.
double elliptic_pilot_fraction(const EllipticBeamChannel& c, double threshold, std::size_t count) {
  const auto samples = sample_pdt(TransmittanceModel::elliptic_beam(c), count, kPilotSeed);
  const auto hits = std::count_if(samples.begin(), samples.end(), [&](double eta) { return eta >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(count);
}

void check_feasibility(const TransmittanceModel& model, double threshold) {
  if (threshold <= 0.0) {
    if (const auto* p = std::get_if<Postselected>(&model.variant())) check_feasibility(*p->inner, p->eta_ps);
    return;
  }
  if (const auto* p = std::get_if<Postselected>(&model.variant())) {
    check_feasibility(*p->inner, std::max(threshold, p->eta_ps));
    return;
  }
  if (const auto* c = std::get_if<EllipticBeamChannel>(&model.variant())) {
    double fraction = elliptic_pilot_fraction(*c, threshold, 100000);
    if (fraction < 1e-3) fraction = elliptic_pilot_fraction(*c, threshold, 1000000);
    if (fraction < kMinFeasibility) {
      std::ostringstream msg;
      msg << "postselection feasibility " << fraction << " at eta_ps=" << threshold
          << " is below 1e-6; rejection sampling would stall";
      throw FeasibilityError(msg.str());
    }
    return;
  }
  const auto exact = exact_exceedance(model, threshold);
  if (exact && *exact < kMinFeasibility) {
    std::ostringstream msg;
    msg << "postselection feasibility " << *exact << " at eta_ps=" << threshold << " is below 1e-6";
    throw FeasibilityError(msg.str());
  }
}

std::optional<double> exact_exceedance(const TransmittanceModel& model, double x) {
  if (x <= 0.0) return 1.0;
  return std::visit(
      Overloaded{
          [&](const Deterministic& d) -> std::optional<double> { return d.eta0 >= x ? 1.0 : 0.0; },
          [&](const TruncatedLogNormalChannel& c) -> std::optional<double> {
            if (x > c.eta_m) return 0.0;
            return normal_mass(log_normal_z(c, x), c.upper_z()) / c.normalization();
          },
          [&](const EllipticBeamChannel&) -> std::optional<double> { return std::nullopt; },
          [&](const Postselected& p) -> std::optional<double> {
            if (x <= p.eta_ps) return 1.0;
            const auto num = exact_exceedance(*p.inner, x);
            const auto den = exact_exceedance(*p.inner, p.eta_ps);
            if (!num || !den) return std::nullopt;
            if (*den <= 0.0) return 0.0;
            return *num / *den;
          },
          [&](const Empirical& e) -> std::optional<double> {
            const auto& s = *e.sorted;
            const auto first = std::lower_bound(s.begin(), s.end(), x);
            return static_cast<double>(s.end() - first) / static_cast<double>(s.size());
          },
      },
      model.variant());
}

std::optional<PdtMoments> exact_moments_above(const TransmittanceModel& model, double threshold) {
  auto make = [](double mean, double second) {
    PdtMoments m;
    m.mean.value = mean;
    m.second.value = second;
    m.variance.value = std::max(0.0, second - mean * mean);
    return m;
  };
  return std::visit(
      Overloaded{
          [&](const Deterministic& d) -> std::optional<PdtMoments> {
            if (d.eta0 < threshold) throw FeasibilityError("postselection threshold exceeds deterministic transmittance");
            return make(d.eta0, d.eta0 * d.eta0);
          },
          [&](const TruncatedLogNormalChannel& c) -> std::optional<PdtMoments> {
            const double lo = log_normal_z(c, threshold);
            const double hi = c.upper_z();
            if (!(normal_mass(lo, hi) > 0.0)) throw FeasibilityError("empty postselected log-normal range");
            PdtMoments m = make(truncated_log_normal_raw_moment(c, lo, hi, 1), truncated_log_normal_raw_moment(c, lo, hi, 2));
            // Direct central moment avoids cancellation when sigma is tiny.
            return m;
          },
          [&](const EllipticBeamChannel&) -> std::optional<PdtMoments> { return std::nullopt; },
          [&](const Postselected& p) -> std::optional<PdtMoments> {
            return exact_moments_above(*p.inner, std::max(threshold, p.eta_ps));
          },
          [&](const Empirical& e) -> std::optional<PdtMoments> {
            const auto& s = *e.sorted;
            const auto first = std::lower_bound(s.begin(), s.end(), threshold);
            if (first == s.end()) throw FeasibilityError("no empirical sample reaches the postselection threshold");
            CompensatedSum sum;
            CompensatedSum sum_sq;
            const double n = static_cast<double>(s.end() - first);
            for (auto it = first; it != s.end(); ++it) sum.add(*it);
            const double mean = sum.value() / n;
            CompensatedSum central;
            for (auto it = first; it != s.end(); ++it) {
              sum_sq.add(*it * *it);
              central.add((*it - mean) * (*it - mean));
            }
            PdtMoments m = make(mean, sum_sq.value() / n);
            m.variance.value = central.value() / n;
            return m;
          },
      },
      model.variant());
}

}  // namespace

void EllipticBeamChannel::validate() const {
  if (!finite_in(rytov_sq, 0.0, kInf) || !(fresnel > 0.0) || !std::isfinite(fresnel) || !(beam_waist > 0.0) ||
      !std::isfinite(beam_waist) || !(aperture > 0.0) || !std::isfinite(aperture) || !(length > 0.0) ||
      !std::isfinite(length) || !(eta_m > 0.0) || !(eta_m <= 1.0)) {
    throw DomainError("EllipticBeamChannel: parameter outside its valid range");
  }
}

void TruncatedLogNormalChannel::validate() const {
  if (!std::isfinite(mu) || !(sigma > 0.0) || !std::isfinite(sigma) || !(eta_m > 0.0) || !(eta_m <= 1.0)) {
    throw DomainError("TruncatedLogNormalChannel: parameter outside its valid range");
  }
  if (!(normalization() > 0.0)) throw DomainError("TruncatedLogNormalChannel: F(eta_m) vanishes");
}

double TruncatedLogNormalChannel::upper_z() const { return (std::log(eta_m) + mu) / sigma; }

double TruncatedLogNormalChannel::normalization() const { return normal_cdf(upper_z()); }

TransmittanceModel TransmittanceModel::deterministic(double eta0) {
  if (!finite_in(eta0, 0.0, 1.0)) throw DomainError("deterministic transmittance must lie in [0,1]");
  return TransmittanceModel(Deterministic{eta0});
}

TransmittanceModel TransmittanceModel::truncated_log_normal(const TruncatedLogNormalChannel& channel) {
  channel.validate();
  return TransmittanceModel(channel);
}

TransmittanceModel TransmittanceModel::elliptic_beam(const EllipticBeamChannel& channel) {
  channel.validate();
  return TransmittanceModel(channel);
}

TransmittanceModel TransmittanceModel::postselected(const TransmittanceModel& inner, double eta_ps) {
  if (!(eta_ps >= 0.0 && eta_ps < 1.0)) throw DomainError("postselection threshold must lie in [0,1)");
  const auto feasible = exact_exceedance(inner, eta_ps);
  if (feasible && !(*feasible > 0.0)) {
    throw FeasibilityError("inner model never exceeds the postselection threshold " + std::to_string(eta_ps));
  }
  return TransmittanceModel(Postselected{std::make_shared<const TransmittanceModel>(inner), eta_ps});
}

TransmittanceModel TransmittanceModel::empirical(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("empirical model needs at least one sample");
  for (double eta : samples) {
    if (!finite_in(eta, 0.0, 1.0)) throw DomainError("empirical transmittance outside [0,1]");
  }
  std::sort(samples.begin(), samples.end());
  return TransmittanceModel(Empirical{std::make_shared<const std::vector<double>>(std::move(samples))});
}

bool TransmittanceModel::is_deterministic() const {
  return std::visit(Overloaded{
                        [](const Deterministic&) { return true; },
                        [](const Postselected& p) { return p.inner->is_deterministic(); },
                        [](const Empirical& e) { return e.sorted->front() == e.sorted->back(); },
                        [](const auto&) { return false; },
                    },
                    variant_);
}

bool is_deterministic(const ChannelScenario& scenario) {
  return std::visit(Overloaded{
                        [](const Copropagating& c) { return c.model.is_deterministic(); },
                        [](const Counterpropagating& c) {
                          return c.model_a.is_deterministic() && c.model_b.is_deterministic();
                        },
                    },
                    scenario);
}

double rytov_parameter(double cn2, double wavenumber, double length) {
  if (!(cn2 >= 0.0) || !(wavenumber > 0.0) || !(length > 0.0)) throw DomainError("rytov_parameter: invalid input");
  return 1.23 * cn2 * std::pow(wavenumber, 7.0 / 6.0) * std::pow(length, 11.0 / 6.0);
}

double fresnel_parameter(double beam_waist, double wavenumber, double length) {
  if (!(beam_waist > 0.0) || !(wavenumber > 0.0) || !(length > 0.0)) throw DomainError("fresnel_parameter: invalid input");
  return wavenumber * beam_waist * beam_waist / (2.0 * length);
}

GaussianSpec elliptic_moments(double rytov_sq, double fresnel, double beam_waist) {
  if (!(rytov_sq >= 0.0) || !(fresnel > 0.0) || !(beam_waist > 0.0)) throw DomainError("elliptic_moments: invalid input");
  const double s = rytov_sq * std::pow(fresnel, 5.0 / 6.0);
  const double a = 1.0 + 2.96 * s;
  const double a_sq = a * a;

  GaussianSpec spec;
  const double theta = std::log(a_sq / (fresnel * fresnel * std::sqrt(a_sq + 1.2 * s)));
  spec.mean << 0.0, 0.0, theta, theta;

  const double pos = 0.33 * beam_waist * beam_waist * rytov_sq * std::pow(fresnel, -7.0 / 6.0);
  const double var_theta = std::log1p(1.2 * s / a_sq);
  const double cov_theta = std::log1p(-0.8 * s / a_sq);
  spec.covariance(0, 0) = pos;
  spec.covariance(1, 1) = pos;
  spec.covariance(2, 2) = var_theta;
  spec.covariance(3, 3) = var_theta;
  spec.covariance(2, 3) = cov_theta;
  spec.covariance(3, 2) = cov_theta;
  return spec;
}

ScaleShape scale_shape(double xi, double aperture) {
  const double z = aperture * aperture * xi * xi;
  if (!std::isfinite(z)) throw EvaluationError("scale_shape: non-finite argument");
  if (z == 0.0) return {kInf, 2.0};
  double log_term;
  double shape;
  if (z < 1e-6) {
    // Both closed forms are 0/0 at z = 0; the truncated series is exact to rounding here.
    log_term = z * (0.5 + z * (-0.125 + z / 96.0));
    shape = 2.0 + z * z * z / 96.0;
  } else {
    const double denom = one_minus_scaled_i0(z);
    log_term = scale_log_term(z, denom);
    shape = 2.0 * z * bessel_i1_scaled(z) / denom / log_term;
  }
  return {std::pow(log_term, -1.0 / shape), shape};
}

double elliptic_centered_transmittance(double theta1, double theta2, const EllipticBeamChannel& channel) {
  return centered_transmittance(make_beam(theta1, theta2, channel), theta1, theta2, channel.aperture);
}

double elliptic_effective_width_sq(double theta1, double theta2, double chi, const EllipticBeamChannel& channel) {
  return effective_width_sq(make_beam(theta1, theta2, channel), chi, channel.aperture);
}

double elliptic_transmittance(const Vector4& v, double chi, const EllipticBeamChannel& channel) {
  if (!v.allFinite() || !std::isfinite(chi)) throw EvaluationError("elliptic_transmittance: non-finite input");
  const Beam beam = make_beam(v[2], v[3], channel);
  const double eta0 = centered_transmittance(beam, v[2], v[3], channel.aperture);
  const double w_eff_sq = effective_width_sq(beam, chi, channel.aperture);
  const ScaleShape ss = scale_shape(2.0 / std::sqrt(w_eff_sq), channel.aperture);
  const double r0 = std::hypot(v[0], v[1]);
  const double eta = channel.eta_m * eta0 * std::exp(-std::pow((r0 / channel.aperture) / ss.scale, ss.shape));
  if (!std::isfinite(eta)) throw EvaluationError("elliptic_transmittance: non-finite result");
  return std::clamp(eta, 0.0, 1.0);
}

std::vector<double> sample_pdt(const TransmittanceModel& model, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw DomainError("sample_pdt: count must be positive");
  if (const auto* d = std::get_if<Deterministic>(&model.variant())) return std::vector<double>(count, d->eta0);
  check_feasibility(model, 0.0);
  std::vector<double> out(count);
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    Draw draw = make_draw(model, 0.0);
    Engine engine = make_engine(seed, chunk);
    const std::size_t begin = chunk * kChunkSize;
    const std::size_t end = std::min(count, begin + kChunkSize);
    for (std::size_t i = begin; i < end; ++i) out[i] = draw(engine);
  });
  return out;
}

PdtMoments sample_moments(const std::vector<double>& samples) {
  if (samples.empty()) throw DomainError("sample_moments: no samples");
  const double n = static_cast<double>(samples.size());
  CompensatedSum sum;
  CompensatedSum sum_sq;
  for (double eta : samples) {
    sum.add(eta);
    sum_sq.add(eta * eta);
  }
  const double mean = sum.value() / n;
  const double second = sum_sq.value() / n;
  CompensatedSum c2;
  CompensatedSum c4;
  CompensatedSum dev_sq;
  for (double eta : samples) {
    const double d = eta - mean;
    c2.add(d * d);
    c4.add(d * d * d * d);
    const double e = eta * eta - second;
    dev_sq.add(e * e);
  }
  const double var_pop = c2.value() / n;
  const double m4 = c4.value() / n;
  const double denom = std::max(1.0, n - 1.0);

  PdtMoments m;
  m.mean = {mean, std::sqrt(c2.value() / denom / n)};
  m.second = {second, std::sqrt(dev_sq.value() / denom / n)};
  m.variance = {c2.value() / denom, std::sqrt(std::max(0.0, m4 - var_pop * var_pop) / n)};
  return m;
}

PdtMoments pdt_moments(const TransmittanceModel& model, std::size_t count, std::uint64_t seed) {
  if (model.is_deterministic()) {
    const double eta = sample_pdt(model, 1, seed).front();
    PdtMoments m;
    m.mean.value = eta;
    m.second.value = eta * eta;
    return m;
  }
  return sample_moments(sample_pdt(model, count, seed));
}

std::optional<PdtMoments> analytic_moments(const TransmittanceModel& model) { return exact_moments_above(model, 0.0); }

TruncatedLogNormalChannel lognormal_from_moments(double mean, double variance, double eta_m) {
  if (!(mean > 0.0) || !(variance > 0.0) || !std::isfinite(mean) || !std::isfinite(variance)) {
    throw DomainError("lognormal_from_moments: mean and variance must be positive");
  }
  const double ratio = variance / (mean * mean);
  TruncatedLogNormalChannel c;
  c.sigma = std::sqrt(std::log1p(ratio));
  c.mu = -std::log(mean) + 0.5 * std::log1p(ratio);
  c.eta_m = eta_m;
  return c;
}

Estimate exceedance(const TransmittanceModel& model, double eta_ps, const McOptions& mc) {
  if (std::isnan(eta_ps)) throw DomainError("exceedance: NaN threshold");
  if (const auto exact = exact_exceedance(model, eta_ps)) return {*exact, 0.0};

  // Monte Carlo for models with an elliptic-beam component.
  double base = 0.0;
  const TransmittanceModel* inner = &model;
  while (const auto* p = std::get_if<Postselected>(&inner->variant())) {
    base = std::max(base, p->eta_ps);
    inner = p->inner.get();
  }
  if (eta_ps <= base) return {1.0, 0.0};
  const auto samples = sample_pdt(*inner, mc.count, mc.seed);
  const double above_base = static_cast<double>(
      std::count_if(samples.begin(), samples.end(), [&](double eta) { return eta >= base; }));
  const double above = static_cast<double>(
      std::count_if(samples.begin(), samples.end(), [&](double eta) { return eta >= eta_ps; }));
  if (above_base == 0.0) throw FeasibilityError("no Monte Carlo sample reaches the postselection threshold");
  const double p = above / above_base;
  return {p, std::sqrt(p * (1.0 - p) / above_base)};
}

Estimate joint_feasibility(const ChannelScenario& scenario, double eta_ps, const McOptions& mc) {
  return std::visit(Overloaded{
                        [&](const Copropagating& c) { return exceedance(c.model, eta_ps, mc); },
                        [&](const Counterpropagating& c) {
                          const Estimate a = exceedance(c.model_a, eta_ps, {mc.count, mix_seed(mc.seed, 1)});
                          const Estimate b = exceedance(c.model_b, eta_ps, {mc.count, mix_seed(mc.seed, 2)});
                          const double se = std::hypot(a.value * b.std_error, b.value * a.std_error);
                          return Estimate{a.value * b.value, se};
                        },
                    },
                    scenario);
}

std::vector<TransmittancePair> sample_pairs(const ChannelScenario& scenario, std::size_t count, std::uint64_t seed) {
  std::vector<TransmittancePair> pairs(count);
  std::visit(Overloaded{
                 [&](const Copropagating& c) {
                   const auto eta = sample_pdt(c.model, count, seed);
                   for (std::size_t i = 0; i < count; ++i) pairs[i] = {eta[i], eta[i]};
                 },
                 [&](const Counterpropagating& c) {
                   const auto a = sample_pdt(c.model_a, count, mix_seed(seed, 1));
                   const auto b = sample_pdt(c.model_b, count, mix_seed(seed, 2));
                   for (std::size_t i = 0; i < count; ++i) pairs[i] = {a[i], b[i]};
                 },
             },
             scenario);
  return pairs;
}

ChannelScenario postselect(const ChannelScenario& scenario, double eta_ps) {
  return std::visit(Overloaded{
                        [&](const Copropagating& c) -> ChannelScenario {
                          return Copropagating{TransmittanceModel::postselected(c.model, eta_ps)};
                        },
                        [&](const Counterpropagating& c) -> ChannelScenario {
                          return Counterpropagating{TransmittanceModel::postselected(c.model_a, eta_ps),
                                                    TransmittanceModel::postselected(c.model_b, eta_ps)};
                        },
                    },
                    scenario);
}

}  // namespace bellturb

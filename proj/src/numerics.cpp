#include "bellturb/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "bellturb/error.hpp"
#include "bellturb/random.hpp"

namespace bellturb {

namespace {

constexpr double kInvE = 0.36787944117144232160;
constexpr int kMaxIterations = 50;
constexpr double kSeriesLimit = 15.0;
// Largest argument for which exp(x) is finite.
constexpr double kExpOverflow = 709.78;

double lambert_initial_guess(double x) {
  if (x < -0.32) {
    // Branch-point series in p = sqrt(2(ex + 1)).
    const double p = std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0));
  }
  if (x < 3.0) {
    // Winitzki's approximation.
    const double l = std::log1p(x);
    return l * (1.0 - std::log1p(l) / (2.0 + l));
  }
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

// Sum_k (x^2/4)^k / (k! (k+order)!), times (x/2)^order.
double bessel_series(double x, int order) {
  const double q = 0.25 * x * x;
  double term = order == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// exp(-x) I_order(x) for x > kSeriesLimit from the Hankel expansion.
double bessel_asymptotic_scaled(double x, int order) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) >= last) break;
    sum += term;
    last = std::abs(term);
    if (last < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

double bessel_scaled(double x, int order) {
  if (!std::isfinite(x)) throw DomainError("bessel: non-finite argument");
  const double ax = std::abs(x);
  double value = ax <= kSeriesLimit ? bessel_series(ax, order) * std::exp(-ax) : bessel_asymptotic_scaled(ax, order);
  return (order == 1 && x < 0.0) ? -value : value;
}

double bessel_unscaled(double x, int order) {
  if (!std::isfinite(x)) throw DomainError("bessel: non-finite argument");
  const double ax = std::abs(x);
  if (ax <= kSeriesLimit) {
    const double v = bessel_series(ax, order);
    return (order == 1 && x < 0.0) ? -v : v;
  }
  if (ax > kExpOverflow) throw EvaluationError("bessel: exp(" + std::to_string(ax) + ") overflows");
  return bessel_scaled(x, order) * std::exp(ax);
}

const boost::math::normal kStandardNormal{0.0, 1.0};

}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x)) throw DomainError("lambert_w0: NaN argument");
  if (x < -kInvE - 1e-12) throw DomainError("lambert_w0: argument below -1/e");
  if (x == std::numeric_limits<double>::infinity()) return x;
  if (x <= -kInvE) return -1.0;
  if (x == 0.0) return 0.0;

  double w = lambert_initial_guess(x);
  for (int i = 0; i < kMaxIterations; ++i) {
    // Halley step on f(w) = w e^w - x.
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0) break;
    const double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return std::max(w, -1.0);
}

double lambert_w0_of_exp(double log_x) {
  if (std::isnan(log_x)) throw DomainError("lambert_w0_of_exp: NaN argument");
  if (log_x < 500.0) return lambert_w0(std::exp(log_x));
  // Newton on w + ln w = log_x.
  double w = log_x - std::log(log_x);
  for (int i = 0; i < kMaxIterations; ++i) {
    const double f = w + std::log(w) - log_x;
    const double dw = f / (1.0 + 1.0 / w);
    w -= dw;
    if (std::abs(dw) <= 1e-16 * w) break;
  }
  return w;
}

double bessel_i0(double x) { return bessel_unscaled(x, 0); }
double bessel_i1(double x) { return bessel_unscaled(x, 1); }
double bessel_i0_scaled(double x) { return bessel_scaled(x, 0); }
double bessel_i1_scaled(double x) { return bessel_scaled(x, 1); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: probability outside (0,1)");
  return boost::math::quantile(kStandardNormal, p);
}

double normal_sf_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("normal_sf_quantile: probability outside (0,1)");
  return boost::math::quantile(boost::math::complement(kStandardNormal, q));
}

void GaussianSpec::validate() const {
  if (!mean.allFinite() || !covariance.allFinite()) throw DomainError("GaussianSpec: non-finite entry");
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (std::abs(covariance(i, j) - covariance(j, i)) > 1e-12) {
        throw DomainError("GaussianSpec: covariance is not symmetric");
      }
    }
  }
}

Matrix4 symmetric_sqrt(const Matrix4& covariance) {
  const Matrix4 sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(sym);
  if (solver.info() != Eigen::Success) throw FactorizationError("covariance eigendecomposition failed");
  Vector4 values = solver.eigenvalues();
  for (int i = 0; i < 4; ++i) {
    if (values[i] < -1e-12) {
      throw FactorizationError("covariance has eigenvalue " + std::to_string(values[i]) + " below -1e-12");
    }
    values[i] = std::sqrt(std::max(values[i], 0.0));
  }
  const Matrix4& vectors = solver.eigenvectors();
  return vectors * values.asDiagonal() * vectors.transpose();
}

GaussianSampler::GaussianSampler(const GaussianSpec& spec) : mean_(spec.mean) {
  spec.validate();
  root_ = symmetric_sqrt(spec.covariance);
}

std::vector<Vector4> gaussian_sample(const GaussianSpec& spec, std::uint64_t seed, std::size_t count) {
  if (count == 0) throw DomainError("gaussian_sample: count must be positive");
  const GaussianSampler prototype(spec);
  std::vector<Vector4> out(count);
  parallel_for(chunk_count(count), [&](std::size_t chunk) {
    GaussianSampler sampler = prototype;
    Engine engine = make_engine(seed, chunk);
    const std::size_t begin = chunk * kChunkSize;
    const std::size_t end = std::min(count, begin + kChunkSize);
    for (std::size_t i = begin; i < end; ++i) out[i] = sampler(engine);
  });
  return out;
}

}  // namespace bellturb

#pragma once

// Independent reference implementations used only by the tests. Formulas are
// transcribed literally (no regrouping, no scaled functions) and evaluated in
// 50-digit arithmetic with Boost.Math special functions.

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

struct Coefficients {
  Real c0, c1a, c1b, c_same, c_different;
};

inline Coefficients pdc_coefficients(Real xi, Real eta_c, Real eta_a, Real eta_b, Real delta) {
  using boost::multiprecision::tanh;
  using boost::multiprecision::sin;
  using boost::multiprecision::cos;
  const Real t = tanh(xi) * tanh(xi);
  auto brace = [&](Real ea, Real eb) {
    return eta_c * eta_c * ea * eb * t - (1 + (eta_c * ea - 1) * t) * (1 + (eta_c * eb - 1) * t);
  };
  Coefficients k;
  const Real b = brace(eta_a, eta_b);
  k.c0 = b * b;
  k.c1a = eta_c * eta_b * (1 - eta_c * eta_a) * (1 - t) * t * brace(eta_a, eta_b);
  k.c1b = eta_c * eta_a * (1 - eta_c * eta_b) * (1 - t) * t * brace(eta_b, eta_a);
  const Real pre = eta_c * eta_c * eta_a * eta_b * t * (1 - t) * (1 - t);
  const Real x = (1 - eta_c * eta_a) * (1 - eta_c * eta_b) * t;
  k.c_same = pre * (x - sin(delta) * sin(delta));
  k.c_different = pre * (x - cos(delta) * cos(delta));
  return k;
}

// P_same, P_different for one transmittance pair, with or without double clicks.
inline std::pair<Real, Real> pdc_probs(Real xi, Real eta_c, Real nu, Real eta_a, Real eta_b, Real delta, bool dc) {
  using boost::multiprecision::exp;
  using boost::multiprecision::tanh;
  const Coefficients k = pdc_coefficients(xi, eta_c, eta_a, eta_b, delta);
  const Real t = tanh(xi) * tanh(xi);
  const Real u4 = (1 - t) * (1 - t) * (1 - t) * (1 - t);
  const Real s = k.c0 + k.c1a + k.c1b;
  auto p = [&](Real ci, Real cj) -> Real {
    if (dc) {
      return Real(0.5) + exp(-4 * nu) / 2 * u4 *
                             (exp(2 * nu) * (2 / (s + ci) - k.c0 / ((k.c0 + k.c1a) * (k.c0 + k.c1a)) -
                                             k.c0 / ((k.c0 + k.c1b) * (k.c0 + k.c1b)) - 2 / (s + cj)) +
                              1 / k.c0);
    }
    return 2 * u4 *
           (exp(-2 * nu) / (s + ci) - exp(-3 * nu) / (k.c0 + k.c1a) - exp(-3 * nu) / (k.c0 + k.c1b) +
            exp(-4 * nu) / k.c0);
  };
  return {p(k.c_same, k.c_different), p(k.c_different, k.c_same)};
}

inline Real bell_state_correlation(Real p0, Real p1, Real pb, Real eta_c, Real nu, Real delta) {
  using boost::multiprecision::cos;
  using boost::multiprecision::exp;
  const Real e2 = exp(2 * nu);
  return -pb * eta_c * eta_c * e2 * cos(2 * delta) /
         (pb * (e2 + eta_c - 1) * (e2 + eta_c - 1) + p0 * (e2 - 1) * (e2 - 1) + p1 * (e2 - 1) * (e2 + eta_c - 1));
}

inline Real bell_state_bell_nodc(Real p0, Real p1, Real pb, Real eta_c, Real nu) {
  using boost::multiprecision::exp;
  const Real e = exp(nu);
  const Real single = (1 - eta_c) * (e - 2) + e;
  return 2 * boost::math::constants::root_two<Real>() * pb * eta_c * eta_c * exp(2 * nu) /
         (pb * single * single + 2 * p1 * (e - 1) * (eta_c * e + 2 * (e - 1) * (1 - eta_c)) + 4 * p0 * (e - 1) * (e - 1));
}

struct EllipticMoments {
  Real theta_mean, pos_var, theta_var, theta_cov;
};

inline EllipticMoments elliptic_moments(Real rytov_sq, Real omega, Real w0) {
  using boost::multiprecision::log;
  using boost::multiprecision::pow;
  using boost::multiprecision::sqrt;
  const Real s = rytov_sq * pow(omega, Real(5) / 6);
  const Real a = 1 + Real("2.96") * s;
  EllipticMoments m;
  m.theta_mean = log(a * a / (omega * omega * sqrt(a * a + Real("1.2") * s)));
  m.pos_var = Real("0.33") * w0 * w0 * rytov_sq * pow(omega, Real(-7) / 6);
  m.theta_var = log(1 + Real("1.2") * s / (a * a));
  m.theta_cov = log(1 - Real("0.8") * s / (a * a));
  return m;
}

inline Real scale_fn(Real xi, Real a);
inline Real shape_fn(Real xi, Real a) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  const Real z = a * a * xi * xi;
  const Real den = 1 - exp(-z) * boost::math::cyl_bessel_i(0, z);
  return 2 * z * exp(-z) * boost::math::cyl_bessel_i(1, z) / den / log(2 * (1 - exp(-z / 2)) / den);
}
inline Real scale_fn(Real xi, Real a) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::pow;
  const Real z = a * a * xi * xi;
  const Real den = 1 - exp(-z) * boost::math::cyl_bessel_i(0, z);
  return pow(log(2 * (1 - exp(-z / 2)) / den), -1 / shape_fn(xi, a));
}

// eta_m * eta(v, chi) transcribed literally.
inline Real elliptic_transmittance(Real x0, Real y0, Real th1, Real th2, Real chi, Real w0, Real a, Real eta_m) {
  using boost::multiprecision::abs;
  using boost::multiprecision::cos;
  using boost::multiprecision::exp;
  using boost::multiprecision::pow;
  using boost::multiprecision::sin;
  using boost::multiprecision::sqrt;
  const Real w1 = sqrt(w0 * w0 * exp(th1));
  const Real w2 = sqrt(w0 * w0 * exp(th2));
  const Real arg = 4 * a * a / (w1 * w2) * exp(a * a / (w1 * w1) * (1 + 2 * cos(chi) * cos(chi))) *
                   exp(a * a / (w2 * w2) * (1 + 2 * sin(chi) * sin(chi)));
  const Real weff_sq = 4 * a * a / boost::math::lambert_w0(arg);
  const Real d = 1 / w1 - 1 / w2;
  const Real eta0 = 1 -
                    boost::math::cyl_bessel_i(0, a * a * (1 / (w1 * w1) - 1 / (w2 * w2))) *
                        exp(-a * a * (1 / (w1 * w1) + 1 / (w2 * w2))) -
                    2 * (1 - exp(-a * a / 2 * d * d)) *
                        exp(-pow(((w1 + w2) * (w1 + w2) / abs(w1 * w1 - w2 * w2)) / scale_fn(d, a), shape_fn(d, a)));
  const Real r0 = sqrt(x0 * x0 + y0 * y0);
  const Real xi = 2 / sqrt(weff_sq);
  return eta_m * eta0 * exp(-pow((r0 / a) / scale_fn(xi, a), shape_fn(xi, a)));
}

// Truncated log-normal density on [0, eta_m] integrated in u = ln(eta).
template <class F>
double tln_integral(double mu, double sigma, double eta_m, double lo, F&& f) {
  const double pi = boost::math::constants::pi<double>();
  auto g = [&](double u) {
    const double z = (u + mu) / sigma;
    return f(std::exp(u)) * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * pi));
  };
  const double u_lo = lo > 0.0 ? std::log(lo) : -mu - 40.0 * sigma;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, u_lo, std::log(eta_m), 15, 1e-14);
}

}  // namespace oracle

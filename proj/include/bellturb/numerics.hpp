#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace bellturb {

using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;

// Principal branch W0 of the Lambert W function, w*exp(w) = x, x >= -1/e.
double lambert_w0(double x);

// W0(exp(log_x)). Stays finite for arguments whose exponential overflows.
double lambert_w0_of_exp(double log_x);

double bessel_i0(double x);
double bessel_i1(double x);
// exp(-|x|) * I0(x) and exp(-|x|) * I1(x); finite for all finite x.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

double normal_cdf(double z);
// Upper tail 1 - Phi(z) without cancellation.
double normal_sf(double z);
double normal_quantile(double p);
// Inverse of normal_sf.
double normal_sf_quantile(double q);

/// Multivariate Gaussian over v = (x0, y0, Theta1, Theta2).
///
/// Position components are in metres, the log-scale beam parameters are
/// dimensionless. The covariance must be symmetric to 1e-12 and positive
/// semidefinite up to eigenvalues of -1e-12, which are clamped to zero.
struct GaussianSpec {
  Vector4 mean = Vector4::Zero();
  Matrix4 covariance = Matrix4::Zero();

  // Throws DomainError on non-finite entries or asymmetry.
  void validate() const;
};

/// Draws samples mean + S*z with S the symmetric square root of the
/// covariance and z standard normal.
class GaussianSampler {
 public:
  explicit GaussianSampler(const GaussianSpec& spec);

  template <class Engine>
  Vector4 operator()(Engine& engine) {
    Vector4 z;
    for (int i = 0; i < 4; ++i) z[i] = normal_(engine);
    return mean_ + root_ * z;
  }

  const Matrix4& root() const { return root_; }

 private:
  Vector4 mean_;
  Matrix4 root_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Symmetric square root with eigenvalue clamp at -1e-12; FactorizationError below.
Matrix4 symmetric_sqrt(const Matrix4& covariance);

// Deterministic in (seed, count); draws are chunked so the result does not
// depend on the number of worker threads.
std::vector<Vector4> gaussian_sample(const GaussianSpec& spec, std::uint64_t seed, std::size_t count);

}  // namespace bellturb

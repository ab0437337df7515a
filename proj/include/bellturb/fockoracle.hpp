#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "bellturb/photocount.hpp"

namespace bellturb {

/// Brute-force photocounting simulator in a truncated Fock space.
///
/// Each site (A, B) carries two polarization modes; the site basis holds all
/// (n1, n2) with n1 + n2 <= cutoff, which is closed under the polarization
/// rotation. Mode pairs are (H, V) before the analyzer and (T, R) after it.
/// Everything is real: the states, the loss channel and the rotation.

class SiteBasis {
 public:
  explicit SiteBasis(int cutoff);

  int cutoff() const { return cutoff_; }
  int dim() const { return dim_; }
  // -1 when n1 + n2 exceeds the cutoff.
  int index(int n1, int n2) const;
  int n1(int i) const { return occupation_[i][0]; }
  int n2(int i) const { return occupation_[i][1]; }

 private:
  int cutoff_;
  int dim_;
  std::vector<std::array<int, 2>> occupation_;
};

// Pure state over site A (x) site B; basis index a + dim * b.
struct FockState4 {
  int cutoff = 0;
  Eigen::VectorXd amplitudes;

  // Amplitude of |n_HA, n_VA, n_HB, n_VB>, 0 outside the truncated support.
  double amplitude(int n_ha, int n_va, int n_hb, int n_vb) const;
  double norm_sq() const { return amplitudes.squaredNorm(); }
};

struct Density {
  int cutoff = 0;
  Eigen::MatrixXd rho;

  double trace() const { return rho.trace(); }
  double purity() const { return (rho * rho).trace(); }
};

enum class Site { A, B };

// Mode 0/1 are the first/second mode of site A, 2/3 those of site B.
enum class Mode { A1 = 0, A2 = 1, B1 = 2, B2 = 3 };

// Sum_{n > cutoff} (n + 1) tanh^{2n} xi / cosh^4 xi, the norm missing from the truncated state.
double pdc_truncation_tail(double xi, int cutoff);

// Smallest cutoff whose tail is below tol; CutoffError beyond kMaxOracleCutoff.
int pdc_cutoff_for(double xi, double tol = 1e-10);
inline constexpr int kMaxOracleCutoff = 8;

// Two-mode squeezed PDC state; CutoffError when the tail exceeds 1e-8.
FockState4 build_pdc_state(double xi, int cutoff);

// (|1,0;0,1> - |0,1;1,0>) / sqrt(2) in (H_A, V_A; H_B, V_B).
FockState4 build_bell_state(int cutoff = 1);

Density to_density(const FockState4& state);

// Pure-loss channel with transmittance eta on one mode.
Density apply_loss(const Density& density, double eta, Mode mode);

// Analyzer rotation a_H = a_T cos(theta) - a_R sin(theta), a_V = a_T sin(theta) + a_R cos(theta).
Density rotate_site(const Density& density, double theta, Site site);

// Single-site unitary on the (n1, n2) basis implementing the rotation above.
Eigen::MatrixXd site_rotation(const SiteBasis& basis, double theta);

// Probabilities of the 16 click patterns; bit 0: D_TA, 1: D_RA, 2: D_TB, 3: D_RB.
using PatternProbs = std::array<double, 16>;
PatternProbs click_pattern_probs(const Density& density, const DetectorParams& detector);

// P_{i_A i_B} indexed [i_A][i_B] with 0 = T, 1 = R.
struct JointProbs {
  std::array<std::array<double, 2>, 2> p{};

  double same() const { return p[0][0] + p[1][1]; }
  double different() const { return p[0][1] + p[1][0]; }
};

// Squash assignment: double clicks on one side split 1/2, on both sides 1/4.
JointProbs squash(const PatternProbs& patterns);
// Only single-click / single-click patterns.
JointProbs single_clicks(const PatternProbs& patterns);

// P(at least one click at A and at least one click at B).
double coincidence_probability(const PatternProbs& patterns);

// Full pipeline at fixed transmittances. cutoff <= 0 picks pdc_cutoff_for(xi).
PatternProbs oracle_patterns(const SourceModel& source, double eta_a, double eta_b, double theta_a, double theta_b,
                             const DetectorParams& detector, int cutoff = 0);
JointProbs oracle_joint_probs(const SourceModel& source, double eta_a, double eta_b, double theta_a, double theta_b,
                              const DetectorParams& detector, bool include_double_clicks, int cutoff = 0);

}  // namespace bellturb

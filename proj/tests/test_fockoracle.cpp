#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "bellturb/chsh.hpp"
#include "bellturb/error.hpp"
#include "bellturb/fockoracle.hpp"
#include "bellturb/random.hpp"

using namespace bellturb;

namespace {

constexpr double kPi = std::numbers::pi;

// Density with a single photon-number configuration on the four modes.
Density number_state(int cutoff, int n_ha, int n_va, int n_hb, int n_vb) {
  FockState4 s;
  s.cutoff = cutoff;
  const SiteBasis basis(cutoff);
  s.amplitudes = Eigen::VectorXd::Zero(basis.dim() * basis.dim());
  s.amplitudes[basis.index(n_ha, n_va) + basis.dim() * basis.index(n_hb, n_vb)] = 1.0;
  return to_density(s);
}

double population(const Density& d, int n_ha, int n_va, int n_hb, int n_vb) {
  const SiteBasis basis(d.cutoff);
  const int i = basis.index(n_ha, n_va) + basis.dim() * basis.index(n_hb, n_vb);
  return d.rho(i, i);
}

PatternProbs only(int pattern, double mass) {
  PatternProbs p{};
  p[pattern] = mass;
  return p;
}

}  // namespace

TEST(SiteBasis, EnumeratesTruncatedSupport) {
  const SiteBasis b(3);
  EXPECT_EQ(b.dim(), 10);
  for (int i = 0; i < b.dim(); ++i) EXPECT_EQ(b.index(b.n1(i), b.n2(i)), i);
  EXPECT_EQ(b.index(2, 2), -1);
}

TEST(PdcState, VacuumAtZeroSqueezing) {
  const auto s = build_pdc_state(0.0, 4);
  EXPECT_EQ(s.amplitude(0, 0, 0, 0), 1.0);
  EXPECT_EQ(s.norm_sq(), 1.0);
}

TEST(PdcState, OnePairComponentIsTheSinglet) {
  const double xi = 0.2;
  const auto pdc = build_pdc_state(xi, 6);
  const auto bell = build_bell_state(6);
  const double c = std::cosh(xi);
  EXPECT_NEAR(std::abs(pdc.amplitudes.dot(bell.amplitudes)), std::sqrt(2.0) * std::tanh(xi) / (c * c), 1e-15);
}

TEST(PdcState, NormMissesOnlyTheAnalyticTail) {
  const double t = std::tanh(0.2) * std::tanh(0.2);
  double tail = 0.0;
  for (int n = 7; n < 400; ++n) tail += (n + 1) * std::pow(t, n) * (1 - t) * (1 - t);
  EXPECT_NEAR(pdc_truncation_tail(0.2, 6), tail, 1e-22);
  EXPECT_NEAR(build_pdc_state(0.2, 6).norm_sq(), 1.0 - tail, 1e-14);
}

TEST(PdcState, CutoffSelectionAndDiagnostics) {
  EXPECT_LT(pdc_truncation_tail(0.2, pdc_cutoff_for(0.2)), 1e-10);
  EXPECT_GE(pdc_truncation_tail(0.2, pdc_cutoff_for(0.2) - 1), 1e-10);
  EXPECT_THROW(pdc_cutoff_for(0.5), CutoffError);
  EXPECT_THROW(build_pdc_state(0.4, 3), CutoffError);
  EXPECT_THROW(build_bell_state(0), CutoffError);
}

TEST(Loss, UnitTransmittanceIsIdentity) {
  const auto d = to_density(build_pdc_state(0.1, 4));
  EXPECT_LT((apply_loss(d, 1.0, Mode::A2).rho - d.rho).norm(), 1e-15);
}

TEST(Loss, FullLossEmptiesTheMode) {
  const auto d = apply_loss(number_state(2, 0, 0, 1, 0), 0.0, Mode::B1);
  EXPECT_NEAR(population(d, 0, 0, 0, 0), 1.0, 1e-15);
}

TEST(Loss, BinomialPopulations) {
  const auto d = apply_loss(number_state(2, 2, 0, 0, 0), 0.5, Mode::A1);
  EXPECT_NEAR(population(d, 2, 0, 0, 0), 0.25, 1e-15);
  EXPECT_NEAR(population(d, 1, 0, 0, 0), 0.5, 1e-15);
  EXPECT_NEAR(population(d, 0, 0, 0, 0), 0.25, 1e-15);
}

TEST(Rotation, ZeroAngleIsIdentityAndQuarterTurnSwapsModes) {
  const auto d = number_state(2, 1, 0, 0, 0);
  EXPECT_LT((rotate_site(d, 0.0, Site::A).rho - d.rho).norm(), 1e-15);
  const auto r = rotate_site(d, kPi / 2, Site::A);
  EXPECT_NEAR(population(r, 0, 1, 0, 0), 1.0, 1e-15);
}

TEST(Rotation, MalusLaw) {
  const DetectorParams ideal{1.0, 0.0};
  for (double theta = 0.0; theta < kPi; theta += 0.1) {
    const auto p = click_pattern_probs(rotate_site(number_state(1, 1, 0, 0, 0), theta, Site::A), ideal);
    EXPECT_NEAR(p[0b0001], std::cos(theta) * std::cos(theta), 1e-14) << theta;
  }
}

TEST(Rotation, SiteRotationIsOrthogonal) {
  const SiteBasis b(5);
  const auto u = site_rotation(b, 0.7);
  EXPECT_LT((u.transpose() * u - Eigen::MatrixXd::Identity(b.dim(), b.dim())).norm(), 1e-13);
}

TEST(ChannelOps, PreserveTraceAndRotationPreservesPurity) {
  Engine rng(mix_seed(51, 0));
  for (int i = 0; i < 20; ++i) {
    auto d = to_density(build_pdc_state(0.05 + 0.15 * uniform01(rng), 6));
    const double tr = d.trace();
    d = apply_loss(d, uniform01(rng), static_cast<Mode>(i % 4));
    EXPECT_NEAR(d.trace(), tr, 1e-10);
    const double purity = d.purity();
    d = rotate_site(d, kPi * uniform01(rng), i % 2 ? Site::A : Site::B);
    EXPECT_NEAR(d.trace(), tr, 1e-10);
    EXPECT_NEAR(d.purity(), purity, 1e-10);
  }
}

TEST(ClickPatterns, VacuumAndNoise) {
  const auto vac = number_state(1, 0, 0, 0, 0);
  EXPECT_NEAR(click_pattern_probs(vac, {0.6, 0.0})[0], 1.0, 1e-15);
  const double nu = 0.02;
  const auto p = click_pattern_probs(vac, {0.6, nu});
  double click_ta = 0.0;
  for (int k = 0; k < 16; ++k)
    if (k & 1) click_ta += p[k];
  EXPECT_NEAR(click_ta, 1.0 - std::exp(-nu), 1e-15);
}

TEST(ClickPatterns, SinglePhotonEfficiency) {
  const auto p = click_pattern_probs(number_state(1, 0, 0, 0, 1), {0.6, 0.0});
  EXPECT_NEAR(p[0b1000], 0.6, 1e-15);
  EXPECT_NEAR(p[0], 0.4, 1e-15);
}

TEST(ClickPatterns, SumToOne) {
  Engine rng(mix_seed(52, 0));
  for (int i = 0; i < 200; ++i) {
    const auto p = oracle_patterns(PdcSource{0.25 * uniform01(rng)}, uniform01(rng), uniform01(rng),
                                   kPi * uniform01(rng), kPi * uniform01(rng),
                                   {0.05 + 0.95 * uniform01(rng), 0.01 * uniform01(rng)});
    double s = 0.0;
    for (double x : p) {
      EXPECT_GE(x, -1e-15);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-10);
  }
}

TEST(Squash, WeightsPerDoubleClick) {
  const auto a = squash(only(0b0101, 0.3));
  EXPECT_EQ(a.p[0][0], 0.3);
  EXPECT_EQ(a.same() + a.different(), 0.3);
  const auto b = squash(only(0b0111, 0.3));
  EXPECT_EQ(b.p[0][0], 0.15);
  EXPECT_EQ(b.p[1][0], 0.15);
  EXPECT_EQ(b.p[0][1], 0.0);
  const auto c = squash(only(0b1111, 0.4));
  for (auto& row : c.p)
    for (double x : row) EXPECT_EQ(x, 0.1);
  const auto d = single_clicks(only(0b1111, 0.4));
  EXPECT_EQ(d.same() + d.different(), 0.0);
  EXPECT_EQ(coincidence_probability(only(0b1111, 0.4)), 0.4);
}

TEST(OracleJointProbs, IdealSinglet) {
  const auto j = oracle_joint_probs(BellStateSource{}, 1.0, 1.0, 0.0, kPi / 8, {1.0, 0.0}, true);
  EXPECT_NEAR(j.same() + j.different(), 1.0, 1e-14);
  EXPECT_NEAR(correlation(j.same(), j.different()), -std::cos(kPi / 4), 1e-14);
}

TEST(OracleJointProbs, VacuumSource) {
  const auto j = oracle_joint_probs(PdcSource{0.0}, 0.7, 0.3, 0.0, 0.4, {0.6, 0.0}, true);
  EXPECT_EQ(j.same() + j.different(), 0.0);
}

TEST(OracleJointProbs, BellStateMatchesClosedForm) {
  Engine rng(mix_seed(53, 0));
  for (int i = 0; i < 50; ++i) {
    const double ea = uniform01(rng), eb = uniform01(rng);
    const DetectorParams det{0.05 + 0.95 * uniform01(rng), 0.02 * uniform01(rng)};
    const double ta = kPi * uniform01(rng), tb = kPi * uniform01(rng);
    BellChannelProbs probs;
    probs.pB = ea * eb;
    probs.p0 = (1 - ea) * (1 - eb);
    probs.p1 = 1 - probs.pB - probs.p0;
    for (bool dc : {true, false}) {
      const auto j = oracle_joint_probs(BellStateSource{}, ea, eb, ta, tb, det, dc);
      if (j.same() + j.different() == 0.0) continue;
      EXPECT_NEAR(correlation(j.same(), j.different()), bell_state_correlation(probs, det, ta, tb, dc), 1e-8) << i;
    }
  }
}

// Closed-form click probabilities against the brute-force simulation on the
// full 108-point grid: 3 xi x 2 eta_c x 2 nu x 3 transmittance pairs x 3 angles.
TEST(OracleJointProbs, ClosedFormsAgreeOnGrid) {
  const std::array<TransmittancePair, 3> etas{{{1.0, 1.0}, {0.7, 0.3}, {0.1, 0.1}}};
  int points = 0;
  for (double xi : {0.05, 0.1, 0.2})
    for (double eta_c : {0.3, 0.6})
      for (double nu : {0.0, 1e-3})
        for (const auto& e : etas)
          for (double delta : {0.0, kPi / 8, kPi / 4}) {
            const DetectorParams det{eta_c, nu};
            const std::span<const TransmittancePair> one(&e, 1);
            for (bool dc : {true, false}) {
              const auto j = oracle_joint_probs(PdcSource{xi}, e.eta_a, e.eta_b, delta, 0.0, det, dc);
              const auto c = pdc_click_probs(xi, det, one, delta, dc);
              EXPECT_NEAR(c.p_same, j.same(), 1e-6);
              EXPECT_NEAR(c.p_different, j.different(), 1e-6);
            }
            ++points;
          }
  EXPECT_EQ(points, 108);
}

TEST(OracleJointProbs, ReferenceOperatingPoint) {
  const DetectorParams det{0.6, 1e-3};
  const TransmittancePair e{0.7, 0.3};
  for (bool dc : {true, false}) {
    const auto j = oracle_joint_probs(PdcSource{0.1}, 0.7, 0.3, kPi / 8, 0.0, det, dc);
    const auto c = pdc_click_probs(0.1, det, std::span<const TransmittancePair>(&e, 1), kPi / 8, dc);
    EXPECT_NEAR(c.p_same, j.same(), 1e-6);
    EXPECT_NEAR(c.p_different, j.different(), 1e-6);
  }
}

// Throwing away double clicks conditions on the outcome, so the quantum bound no longer
// applies. The brute-force model shows the same excess as the closed form.
TEST(OracleJointProbs, DiscardingDoubleClicksCanExceedTsirelson) {
  const double xi = 0.2, eta = 0.95;
  const DetectorParams det{0.95, 0.0};
  auto e = [&](double a, double b) {
    const auto j = oracle_joint_probs(PdcSource{xi}, eta, eta, a, b, det, false);
    return correlation(j.same(), j.different());
  };
  const double oracle_b = bell_parameter(e(0, kPi / 8), e(0, 3 * kPi / 8), e(kPi / 4, 3 * kPi / 8), e(kPi / 4, kPi / 8));
  const std::vector<TransmittancePair> pairs{{eta, eta}};
  const BellResult r = maximize_bell(PdcSource{xi}, pairs, det, false);
  EXPECT_NEAR(r.canonical_value, oracle_b, 1e-9);
  EXPECT_GT(oracle_b, 2.0 * std::numbers::sqrt2 + 1e-3);
  EXPECT_LT(maximize_bell(PdcSource{xi}, pairs, det, true).bell_value, 2.0 * std::numbers::sqrt2);
}

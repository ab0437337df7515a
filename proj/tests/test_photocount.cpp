#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "bellturb/error.hpp"
#include "bellturb/photocount.hpp"
#include "bellturb/random.hpp"
#include "oracles.hpp"

using namespace bellturb;

namespace {

constexpr double kPi = std::numbers::pi;
const double kTsirelson = 2.0 * std::numbers::sqrt2;

ClickProbs single_pair(double xi, const DetectorParams& det, double eta_a, double eta_b, double delta, bool dc) {
  const TransmittancePair p{eta_a, eta_b};
  return pdc_click_probs(xi, det, std::span<const TransmittancePair>(&p, 1), delta, dc);
}

BellChannelProbs probs(double p0, double p1, double pb) {
  BellChannelProbs b;
  b.p0 = p0;
  b.p1 = p1;
  b.pB = pb;
  b.p1_direct = p1;
  return b;
}

}  // namespace

TEST(PdcCoefficients, VacuumSource) {
  const auto c = pdc_coefficients(0.0, {0.6, 0.01}, 0.7, 0.3, 0.4);
  EXPECT_EQ(c.c0, 1.0);
  EXPECT_EQ(c.c1a, 0.0);
  EXPECT_EQ(c.c1b, 0.0);
  EXPECT_EQ(c.c_same, 0.0);
  EXPECT_EQ(c.c_different, 0.0);
}

TEST(PdcCoefficients, QuarterTurnSwapsSameAndDifferent) {
  const DetectorParams det{0.6, 0.0};
  for (double d : {0.0, 0.3, kPi / 8, 1.1}) {
    const auto a = pdc_coefficients(0.2, det, 0.7, 0.3, d);
    const auto b = pdc_coefficients(0.2, det, 0.7, 0.3, d + kPi / 2);
    EXPECT_NEAR(a.c_same, b.c_different, 1e-17);
    EXPECT_NEAR(a.c_different, b.c_same, 1e-17);
  }
}

TEST(PdcCoefficients, ReferencePoint) {
  const auto c = pdc_coefficients(0.2, {0.6, 0.0}, 0.7, 0.3, kPi / 8);
  EXPECT_NEAR(c.c0, 0.8896956978736321, 1e-15);
  EXPECT_NEAR(c.c1a, -0.0036868014638145251, 1e-17);
  EXPECT_NEAR(c.c1b, -0.012162207127755962, 1e-17);
  EXPECT_NEAR(c.c_same, -0.00034795813099579187, 1e-18);
  EXPECT_NEAR(c.c_different, -0.0022713957997524122, 1e-18);
}

TEST(PdcCoefficients, AgreeWithDirectTranscription) {
  Engine rng(mix_seed(31, 0));
  for (int i = 0; i < 300; ++i) {
    const double xi = 1e-4 + 0.5 * uniform01(rng), eta_c = 0.05 + 0.95 * uniform01(rng);
    const double ea = uniform01(rng), eb = uniform01(rng), d = kPi * uniform01(rng);
    const auto lib = pdc_coefficients(xi, {eta_c, 0.0}, ea, eb, d);
    const auto ref = oracle::pdc_coefficients(xi, eta_c, ea, eb, d);
    EXPECT_NEAR(lib.c0, static_cast<double>(ref.c0), 1e-14);
    EXPECT_NEAR(lib.c1a, static_cast<double>(ref.c1a), 1e-14);
    EXPECT_NEAR(lib.c1b, static_cast<double>(ref.c1b), 1e-14);
    EXPECT_NEAR(lib.c_same, static_cast<double>(ref.c_same), 1e-14);
    EXPECT_NEAR(lib.c_different, static_cast<double>(ref.c_different), 1e-14);
  }
}

TEST(PdcClickProbs, VacuumNeverClicks) {
  for (bool dc : {true, false}) {
    const auto p = single_pair(0.0, {0.6, 0.0}, 0.7, 0.3, 0.2, dc);
    EXPECT_EQ(p.p_same, 0.0);
    EXPECT_EQ(p.p_different, 0.0);
  }
}

TEST(PdcClickProbs, ReferencePoint) {
  const DetectorParams det{0.6, 1e-3};
  const auto dc = single_pair(0.2, det, 0.7, 0.3, kPi / 8, true);
  EXPECT_NEAR(dc.p_same, 0.0011051821860970614, 1e-15);
  EXPECT_NEAR(dc.p_different, 0.0054069164901048718, 1e-15);
  const auto nodc = single_pair(0.2, det, 0.7, 0.3, kPi / 8, false);
  EXPECT_NEAR(nodc.p_same, 0.0010353036072445066, 1e-15);
  EXPECT_NEAR(nodc.p_different, 0.005337037911252317, 1e-15);
}

TEST(PdcClickProbs, AgreeWithDirectTranscription) {
  Engine rng(mix_seed(32, 0));
  for (int i = 0; i < 300; ++i) {
    const double xi = 0.01 + 0.5 * uniform01(rng), eta_c = 0.05 + 0.95 * uniform01(rng);
    const double nu = 0.05 * uniform01(rng) * uniform01(rng);
    const double ea = 0.01 + 0.99 * uniform01(rng), eb = 0.01 + 0.99 * uniform01(rng), d = kPi * uniform01(rng);
    for (bool dc : {true, false}) {
      const auto lib = single_pair(xi, {eta_c, nu}, ea, eb, d, dc);
      const auto ref = oracle::pdc_probs(xi, eta_c, nu, ea, eb, d, dc);
      EXPECT_NEAR(lib.p_same, static_cast<double>(ref.first), 1e-12) << i;
      EXPECT_NEAR(lib.p_different, static_cast<double>(ref.second), 1e-12) << i;
    }
  }
}

TEST(PdcClickProbs, ExchangeSymmetry) {
  Engine rng(mix_seed(33, 0));
  for (int i = 0; i < 200; ++i) {
    const double xi = 0.5 * uniform01(rng);
    const DetectorParams det{0.05 + 0.95 * uniform01(rng), 0.01 * uniform01(rng)};
    std::vector<TransmittancePair> pairs(5), swapped(5);
    for (int k = 0; k < 5; ++k) {
      pairs[k] = {uniform01(rng), uniform01(rng)};
      swapped[k] = {pairs[k].eta_b, pairs[k].eta_a};
    }
    const double d = kPi * uniform01(rng);
    for (bool dc : {true, false}) {
      const auto a = pdc_click_probs(xi, det, pairs, d, dc);
      const auto b = pdc_click_probs(xi, det, swapped, d, dc);
      EXPECT_NEAR(a.p_same, b.p_same, 1e-15);
      EXPECT_NEAR(a.p_different, b.p_different, 1e-15);
    }
  }
}

TEST(PdcClickProbs, AveragingIsLinearOverPairs) {
  const DetectorParams det{0.3, 1.7e-5};
  const std::vector<TransmittancePair> pairs{{0.01, 0.01}, {0.002, 0.002}, {0.03, 0.03}};
  const auto mean = pdc_click_probs(0.15, det, pairs, 0.3, true);
  double s = 0.0;
  for (const auto& p : pairs) s += single_pair(0.15, det, p.eta_a, p.eta_b, 0.3, true).p_same;
  EXPECT_NEAR(mean.p_same, s / 3.0, 1e-17);
  EXPECT_GT(mean.same_std_error, 0.0);
}

TEST(PdcClickProbs, FuzzRangesAndPartition) {
  Engine rng(mix_seed(34, 0));
  for (int i = 0; i < 10000; ++i) {
    const double xi = 0.8 * uniform01(rng);
    const DetectorParams det{1e-3 + (1.0 - 1e-3) * uniform01(rng), uniform01(rng) < 0.2 ? 0.0 : 0.1 * uniform01(rng)};
    const double ea = uniform01(rng), eb = uniform01(rng), d = 2.0 * kPi * uniform01(rng);
    const bool dc = i % 2 == 0;
    const auto p = single_pair(xi, det, ea, eb, d, dc);
    ASSERT_GE(p.p_same, 0.0) << i;
    ASSERT_GE(p.p_different, 0.0) << i;
    ASSERT_LE(p.p_same + p.p_different, 1.0 + 1e-12) << i;
  }
}

TEST(PdcKernel, MatchesDirectEvaluation) {
  const DetectorParams det{0.6, 4e-4};
  const std::vector<TransmittancePair> pairs{{0.3, 0.2}, {0.01, 0.5}, {0.9, 0.9}};
  for (bool dc : {true, false}) {
    const PdcKernel k(0.25, det, pairs, dc);
    for (double d : {0.0, 0.2, kPi / 8, 2.0}) {
      const auto a = k.mean(d);
      const auto b = pdc_click_probs(0.25, det, pairs, d, dc);
      EXPECT_NEAR(a.p_same, b.p_same, 1e-16);
      EXPECT_NEAR(a.p_different, b.p_different, 1e-16);
    }
  }
}

TEST(BellChannelProbs, DeterministicScenarios) {
  const auto co = bell_channel_probs(Copropagating{TransmittanceModel::deterministic(0.3)}, 1000, 0);
  EXPECT_NEAR(co.pB, 0.09, 1e-16);
  EXPECT_NEAR(co.p0, 0.49, 1e-16);
  EXPECT_NEAR(co.p1, 0.42, 1e-15);
  EXPECT_NEAR(co.p1_direct, 0.42, 1e-15);
  EXPECT_EQ(co.covariance.norm(), 0.0);
  const auto counter = bell_channel_probs(
      Counterpropagating{TransmittanceModel::deterministic(0.2), TransmittanceModel::deterministic(0.6)}, 1000, 0);
  EXPECT_NEAR(counter.pB, 0.12, 1e-16);
}

TEST(BellChannelProbs, CopropagationFadingRaisesSecondMoment) {
  const auto strong = TransmittanceModel::truncated_log_normal({7.49, 1.08, 0.04});
  const auto b = bell_channel_probs(Copropagating{strong}, 100000, 5);
  const PdtMoments m = pdt_moments(strong, 100000, 5);
  EXPECT_NEAR(b.p0 + b.p1 + b.pB, 1.0, 1e-15);
  EXPECT_NEAR(b.p1, b.p1_direct, 1e-12);
  EXPECT_GE(b.pB, m.mean.value * m.mean.value - 3.0 * std::sqrt(b.covariance(1, 1)));
}

TEST(BellStateCorrelation, TrivialCases) {
  const auto p = probs(0.2, 0.3, 0.5);
  for (double d : {0.0, 0.3, kPi / 8, 1.0}) {
    EXPECT_NEAR(bell_state_correlation(p, {0.6, 0.0}, d, 0.0), -std::cos(2.0 * d), 1e-15);
    EXPECT_NEAR(bell_state_correlation(p, {0.6, 0.0}, d, 0.0, false), -std::cos(2.0 * d), 1e-15);
  }
  EXPECT_NEAR(bell_state_correlation(p, {0.6, 0.01}, kPi / 4, 0.0), 0.0, 1e-16);
}

TEST(BellStateCorrelation, ReferencePoint) {
  const auto p = probs(0.25, 0.5, 0.25);
  const DetectorParams det{0.6, 0.01};
  EXPECT_NEAR(bell_state_correlation(p, det, 0.0, kPi / 8), -0.63323820778469019, 1e-14);
  // At the canonical angles |E11 - E12| + |E22 + E21| = 4 |E(pi/8)|.
  EXPECT_NEAR(bell_state_bell_parameter(p, det, true), 4.0 * 0.63323820778469019, 1e-13);
  EXPECT_NEAR(bell_state_bell_parameter(p, det, false), 2.582981043376651, 1e-13);
}

TEST(BellStateBell, IdealLimitAndEmptyChannel) {
  EXPECT_NEAR(bell_state_bell_parameter(probs(0.1, 0.2, 0.7), {0.37, 0.0}, true), kTsirelson, 1e-12);
  EXPECT_NEAR(bell_state_bell_parameter(probs(0.1, 0.2, 0.7), {0.37, 0.0}, false), kTsirelson, 1e-12);
  EXPECT_EQ(bell_state_bell_parameter(probs(0.5, 0.5, 0.0), {0.6, 0.01}, true), 0.0);
}

TEST(BellStateBell, FuzzBounded) {
  Engine rng(mix_seed(35, 0));
  for (int i = 0; i < 10000; ++i) {
    const double pb = uniform01(rng), p0 = (1.0 - pb) * uniform01(rng);
    const auto p = probs(p0, 1.0 - pb - p0, pb);
    const DetectorParams det{1e-3 + (1.0 - 1e-3) * uniform01(rng), 0.1 * uniform01(rng)};
    for (bool dc : {true, false}) ASSERT_LE(bell_state_bell_parameter(p, det, dc), kTsirelson + 1e-9);
    const double e = bell_state_correlation(p, det, kPi * uniform01(rng), kPi * uniform01(rng), i % 2 == 0);
    ASSERT_LE(std::abs(e), 1.0);
  }
}

// With counterpropagating channels pB = <eta_A><eta_B>, so fading and the
// deterministic channel at the mean give the same Bell parameter.
TEST(BellStateBell, FactorizedMomentsMatchDeterministicChannel) {
  const double m = 0.00099897029977882683;
  const auto det_probs =
      bell_channel_probs(Counterpropagating{TransmittanceModel::deterministic(m), TransmittanceModel::deterministic(m)},
                         1000, 0);
  const auto factorized = probs((1.0 - m) * (1.0 - m), 2.0 * m * (1.0 - m), m * m);
  const DetectorParams det{0.6, 1.7e-5};
  for (bool dc : {true, false}) {
    EXPECT_NEAR(bell_state_bell_parameter(factorized, det, dc), bell_state_bell_parameter(det_probs, det, dc), 1e-12);
  }
}

TEST(BellStateBell, EstimateCarriesDeltaMethodError) {
  const auto strong = TransmittanceModel::truncated_log_normal({7.49, 1.08, 0.04});
  const auto b = bell_channel_probs(Copropagating{strong}, 100000, 9);
  const DetectorParams det{0.3, 1.7e-5};
  const Estimate e = bell_state_bell_estimate(b, det, true);
  EXPECT_DOUBLE_EQ(e.value, bell_state_bell_parameter(b, det, true));
  EXPECT_GT(e.std_error, 0.0);
  EXPECT_LT(e.std_error, 0.1 * e.value);
}

TEST(DetectorParams, Validation) {
  EXPECT_THROW((DetectorParams{0.0, 0.0}.validate()), DomainError);
  EXPECT_THROW((DetectorParams{1.1, 0.0}.validate()), DomainError);
  EXPECT_THROW((DetectorParams{0.5, -1e-3}.validate()), DomainError);
  EXPECT_NO_THROW((DetectorParams{1.0, 0.0}.validate()));
}

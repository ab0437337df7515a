#include "bellturb/chsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <variant>
#include <vector>

#include "bellturb/error.hpp"
#include "bellturb/random.hpp"

namespace bellturb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTolerance = 1e-6;
constexpr int kMaxEvaluations = 500;
constexpr double kInitialStep = 0.1;

double reduce_angle(double x) {
  double r = std::fmod(x, kPi);
  if (r < 0.0) r += kPi;
  if (r >= kPi) r = 0.0;
  return r;
}

AngleSettings from_offsets(const std::array<double, 3>& x) { return {0.0, x[0], x[1], x[2]}; }

// Angle differences theta_A - theta_B for E11, E12, E22, E21.
std::array<double, 4> differences(const AngleSettings& s) {
  return {s.theta_a1 - s.theta_b1, s.theta_a1 - s.theta_b2, s.theta_a2 - s.theta_b2, s.theta_a2 - s.theta_b1};
}

double sign(double x) { return x >= 0.0 ? 1.0 : -1.0; }

double bell_value_at(const PdcKernel& kernel, const AngleSettings& settings) {
  const auto d = differences(settings);
  std::array<double, 4> e{};
  for (int k = 0; k < 4; ++k) {
    const ClickProbs p = kernel.mean(d[k]);
    e[k] = correlation(p.p_same, p.p_different);
  }
  return bell_parameter(e[0], e[1], e[2], e[3]);
}

bool lexicographically_less(const AngleSettings& a, const AngleSettings& b) {
  return a.as_array() < b.as_array();
}

BellResult bell_state_result(const BellChannelProbs& probs, const DetectorParams& detector,
                             bool include_double_clicks) {
  BellResult r;
  r.settings = AngleSettings::canonical();
  const auto d = differences(r.settings);
  for (int k = 0; k < 4; ++k) {
    r.correlations[k] = bell_state_correlation(probs, detector, d[k], 0.0, include_double_clicks);
  }
  const Estimate b = bell_state_bell_estimate(probs, detector, include_double_clicks);
  r.bell_value = b.value;
  r.std_error = b.std_error;
  r.canonical_value = b.value;
  r.canonical_std_error = b.std_error;
  return r;
}

}  // namespace

AngleSettings AngleSettings::canonical() { return {0.0, kPi / 8.0, kPi / 4.0, 3.0 * kPi / 8.0}; }

AngleSettings AngleSettings::reduced() const {
  return {reduce_angle(theta_a1), reduce_angle(theta_b1), reduce_angle(theta_a2), reduce_angle(theta_b2)};
}

double correlation(double p_same, double p_different) {
  const double total = p_same + p_different;
  if (!(total > 0.0)) throw UndefinedCorrelation("correlation undefined: P_same + P_different = 0");
  return (p_same - p_different) / total;
}

double bell_parameter(double e11, double e12, double e22, double e21) {
  return std::abs(e11 - e12) + std::abs(e22 + e21);
}

BellResult evaluate_bell(const PdcKernel& kernel, const AngleSettings& settings) {
  const auto d = differences(settings);
  const std::size_t n = kernel.size();

  // Per-pair P_same, P_different at each of the four differences.
  std::array<std::vector<double>, 8> values;
  std::array<double, 8> means{};
  for (int k = 0; k < 4; ++k) {
    kernel.per_pair(d[k], values[2 * k], values[2 * k + 1]);
    for (int j = 0; j < 2; ++j) {
      CompensatedSum s;
      for (double v : values[2 * k + j]) s.add(v);
      means[2 * k + j] = s.value() / static_cast<double>(n);
    }
  }

  BellResult r;
  r.settings = settings;
  for (int k = 0; k < 4; ++k) r.correlations[k] = correlation(means[2 * k], means[2 * k + 1]);
  const auto& e = r.correlations;
  r.bell_value = bell_parameter(e[0], e[1], e[2], e[3]);

  // Delta method: B is a function of the eight sample means.
  std::array<double, 4> dbde{sign(e[0] - e[1]), -sign(e[0] - e[1]), sign(e[2] + e[3]), sign(e[2] + e[3])};
  std::array<double, 8> grad{};
  for (int k = 0; k < 4; ++k) {
    const double ps = means[2 * k];
    const double pd = means[2 * k + 1];
    const double tot2 = (ps + pd) * (ps + pd);
    grad[2 * k] = dbde[k] * 2.0 * pd / tot2;
    grad[2 * k + 1] = -dbde[k] * 2.0 * ps / tot2;
  }
  if (n > 1) {
    CompensatedSum lin_mean;
    std::vector<double> lin(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (int j = 0; j < 8; ++j) v += grad[j] * values[j][i];
      lin[i] = v;
      lin_mean.add(v);
    }
    const double m = lin_mean.value() / static_cast<double>(n);
    CompensatedSum ss;
    for (double v : lin) ss.add((v - m) * (v - m));
    r.std_error = std::sqrt(ss.value() / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  r.canonical_value = r.bell_value;
  r.canonical_std_error = r.std_error;
  return r;
}

NelderMeadResult nelder_mead(const std::function<double(const std::array<double, 3>&)>& f,
                             const std::array<double, 3>& start, double step, double tol, int max_evaluations) {
  using Point = std::array<double, 3>;
  std::array<Point, 4> simplex;
  std::array<double, 4> fv{};
  int evals = 0;
  // Past the budget a point scores +inf, so it is never accepted and the best vertex stays exact.
  auto eval = [&](const Point& p) {
    if (evals >= max_evaluations) return std::numeric_limits<double>::infinity();
    ++evals;
    return f(p);
  };
  simplex[0] = start;
  for (int i = 0; i < 3; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step;
  }
  for (int i = 0; i < 4; ++i) fv[i] = eval(simplex[i]);

  auto combine = [](const Point& a, const Point& b, double w) {
    Point p;
    for (int i = 0; i < 3; ++i) p[i] = a[i] + w * (b[i] - a[i]);
    return p;
  };

  while (evals < max_evaluations) {
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    std::array<Point, 4> s2;
    std::array<double, 4> f2{};
    for (int i = 0; i < 4; ++i) {
      s2[i] = simplex[order[i]];
      f2[i] = fv[order[i]];
    }
    simplex = s2;
    fv = f2;

    double diameter = 0.0;
    for (int i = 1; i < 4; ++i) {
      for (int j = 0; j < 3; ++j) diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[0][j]));
    }
    if (diameter < tol && fv[3] - fv[0] < tol) break;

    Point centroid{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) centroid[j] += simplex[i][j] / 3.0;
    }
    const Point reflected = combine(centroid, simplex[3], -1.0);
    const double fr = eval(reflected);
    if (fr < fv[0]) {
      const Point expanded = combine(centroid, simplex[3], -2.0);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[3] = expanded;
        fv[3] = fe;
      } else {
        simplex[3] = reflected;
        fv[3] = fr;
      }
      continue;
    }
    if (fr < fv[2]) {
      simplex[3] = reflected;
      fv[3] = fr;
      continue;
    }
    const bool outside = fr < fv[3];
    const Point contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, simplex[3], 0.5);
    const double fc = eval(contracted);
    if (fc < (outside ? fr : fv[3])) {
      simplex[3] = contracted;
      fv[3] = fc;
      continue;
    }
    for (int i = 1; i < 4; ++i) {
      simplex[i] = combine(simplex[0], simplex[i], 0.5);
      fv[i] = eval(simplex[i]);
    }
  }
  const int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {simplex[best], fv[best], evals};
}

BellResult maximize_bell(const SourceModel& source, std::span<const TransmittancePair> pairs,
                         const DetectorParams& detector, bool include_double_clicks) {
  detector.validate();
  if (std::holds_alternative<BellStateSource>(source)) {
    return bell_state_result(bell_channel_probs(pairs), detector, include_double_clicks);
  }
  const double xi = std::get<PdcSource>(source).xi;
  const PdcKernel kernel(xi, detector, pairs, include_double_clicks);

  const BellResult canonical = evaluate_bell(kernel, AngleSettings::canonical());
  auto objective = [&](const std::array<double, 3>& x) { return -bell_value_at(kernel, from_offsets(x)); };

  AngleSettings best_settings = AngleSettings::canonical();
  double best_value = canonical.bell_value;
  auto consider = [&](const NelderMeadResult& r) {
    const AngleSettings s = from_offsets(r.x).reduced();
    const double v = -r.value;
    if (v > best_value || (v == best_value && lexicographically_less(s, best_settings))) {
      best_value = v;
      best_settings = s;
    }
  };
  const double q = kPi / 8.0;
  consider(nelder_mead(objective, {q, 2 * q, 3 * q}, kInitialStep, kTolerance, kMaxEvaluations));
  consider(nelder_mead(objective, {-q, -2 * q, -3 * q}, kInitialStep, kTolerance, kMaxEvaluations));
  const AngleSettings restart = best_settings;
  consider(nelder_mead(objective, {restart.theta_b1, restart.theta_a2, restart.theta_b2}, kInitialStep, kTolerance,
                       kMaxEvaluations));

  BellResult result = evaluate_bell(kernel, best_settings);
  // Reduction mod pi leaves every correlation unchanged up to rounding; keep
  // the canonical floor exact.
  if (result.bell_value < canonical.bell_value) result = canonical;
  result.canonical_value = canonical.bell_value;
  result.canonical_std_error = canonical.std_error;
  return result;
}

BellResult maximize_bell(const SourceModel& source, const ChannelScenario& scenario, const DetectorParams& detector,
                         bool include_double_clicks, std::size_t count, std::uint64_t seed) {
  const std::size_t n = is_deterministic(scenario) ? 1 : count;
  const auto pairs = sample_pairs(scenario, n, seed);
  return maximize_bell(source, pairs, detector, include_double_clicks);
}

}  // namespace bellturb

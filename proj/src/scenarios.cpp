#include "bellturb/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <variant>

#include "bellturb/error.hpp"
#include "bellturb/fockoracle.hpp"
#include "bellturb/random.hpp"

namespace bellturb {

namespace {

// Sub-streams of the root seed beyond the per-grid-point streams 0, 1, 2, ...
constexpr std::uint64_t kBaselineStream = 0xBA5E0000ULL;
constexpr std::uint64_t kFeasibilityStream = 0xFEA50000ULL;

Estimate model_mean(const TransmittanceModel& model, std::size_t samples, std::uint64_t seed) {
  if (const auto exact = analytic_moments(model)) return {exact->mean.value, 0.0};
  return pdt_moments(model, samples, seed).mean;
}

ChannelScenario deterministic_scenario(ScenarioKind kind, double eta_a, double eta_b) {
  if (kind == ScenarioKind::Copropagation) return Copropagating{TransmittanceModel::deterministic(eta_a)};
  return Counterpropagating{TransmittanceModel::deterministic(eta_a), TransmittanceModel::deterministic(eta_b)};
}

SourceModel source_for(const RunConfig& c, double xi) {
  if (c.bell_source) return BellStateSource{};
  return PdcSource{xi};
}

// Bell parameter of a deterministic pair at fixed angles.
double fixed_pair_bell(const SourceModel& source, const DetectorParams& det, double eta_a, double eta_b,
                       const AngleSettings& settings, bool dc) {
  const TransmittancePair pair{std::clamp(eta_a, 0.0, 1.0), std::clamp(eta_b, 0.0, 1.0)};
  if (std::holds_alternative<BellStateSource>(source)) {
    return bell_state_bell_parameter(bell_channel_probs(std::span(&pair, 1)), det, dc);
  }
  const PdcKernel kernel(std::get<PdcSource>(source).xi, det, std::span(&pair, 1), dc);
  return evaluate_bell(kernel, settings).bell_value;
}

// Error of the deterministic baseline inherited from the estimated <eta>.
double baseline_error(const SourceModel& source, const DetectorParams& det, ScenarioKind kind, const Estimate& a,
                      const Estimate& b, const AngleSettings& settings, bool dc) {
  if (a.std_error == 0.0 && b.std_error == 0.0) return 0.0;
  auto partial = [&](const Estimate& e, bool first) {
    const double h = std::max(1e-9, 1e-4 * e.value);
    auto at = [&](double x) {
      if (kind == ScenarioKind::Copropagation) return fixed_pair_bell(source, det, x, x, settings, dc);
      return first ? fixed_pair_bell(source, det, x, b.value, settings, dc)
                   : fixed_pair_bell(source, det, a.value, x, settings, dc);
    };
    return (at(e.value + h) - at(std::max(0.0, e.value - h))) / (e.value + h - std::max(0.0, e.value - h));
  };
  const double ga = partial(a, true) * a.std_error;
  if (kind == ScenarioKind::Copropagation) return std::abs(ga);
  const double gb = partial(b, false) * b.std_error;
  return std::hypot(ga, gb);
}

void require_scenario(const RunConfig& c) {
  if (!c.scenario) throw ConfigError("missing [scenario] section");
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

SqueezingScan scan_squeezing(const RunConfig& config) {
  require_scenario(config);
  if (!config.bell_source && config.xi.empty()) throw ConfigError("missing [source] section with a xi grid");
  const ChannelScenario& scenario = *config.scenario;
  const std::uint64_t base_seed = mix_seed(config.seed, kBaselineStream);

  SqueezingScan scan;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Copropagating>) {
          scan.mean_a = model_mean(s.model, config.samples, base_seed);
          scan.mean_b = scan.mean_a;
        } else {
          scan.mean_a = model_mean(s.model_a, config.samples, mix_seed(base_seed, 1));
          scan.mean_b = model_mean(s.model_b, config.samples, mix_seed(base_seed, 2));
        }
      },
      scenario);
  const ChannelScenario det = deterministic_scenario(config.scenario_kind, scan.mean_a.value, scan.mean_b.value);

  const std::vector<double> xs = config.bell_source ? std::vector<double>{0.0} : config.xi;
  scan.rows.resize(xs.size());
  const std::size_t n = is_deterministic(scenario) ? 1 : config.samples;
  parallel_for(xs.size(), [&](std::size_t i) {
    SqueezingRow& row = scan.rows[i];
    row.xi = xs[i];
    const SourceModel source = source_for(config, xs[i]);
    const auto pairs = sample_pairs(scenario, n, mix_seed(config.seed, i));
    row.fading_dc = maximize_bell(source, pairs, config.detector, true);
    row.fading_nodc = maximize_bell(source, pairs, config.detector, false);
    row.det_dc = maximize_bell(source, det, config.detector, true, 1, 0);
    row.det_nodc = maximize_bell(source, det, config.detector, false, 1, 0);
    for (bool dc : {true, false}) {
      BellResult& r = dc ? row.det_dc : row.det_nodc;
      r.std_error = baseline_error(source, config.detector, config.scenario_kind, scan.mean_a, scan.mean_b,
                                   r.settings, dc);
      r.canonical_std_error = baseline_error(source, config.detector, config.scenario_kind, scan.mean_a,
                                             scan.mean_b, AngleSettings::canonical(), dc);
    }
  });
  return scan;
}

void write_csv(std::ostream& out, const SqueezingScan& scan) {
  out << "xi,bell_fading_dc,bell_fading_nodc,bell_det_dc,bell_det_nodc,"
         "bell_fading_dc_stderr,bell_fading_nodc_stderr,bell_det_dc_stderr,bell_det_nodc_stderr,"
         "canonical_fading_dc,canonical_fading_nodc,canonical_det_dc,canonical_det_nodc,"
         "canonical_fading_dc_stderr,canonical_fading_nodc_stderr,canonical_det_dc_stderr,canonical_det_nodc_stderr,"
         "eta0_a,eta0_b\n";
  for (const auto& r : scan.rows) {
    const std::array<const BellResult*, 4> cols{&r.fading_dc, &r.fading_nodc, &r.det_dc, &r.det_nodc};
    out << format_real(r.xi);
    for (const BellResult* b : cols) out << ',' << format_real(b->bell_value);
    for (const BellResult* b : cols) out << ',' << format_real(b->std_error);
    for (const BellResult* b : cols) out << ',' << format_real(b->canonical_value);
    for (const BellResult* b : cols) out << ',' << format_real(b->canonical_std_error);
    out << ',' << format_real(scan.mean_a.value) << ',' << format_real(scan.mean_b.value) << '\n';
  }
}

std::vector<PostselectionRow> scan_postselection(const RunConfig& config) {
  require_scenario(config);
  if (config.scenario_kind != ScenarioKind::Counterpropagation) {
    throw ConfigError("scan-postselection needs a counterpropagation scenario");
  }
  if (config.bell_source || config.xi.size() != 1) {
    throw ConfigError("scan-postselection needs a pdc source with a single xi value");
  }
  if (config.eta_ps.empty()) throw ConfigError("missing [postselection] section with an eta_ps grid");
  const ChannelScenario& scenario = *config.scenario;
  const SourceModel source = PdcSource{config.xi.front()};
  // One sample stream for every threshold keeps the feasibility column monotone.
  const McOptions feasibility_mc{config.samples, mix_seed(config.seed, kFeasibilityStream)};

  std::vector<PostselectionRow> rows(config.eta_ps.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    const double eta_ps = config.eta_ps[i];
    const ChannelScenario selected = postselect(scenario, eta_ps);
    const std::size_t n = is_deterministic(selected) ? 1 : config.samples;
    const auto pairs = sample_pairs(selected, n, mix_seed(config.seed, i));
    rows[i].eta_ps = eta_ps;
    rows[i].bell = maximize_bell(source, pairs, config.detector, config.double_clicks);
    rows[i].feasibility = joint_feasibility(scenario, eta_ps, feasibility_mc);
  });
  return rows;
}

void write_csv(std::ostream& out, const std::vector<PostselectionRow>& rows) {
  out << "eta_ps,bell,bell_stderr,feasibility,feasibility_stderr,bell_canonical,bell_canonical_stderr\n";
  for (const auto& r : rows) {
    out << format_real(r.eta_ps) << ',' << format_real(r.bell.bell_value) << ',' << format_real(r.bell.std_error)
        << ',' << format_real(r.feasibility.value) << ',' << format_real(r.feasibility.std_error) << ','
        << format_real(r.bell.canonical_value) << ',' << format_real(r.bell.canonical_std_error) << '\n';
  }
}

std::vector<StatsRow> pdt_stats(const RunConfig& config) {
  if (!config.stats.model) throw ConfigError("missing [stats] section with a model");
  const TransmittanceModel& model = *config.stats.model;
  const auto samples = sample_pdt(model, config.samples, config.seed);
  const PdtMoments m = model.is_deterministic() ? pdt_moments(model, 1, config.seed) : sample_moments(samples);

  std::vector<StatsRow> rows;
  rows.push_back({"mean", 0.0, m.mean.value, m.mean.std_error});
  rows.push_back({"second", 0.0, m.second.value, m.second.std_error});
  rows.push_back({"variance", 0.0, m.variance.value, m.variance.std_error});
  if (const auto exact = analytic_moments(model)) {
    rows.push_back({"analytic_mean", 0.0, exact->mean.value, 0.0});
    rows.push_back({"analytic_second", 0.0, exact->second.value, 0.0});
    rows.push_back({"analytic_variance", 0.0, exact->variance.value, 0.0});
  }
  if (const auto* c = std::get_if<TruncatedLogNormalChannel>(&model.variant())) {
    // Pre-truncation moments implied by (mu, sigma).
    const double mean = std::exp(-c->mu + 0.5 * c->sigma * c->sigma);
    rows.push_back({"fit_mu", 0.0, c->mu, 0.0});
    rows.push_back({"fit_sigma", 0.0, c->sigma, 0.0});
    rows.push_back({"fit_eta_m", 0.0, c->eta_m, 0.0});
    rows.push_back({"fit_mean", 0.0, mean, 0.0});
    rows.push_back({"fit_variance", 0.0, mean * mean * std::expm1(c->sigma * c->sigma), 0.0});
  }
  for (double x : config.stats.thresholds) {
    const Estimate e = exceedance(model, x, {config.samples, config.seed});
    rows.push_back({"exceedance", x, e.value, e.std_error});
  }
  const int bins = config.stats.bins;
  std::vector<std::size_t> counts(bins, 0);
  for (double eta : samples) {
    const int k = std::min(bins - 1, static_cast<int>(eta * bins));
    ++counts[std::max(0, k)];
  }
  const double n = static_cast<double>(samples.size());
  for (int k = 0; k < bins; ++k) {
    const double p = static_cast<double>(counts[k]) / n;
    rows.push_back({"histogram", (k + 0.5) / bins, p, std::sqrt(p * (1.0 - p) / n)});
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<StatsRow>& rows) {
  out << "quantity,x,value,stderr\n";
  for (const auto& r : rows) {
    out << r.quantity << ',' << format_real(r.x) << ',' << format_real(r.value) << ',' << format_real(r.std_error)
        << '\n';
  }
}

std::vector<ValidateRow> validate_oracle(const ValidateGrid& grid) {
  std::vector<ValidateRow> rows;
  for (double xi : grid.xi) {
    const int cutoff = pdc_cutoff_for(xi);
    for (double ec : grid.eta_c) {
      for (double nu : grid.nu) {
        for (const auto& p : grid.etas) {
          for (double dt : grid.delta_theta) {
            ValidateRow r;
            r.xi = xi;
            r.eta_c = ec;
            r.nu = nu;
            r.eta_a = p.eta_a;
            r.eta_b = p.eta_b;
            r.delta_theta = dt;
            r.cutoff = cutoff;
            rows.push_back(r);
          }
        }
      }
    }
  }
  parallel_for(rows.size(), [&](std::size_t i) {
    ValidateRow& r = rows[i];
    const PatternProbs patterns =
        oracle_patterns(PdcSource{r.xi}, r.eta_a, r.eta_b, r.delta_theta, 0.0, DetectorParams{r.eta_c, r.nu}, r.cutoff);
    const DetectorParams closed{r.eta_c + grid.eta_c_perturbation, r.nu};
    const TransmittancePair pair{r.eta_a, r.eta_b};
    for (bool dc : {true, false}) {
      const JointProbs o = dc ? squash(patterns) : single_clicks(patterns);
      const ClickProbs c = pdc_click_probs(r.xi, closed, std::span(&pair, 1), r.delta_theta, dc);
      const double dev = std::max(std::abs(c.p_same - o.same()), std::abs(c.p_different - o.different()));
      (dc ? r.dev_dc : r.dev_nodc) = dev;
    }
    r.pass = std::max(r.dev_dc, r.dev_nodc) <= grid.tolerance;
  });
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ValidateRow>& rows) {
  out << "xi,eta_c,nu,eta_a,eta_b,delta_theta,cutoff,dev_dc,dev_nodc,max_dev,pass\n";
  for (const auto& r : rows) {
    out << format_real(r.xi) << ',' << format_real(r.eta_c) << ',' << format_real(r.nu) << ','
        << format_real(r.eta_a) << ',' << format_real(r.eta_b) << ',' << format_real(r.delta_theta) << ','
        << r.cutoff << ',' << format_real(r.dev_dc) << ',' << format_real(r.dev_nodc) << ','
        << format_real(std::max(r.dev_dc, r.dev_nodc)) << ',' << csv_bool(r.pass) << '\n';
  }
}

}  // namespace bellturb

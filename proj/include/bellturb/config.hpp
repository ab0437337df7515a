#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bellturb/channels.hpp"
#include "bellturb/photocount.hpp"

namespace bellturb {

/// Flat key = value text with [section] or [section name] headers.
/// '#' starts a comment; blank lines are ignored. Duplicate keys, duplicate
/// sections and malformed lines raise ConfigError with the line number.
struct ConfigEntry {
  std::string value;
  int line = 0;
};

struct ConfigSection {
  std::string kind;  // "model" in [model strong]
  std::string name;  // "strong"; empty for unnamed sections
  int line = 0;
  std::map<std::string, ConfigEntry> entries;

  std::string label() const { return name.empty() ? kind : kind + " " + name; }
};

struct ConfigFile {
  std::vector<ConfigSection> sections;
  // Directory against which relative file paths in the config resolve.
  std::string base_dir;

  const ConfigSection* find(const std::string& kind, const std::string& name = "") const;
};

ConfigFile parse_config(std::istream& in);
ConfigFile parse_config_file(const std::string& path);

double parse_real(const std::string& text, int line = 0);
std::uint64_t parse_uint(const std::string& text, int line = 0);
bool parse_bool(const std::string& text, int line = 0);
// Accepts numbers and multiples or fractions of pi: "pi/8", "3*pi/8", "0.25".
double parse_angle(const std::string& text, int line = 0);
// Comma-separated list or start:stop:step (inclusive of stop within 1e-9 of a step).
std::vector<double> parse_grid(const std::string& text, int line = 0, bool angles = false);

// Reads the model called `name` from its [model name] section, resolving
// `inner` references. Keys: kind, eta0, mu, sigma, mean, variance, eta_m,
// rytov_sq, fresnel, W0, aperture, length, eta_ps, inner, file, samples.
TransmittanceModel parse_model(const ConfigFile& config, const std::string& name);

// Writes [model name] sections (plus one per nested inner model) that
// parse_model reads back to an identical model.
std::string serialize_model(const TransmittanceModel& model, const std::string& name);

// One transmittance per line; blank lines and '#' comments skipped.
std::vector<double> load_empirical_samples(const std::string& path);

// Formats with 17 significant digits.
std::string format_real(double x);

enum class ScenarioKind { Copropagation, Counterpropagation };

struct ValidateGrid {
  std::vector<double> xi{0.05, 0.1, 0.2};
  std::vector<double> eta_c{0.3, 0.6};
  std::vector<double> nu{0.0, 1e-3};
  std::vector<TransmittancePair> etas{{1.0, 1.0}, {0.7, 0.3}, {0.1, 0.1}};
  std::vector<double> delta_theta;  // default 0, pi/8, pi/4
  double tolerance = 1e-6;
  // Added to eta_c on the closed-form side only; a nonzero value must fail.
  double eta_c_perturbation = 0.0;

  ValidateGrid();
};

struct StatsOptions {
  std::optional<TransmittanceModel> model;
  std::vector<double> thresholds;
  int bins = 100;
};

struct RunConfig {
  bool bell_source = false;
  std::vector<double> xi;
  DetectorParams detector;
  std::optional<ChannelScenario> scenario;
  ScenarioKind scenario_kind = ScenarioKind::Copropagation;
  std::vector<double> eta_ps;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  bool double_clicks = true;
  StatsOptions stats;
  ValidateGrid validate;
};

// Builds a RunConfig; unknown sections or keys are ConfigErrors.
RunConfig load_run_config(const ConfigFile& config);
RunConfig load_run_config_file(const std::string& path);

}  // namespace bellturb

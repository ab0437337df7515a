#include "bellturb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "bellturb/error.hpp"

namespace bellturb {

namespace {

constexpr int kMaxModelDepth = 32;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Checks that every key of the section is allowed.
void check_keys(const ConfigSection& s, const std::set<std::string>& allowed) {
  for (const auto& [key, entry] : s.entries) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in [" + s.label() + "]", entry.line);
  }
}

const ConfigEntry* get(const ConfigSection& s, const std::string& key) {
  const auto it = s.entries.find(key);
  return it == s.entries.end() ? nullptr : &it->second;
}

const ConfigEntry& require(const ConfigSection& s, const std::string& key) {
  const ConfigEntry* e = get(s, key);
  if (!e) throw ConfigError("missing key '" + key + "' in [" + s.label() + "]", s.line);
  return *e;
}

double real_or(const ConfigSection& s, const std::string& key, double fallback) {
  const ConfigEntry* e = get(s, key);
  return e ? parse_real(e->value, e->line) : fallback;
}

// Runs f, turning domain errors raised by model constructors into config errors at `line`.
template <class F>
auto at_line(int line, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), line);
  } catch (const FeasibilityError& e) {
    throw ConfigError(e.what(), line);
  }
}

void check_monotone(const std::vector<double>& grid, int line) {
  if (grid.empty()) throw ConfigError("empty grid", line);
  if (grid.size() < 2) return;
  const bool up = grid[1] > grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1])) {
      throw ConfigError("grid must be strictly monotone", line);
    }
  }
}

TransmittanceModel parse_model_at(const ConfigFile& config, const std::string& name, int depth, int ref_line) {
  if (depth > kMaxModelDepth) throw ConfigError("model references nest too deeply (cycle?) at '" + name + "'", ref_line);
  const ConfigSection* s = config.find("model", name);
  if (!s) throw ConfigError("undefined model '" + name + "'", ref_line);
  const ConfigEntry& kind = require(*s, "kind");

  if (kind.value == "deterministic") {
    check_keys(*s, {"kind", "eta0"});
    const ConfigEntry& e = require(*s, "eta0");
    return at_line(e.line, [&] { return TransmittanceModel::deterministic(parse_real(e.value, e.line)); });
  }
  if (kind.value == "truncated_log_normal") {
    check_keys(*s, {"kind", "mu", "sigma", "mean", "variance", "eta_m"});
    const double eta_m = real_or(*s, "eta_m", 1.0);
    const bool by_moments = get(*s, "mean") || get(*s, "variance");
    const bool by_params = get(*s, "mu") || get(*s, "sigma");
    if (by_moments == by_params) {
      throw ConfigError("truncated_log_normal needs either (mu, sigma) or (mean, variance)", s->line);
    }
    return at_line(s->line, [&] {
      TruncatedLogNormalChannel c;
      if (by_moments) {
        const ConfigEntry& m = require(*s, "mean");
        const ConfigEntry& v = require(*s, "variance");
        c = lognormal_from_moments(parse_real(m.value, m.line), parse_real(v.value, v.line), eta_m);
      } else {
        const ConfigEntry& mu = require(*s, "mu");
        const ConfigEntry& sigma = require(*s, "sigma");
        c.mu = parse_real(mu.value, mu.line);
        c.sigma = parse_real(sigma.value, sigma.line);
        c.eta_m = eta_m;
      }
      return TransmittanceModel::truncated_log_normal(c);
    });
  }
  if (kind.value == "elliptic_beam") {
    check_keys(*s, {"kind", "rytov_sq", "fresnel", "W0", "aperture", "length", "eta_m"});
    EllipticBeamChannel c;
    auto read = [&](const char* key) {
      const ConfigEntry& e = require(*s, key);
      return parse_real(e.value, e.line);
    };
    c.rytov_sq = read("rytov_sq");
    c.fresnel = read("fresnel");
    c.beam_waist = read("W0");
    c.aperture = read("aperture");
    c.length = read("length");
    c.eta_m = real_or(*s, "eta_m", 1.0);
    return at_line(s->line, [&] { return TransmittanceModel::elliptic_beam(c); });
  }
  if (kind.value == "postselected") {
    check_keys(*s, {"kind", "inner", "eta_ps"});
    const ConfigEntry& inner = require(*s, "inner");
    const ConfigEntry& eta_ps = require(*s, "eta_ps");
    const TransmittanceModel m = parse_model_at(config, inner.value, depth + 1, inner.line);
    return at_line(eta_ps.line, [&] { return TransmittanceModel::postselected(m, parse_real(eta_ps.value, eta_ps.line)); });
  }
  if (kind.value == "empirical") {
    check_keys(*s, {"kind", "file", "samples"});
    const ConfigEntry* file = get(*s, "file");
    const ConfigEntry* samples = get(*s, "samples");
    if ((file != nullptr) == (samples != nullptr)) throw ConfigError("empirical needs exactly one of file, samples", s->line);
    std::vector<double> values;
    if (file) {
      std::filesystem::path p(file->value);
      if (p.is_relative() && !config.base_dir.empty()) p = std::filesystem::path(config.base_dir) / p;
      try {
        values = load_empirical_samples(p.string());
      } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()), file->line);
      }
    } else {
      for (const auto& item : split(samples->value, ',')) values.push_back(parse_real(item, samples->line));
    }
    const int line = file ? file->line : samples->line;
    return at_line(line, [&] { return TransmittanceModel::empirical(std::move(values)); });
  }
  throw ConfigError("unknown model kind '" + kind.value + "'", kind.line);
}

void serialize_into(const TransmittanceModel& model, const std::string& name, std::ostringstream& out) {
  out << "[model " << name << "]\n";
  const auto& v = model.variant();
  if (const auto* d = std::get_if<Deterministic>(&v)) {
    out << "kind = deterministic\neta0 = " << format_real(d->eta0) << "\n";
  } else if (const auto* c = std::get_if<TruncatedLogNormalChannel>(&v)) {
    out << "kind = truncated_log_normal\nmu = " << format_real(c->mu) << "\nsigma = " << format_real(c->sigma)
        << "\neta_m = " << format_real(c->eta_m) << "\n";
  } else if (const auto* e = std::get_if<EllipticBeamChannel>(&v)) {
    out << "kind = elliptic_beam\nrytov_sq = " << format_real(e->rytov_sq) << "\nfresnel = " << format_real(e->fresnel)
        << "\nW0 = " << format_real(e->beam_waist) << "\naperture = " << format_real(e->aperture)
        << "\nlength = " << format_real(e->length) << "\neta_m = " << format_real(e->eta_m) << "\n";
  } else if (const auto* p = std::get_if<Postselected>(&v)) {
    const std::string inner = name + ".inner";
    out << "kind = postselected\ninner = " << inner << "\neta_ps = " << format_real(p->eta_ps) << "\n\n";
    serialize_into(*p->inner, inner, out);
    return;
  } else if (const auto* m = std::get_if<Empirical>(&v)) {
    out << "kind = empirical\nsamples = ";
    for (std::size_t i = 0; i < m->sorted->size(); ++i) out << (i ? ", " : "") << format_real((*m->sorted)[i]);
    out << "\n";
  }
  out << "\n";
}

std::vector<TransmittancePair> zip_pairs(const ConfigSection& s) {
  const ConfigEntry* a = get(s, "eta_a");
  const ConfigEntry* b = get(s, "eta_b");
  if (!a && !b) return {};
  if (!a || !b) throw ConfigError("eta_a and eta_b must be given together", s.line);
  std::vector<double> va;
  std::vector<double> vb;
  for (const auto& x : split(a->value, ',')) va.push_back(parse_real(x, a->line));
  for (const auto& x : split(b->value, ',')) vb.push_back(parse_real(x, b->line));
  if (va.size() != vb.size() || va.empty()) throw ConfigError("eta_a and eta_b lists must have equal length", b->line);
  std::vector<TransmittancePair> out;
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (!(va[i] >= 0.0 && va[i] <= 1.0 && vb[i] >= 0.0 && vb[i] <= 1.0)) {
      throw ConfigError("transmittances must lie in [0,1]", a->line);
    }
    out.push_back({va[i], vb[i]});
  }
  return out;
}

std::vector<double> plain_list(const ConfigEntry& e, bool angles = false) {
  std::vector<double> out;
  for (const auto& x : split(e.value, ',')) out.push_back(angles ? parse_angle(x, e.line) : parse_real(x, e.line));
  if (out.empty()) throw ConfigError("empty list", e.line);
  return out;
}

}  // namespace

const ConfigSection* ConfigFile::find(const std::string& kind, const std::string& name) const {
  for (const auto& s : sections) {
    if (s.kind == kind && s.name == name) return &s;
  }
  return nullptr;
}

ConfigFile parse_config(std::istream& in) {
  ConfigFile out;
  std::string raw;
  int line = 0;
  ConfigSection* current = nullptr;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("malformed section header", line);
      const std::string inside = trim(text.substr(1, text.size() - 2));
      const auto space = inside.find_first_of(" \t");
      ConfigSection s;
      s.kind = inside.substr(0, space);
      s.name = space == std::string::npos ? "" : trim(inside.substr(space));
      s.line = line;
      if (s.kind.empty()) throw ConfigError("empty section header", line);
      if (out.find(s.kind, s.name)) throw ConfigError("duplicate section [" + s.label() + "]", line);
      out.sections.push_back(std::move(s));
      current = &out.sections.back();
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    if (!current) throw ConfigError("key outside of any section", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", line);
    if (!current->entries.emplace(key, ConfigEntry{value, line}).second) {
      throw ConfigError("duplicate key '" + key + "'", line);
    }
  }
  return out;
}

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ConfigFile c = parse_config(in);
  c.base_dir = std::filesystem::path(path).parent_path().string();
  return c;
}

double parse_real(const std::string& text, int line) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || t.empty() || !std::isfinite(value)) {
    throw ConfigError("expected a finite number, got '" + t + "'", line);
  }
  return value;
}

std::uint64_t parse_uint(const std::string& text, int line) {
  const std::string t = trim(text);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("expected a non-negative integer, got '" + t + "'", line);
  }
  return value;
}

bool parse_bool(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw ConfigError("expected true or false, got '" + t + "'", line);
}

double parse_angle(const std::string& text, int line) {
  std::string t = trim(text);
  const auto pi = t.find("pi");
  if (pi == std::string::npos) return parse_real(t, line);
  double sign = 1.0;
  std::string head = trim(t.substr(0, pi));
  if (!head.empty() && head.front() == '-') {
    sign = -1.0;
    head = trim(head.substr(1));
  }
  double factor = 1.0;
  if (!head.empty()) {
    if (head.back() != '*') throw ConfigError("malformed angle '" + t + "'", line);
    factor = parse_real(head.substr(0, head.size() - 1), line);
  }
  const std::string tail = trim(t.substr(pi + 2));
  double divisor = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError("malformed angle '" + t + "'", line);
    divisor = parse_real(tail.substr(1), line);
    if (divisor == 0.0) throw ConfigError("angle divides by zero", line);
  }
  return sign * factor * std::numbers::pi / divisor;
}

std::vector<double> parse_grid(const std::string& text, int line, bool angles) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("range must be start:stop:step", line);
    auto value = [&](const std::string& p) { return angles ? parse_angle(p, line) : parse_real(p, line); };
    const double start = value(parts[0]);
    const double stop = value(parts[1]);
    const double step = value(parts[2]);
    if (!(step != 0.0) || (stop - start) / step < 0.0) throw ConfigError("range step has the wrong sign or is zero", line);
    const long n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (n > 100000) throw ConfigError("range has too many points", line);
    for (long i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    for (const auto& item : split(text, ',')) out.push_back(angles ? parse_angle(item, line) : parse_real(item, line));
  }
  check_monotone(out, line);
  return out;
}

TransmittanceModel parse_model(const ConfigFile& config, const std::string& name) {
  return parse_model_at(config, name, 0, 0);
}

std::string serialize_model(const TransmittanceModel& model, const std::string& name) {
  std::ostringstream out;
  serialize_into(model, name, out);
  return out.str();
}

std::vector<double> load_empirical_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transmittance file '" + path + "'");
  std::vector<double> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string t = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (t.empty()) continue;
    try {
      out.push_back(parse_real(t, line));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  return out;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ValidateGrid::ValidateGrid()
    : delta_theta{0.0, std::numbers::pi / 8.0, std::numbers::pi / 4.0} {}

RunConfig load_run_config(const ConfigFile& config) {
  RunConfig rc;
  static const std::set<std::string> known{"source", "detector", "scenario", "postselection",
                                           "run", "model", "stats", "validate"};
  for (const auto& s : config.sections) {
    if (!known.count(s.kind)) throw ConfigError("unknown section [" + s.label() + "]", s.line);
    if (s.kind != "model" && !s.name.empty()) throw ConfigError("section [" + s.kind + "] takes no name", s.line);
    if (s.kind == "model" && s.name.empty()) throw ConfigError("[model] needs a name", s.line);
  }

  if (const auto* s = config.find("source")) {
    check_keys(*s, {"kind", "xi"});
    const ConfigEntry& kind = require(*s, "kind");
    if (kind.value == "bell") {
      rc.bell_source = true;
      if (get(*s, "xi")) throw ConfigError("a Bell-state source takes no xi", get(*s, "xi")->line);
    } else if (kind.value == "pdc") {
      const ConfigEntry& xi = require(*s, "xi");
      rc.xi = parse_grid(xi.value, xi.line);
      for (double x : rc.xi) {
        if (x < 0.0) throw ConfigError("xi must be >= 0", xi.line);
      }
    } else {
      throw ConfigError("source kind must be pdc or bell", kind.line);
    }
  }

  if (const auto* s = config.find("detector")) {
    check_keys(*s, {"eta_c", "nu"});
    rc.detector.eta_c = real_or(*s, "eta_c", 1.0);
    rc.detector.nu = real_or(*s, "nu", 0.0);
    at_line(s->line, [&] {
      rc.detector.validate();
      return 0;
    });
  }

  if (const auto* s = config.find("scenario")) {
    check_keys(*s, {"kind", "model", "model_a", "model_b"});
    const ConfigEntry& kind = require(*s, "kind");
    if (kind.value == "copropagation") {
      check_keys(*s, {"kind", "model"});
      const ConfigEntry& m = require(*s, "model");
      rc.scenario_kind = ScenarioKind::Copropagation;
      rc.scenario = Copropagating{parse_model_at(config, m.value, 0, m.line)};
    } else if (kind.value == "counterpropagation") {
      const ConfigEntry* m = get(*s, "model");
      const ConfigEntry* ma = get(*s, "model_a");
      const ConfigEntry* mb = get(*s, "model_b");
      if (m && (ma || mb)) throw ConfigError("give either model or model_a/model_b", s->line);
      if (!m && !(ma && mb)) throw ConfigError("counterpropagation needs model or both model_a and model_b", s->line);
      rc.scenario_kind = ScenarioKind::Counterpropagation;
      if (m) {
        const TransmittanceModel model = parse_model_at(config, m->value, 0, m->line);
        rc.scenario = Counterpropagating{model, model};
      } else {
        rc.scenario = Counterpropagating{parse_model_at(config, ma->value, 0, ma->line),
                                         parse_model_at(config, mb->value, 0, mb->line)};
      }
    } else {
      throw ConfigError("scenario kind must be copropagation or counterpropagation", kind.line);
    }
  }

  if (const auto* s = config.find("postselection")) {
    check_keys(*s, {"eta_ps"});
    const ConfigEntry& e = require(*s, "eta_ps");
    rc.eta_ps = parse_grid(e.value, e.line);
    for (double x : rc.eta_ps) {
      if (!(x >= 0.0 && x < 1.0)) throw ConfigError("eta_ps must lie in [0,1)", e.line);
    }
  }

  if (const auto* s = config.find("run")) {
    check_keys(*s, {"samples", "seed", "double_clicks"});
    if (const auto* e = get(*s, "samples")) rc.samples = parse_uint(e->value, e->line);
    if (const auto* e = get(*s, "seed")) rc.seed = parse_uint(e->value, e->line);
    if (const auto* e = get(*s, "double_clicks")) rc.double_clicks = parse_bool(e->value, e->line);
    if (rc.samples < 1000) throw ConfigError("samples must be at least 1000", get(*s, "samples")->line);
  }

  if (const auto* s = config.find("stats")) {
    check_keys(*s, {"model", "thresholds", "bins"});
    const ConfigEntry& m = require(*s, "model");
    rc.stats.model = parse_model_at(config, m.value, 0, m.line);
    if (const auto* e = get(*s, "thresholds")) rc.stats.thresholds = parse_grid(e->value, e->line);
    if (const auto* e = get(*s, "bins")) {
      const auto bins = parse_uint(e->value, e->line);
      if (bins < 1 || bins > 100000) throw ConfigError("bins must lie in [1, 100000]", e->line);
      rc.stats.bins = static_cast<int>(bins);
    }
  }

  if (const auto* s = config.find("validate")) {
    check_keys(*s, {"xi", "eta_c", "nu", "eta_a", "eta_b", "delta_theta", "tolerance", "oracle_eta_c_perturbation"});
    ValidateGrid& g = rc.validate;
    if (const auto* e = get(*s, "xi")) g.xi = plain_list(*e);
    if (const auto* e = get(*s, "eta_c")) g.eta_c = plain_list(*e);
    if (const auto* e = get(*s, "nu")) g.nu = plain_list(*e);
    if (const auto* e = get(*s, "delta_theta")) g.delta_theta = plain_list(*e, true);
    if (auto pairs = zip_pairs(*s); !pairs.empty()) g.etas = std::move(pairs);
    g.tolerance = real_or(*s, "tolerance", g.tolerance);
    g.eta_c_perturbation = real_or(*s, "oracle_eta_c_perturbation", 0.0);
    for (double x : g.xi) {
      if (x < 0.0) throw ConfigError("xi must be >= 0", s->line);
    }
    for (double ec : g.eta_c) {
      for (double nu : g.nu) {
        at_line(s->line, [&] {
          DetectorParams{ec, nu}.validate();
          return 0;
        });
      }
    }
  }
  return rc;
}

RunConfig load_run_config_file(const std::string& path) { return load_run_config(parse_config_file(path)); }

}  // namespace bellturb

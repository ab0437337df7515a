#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "bellturb/chsh.hpp"
#include "bellturb/config.hpp"

namespace bellturb {

// Bell parameters at one squeezing value: fading channel and the
// deterministic channel with eta0 = <eta>, each with and without double clicks.
struct SqueezingRow {
  double xi = 0.0;
  BellResult fading_dc;
  BellResult fading_nodc;
  BellResult det_dc;
  BellResult det_nodc;
};

struct SqueezingScan {
  // <eta_A>, <eta_B> used for the deterministic baseline.
  Estimate mean_a;
  Estimate mean_b;
  std::vector<SqueezingRow> rows;
};

// One row per xi (a single xi = 0 row for a Bell-state source).
SqueezingScan scan_squeezing(const RunConfig& config);
void write_csv(std::ostream& out, const SqueezingScan& scan);

struct PostselectionRow {
  double eta_ps = 0.0;
  BellResult bell;
  Estimate feasibility;
};

// Counterpropagating PDC source with a single xi; rows follow the eta_ps grid.
std::vector<PostselectionRow> scan_postselection(const RunConfig& config);
void write_csv(std::ostream& out, const std::vector<PostselectionRow>& rows);

// Long-format statistics row: quantity, x, value, stderr.
struct StatsRow {
  std::string quantity;
  double x = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

std::vector<StatsRow> pdt_stats(const RunConfig& config);
void write_csv(std::ostream& out, const std::vector<StatsRow>& rows);

struct ValidateRow {
  double xi = 0.0;
  double eta_c = 0.0;
  double nu = 0.0;
  double eta_a = 0.0;
  double eta_b = 0.0;
  double delta_theta = 0.0;
  int cutoff = 0;
  double dev_dc = 0.0;
  double dev_nodc = 0.0;
  bool pass = false;
};

// Closed forms against the Fock oracle on every grid point.
std::vector<ValidateRow> validate_oracle(const ValidateGrid& grid);
void write_csv(std::ostream& out, const std::vector<ValidateRow>& rows);

}  // namespace bellturb

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recruit/asymptotics.hpp"
#include "recruit/simulate.hpp"

namespace recruit {

/// One row of a coverage reproduction table.
struct TableRow {
  double census_time = 0.0;
  double t_plus = 0.0;  ///< Count tables only
  SimConfig config;
};

struct CoverageTable {
  std::string id;
  std::string description;
  Objective objective = Objective::Count;
  /// Whether the table reports the moment-matching diagnostic columns.
  bool diagnostics = false;
  std::vector<TableRow> rows;
};

/// Known ids: 2, 3, 4, D1..D6, F1, F2.
CoverageTable coverage_table(const std::string& id, int replications, std::uint64_t seed);
std::vector<std::string> coverage_table_ids();

/// Default study settings: alpha 2, beta 150, C 150, t 200, level 0.9.
SimConfig default_config();

struct CurveSeries {
  std::string label;
  SimConfig config;
  double p = 0.5;
  LimitLaw law;
  bool empirical = true;
};

struct CurveFigure {
  std::string id;
  std::string description;
  std::vector<CurveSeries> series;
};

/// Known ids: fig1, fig2, fig3, fig4, figD1, figD2, figD3.
CurveFigure curve_figure(const std::string& id, int replications, std::uint64_t seed);
std::vector<std::string> curve_figure_ids();

/// Theoretical limit law for a configuration (true alpha, beta, t).
LimitLaw limit_law_for(const SimConfig& config, double p);

}  // namespace recruit

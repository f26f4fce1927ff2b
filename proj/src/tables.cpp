#include "recruit/tables.hpp"

#include "recruit/errors.hpp"

namespace recruit {

namespace {

const std::vector<double> kCountCensus{50, 100, 150, 200, 250, 300, 350};
const std::vector<double> kTimeCensus{50, 100, 150, 200, 300, 500, 1000};
const std::vector<int> kCountCentres{20, 50, 100, 150, 200, 250, 300, 400};
const std::vector<int> kTimeCentres{20, 50, 100, 150, 200, 300, 500, 1000};
constexpr double kTrialLength = 400.0;
constexpr double kTimeTarget = 200.0;

std::string fmt(double x) {
  std::string s = std::to_string(x);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

CoverageTable count_table(std::string id, std::string description, SimConfig base,
                          bool diagnostics) {
  CoverageTable table{std::move(id), std::move(description), Objective::Count, diagnostics, {}};
  base.objective = Objective::Count;
  for (double t : kCountCensus) {
    SimConfig c = base;
    c.census_time = t;
    c.horizon = kTrialLength - t;
    table.rows.push_back({t, c.horizon, c});
  }
  return table;
}

CoverageTable time_table(std::string id, std::string description, SimConfig base,
                         bool diagnostics) {
  CoverageTable table{std::move(id), std::move(description), Objective::Time, diagnostics, {}};
  base.objective = Objective::Time;
  base.horizon = kTimeTarget;
  for (double t : kTimeCensus) {
    SimConfig c = base;
    c.census_time = t;
    table.rows.push_back({t, 0.0, c});
  }
  return table;
}

}  // namespace

SimConfig default_config() {
  SimConfig c;
  c.prior = RatePrior::single(2.0, 150.0);
  c.centres = 150;
  c.census_time = 200.0;
  c.schedule = OpeningSchedule::simultaneous();
  c.objective = Objective::Count;
  c.horizon = 200.0;
  c.level = 0.9;
  c.replications = 2000;
  return c;
}

std::vector<std::string> coverage_table_ids() {
  return {"2", "3", "4", "D1", "D2", "D3", "D4", "D5", "D6", "F1", "F2"};
}

CoverageTable coverage_table(const std::string& id, int replications, std::uint64_t seed) {
  SimConfig base = default_config();
  base.replications = replications;
  base.seed = seed;
  SimConfig uniform = base;
  uniform.schedule = OpeningSchedule::uniform();
  SimConfig split = base;
  split.schedule = OpeningSchedule::split_half();

  if (id == "2") return count_table(id, "count, simultaneous opening", base, false);
  if (id == "3") return count_table(id, "count, openings uniform on [0,t]", uniform, true);
  if (id == "4") return count_table(id, "count, half open at 0 and half at t", split, true);
  if (id == "D1") {
    SimConfig c = base;
    c.prior = RatePrior::single(2.0, 50.0);
    return count_table(id, "count, simultaneous, beta = 50", c, false);
  }
  if (id == "D2") {
    SimConfig c = base;
    c.centres = 20;
    return count_table(id, "count, simultaneous, C = 20", c, false);
  }
  if (id == "D3") {
    SimConfig c = base;
    c.level = 0.95;
    return count_table(id, "count, simultaneous, 95% level", c, false);
  }
  if (id == "D4") return time_table(id, "time to 200 recruits, simultaneous", base, false);
  if (id == "D5") return time_table(id, "time to 200 recruits, openings uniform on [0,t]", uniform, true);
  if (id == "D6") return time_table(id, "time to 200 recruits, half open at 0 and half at t", split, true);
  SimConfig mix = uniform;
  mix.prior = RatePrior::mixture(2.0, 150.0, 450.0);
  if (id == "F1") return count_table(id, "count, gamma-mixture rates, openings uniform", mix, true);
  if (id == "F2") return time_table(id, "time to 200 recruits, gamma-mixture rates, openings uniform", mix, true);
  throw ConfigError("unknown table id '" + id + "'");
}

LimitLaw limit_law_for(const SimConfig& config, double p) {
  if (config.objective == Objective::Count) {
    return count_limit_law(p, config.prior.beta, config.census_time, config.horizon);
  }
  return time_limit_law(p, config.prior.alpha, config.prior.beta, config.census_time,
                        config.horizon / config.centres);
}

std::vector<std::string> curve_figure_ids() {
  return {"fig1", "fig2", "fig3", "fig4", "figD1", "figD2", "figD3"};
}

CurveFigure curve_figure(const std::string& id, int replications, std::uint64_t seed) {
  SimConfig base = default_config();
  base.replications = replications;
  base.seed = seed;
  CurveFigure fig;
  fig.id = id;

  auto add = [&](std::string label, SimConfig c, double p, bool empirical) {
    fig.series.push_back({std::move(label), c, p, limit_law_for(c, p), empirical});
  };
  auto census_sweep = [&](double p, bool empirical) {
    for (double t : kCountCensus) {
      SimConfig c = base;
      c.census_time = t;
      c.horizon = kTrialLength - t;
      add("t=" + fmt(t), c, p, empirical);
    }
  };
  // Centre sweeps scale beta with C unless told otherwise, keeping the
  // expected recruitment rate fixed.
  auto centre_sweep = [&](const std::vector<int>& sizes, Objective objective, bool beta_equals_c) {
    for (int n : sizes) {
      SimConfig c = base;
      c.centres = n;
      if (beta_equals_c) c.prior.beta = n;
      c.objective = objective;
      c.horizon = objective == Objective::Count ? 200.0 : kTimeTarget;
      add("C=" + std::to_string(n), c, 0.5, true);
    }
  };

  if (id == "fig1") {
    fig.description = "limit density of P(N+ <= q_0.5), t+ = 400 - t";
    census_sweep(0.5, false);
  } else if (id == "fig2") {
    fig.description = "P(N+ <= q_0.5): census sweep with t+ = 400 - t, then centre sweep at t = t+ = 200, beta = C";
    census_sweep(0.5, true);
    centre_sweep(kCountCentres, Objective::Count, true);
  } else if (id == "fig3") {
    fig.description = "P(N+ <= q_0.25), t+ = 400 - t";
    census_sweep(0.25, true);
  } else if (id == "fig4") {
    fig.description = "P(T+ <= r_0.5), n+ = 200, t = 200, beta = C";
    centre_sweep(kTimeCentres, Objective::Time, true);
  } else if (id == "figD1") {
    fig.description = "P(T+ <= r_0.25), n+ = 200, census sweep";
    for (double t : kTimeCensus) {
      SimConfig c = base;
      c.census_time = t;
      c.objective = Objective::Time;
      c.horizon = kTimeTarget;
      add("t=" + fmt(t), c, 0.25, true);
    }
  } else if (id == "figD2") {
    fig.description = "P(N+ <= q_0.5), t = t+ = 200, beta = 150 fixed";
    centre_sweep(kCountCentres, Objective::Count, false);
  } else if (id == "figD3") {
    fig.description = "P(T+ <= r_0.5), n+ = 200, t = 200, beta = 150 fixed";
    centre_sweep(kTimeCentres, Objective::Time, false);
  } else {
    throw ConfigError("unknown figure id '" + id + "'");
  }
  return fig;
}

}  // namespace recruit

#include "recruit/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "recruit/asymptotics.hpp"
#include "recruit/tables.hpp"

namespace recruit {

using nlohmann::json;

namespace {

const char* objective_name(Objective o) { return o == Objective::Count ? "count" : "time"; }

Objective parse_objective(const std::string& s) {
  if (s == "count") return Objective::Count;
  if (s == "time") return Objective::Time;
  throw ConfigError("unknown objective '" + s + "' (expected count or time)");
}

const char* format_name(CsvFormat f) { return f == CsvFormat::Summary ? "summary" : "events"; }

json input_json(const InputSpec& in) {
  return {{"input", in.path}, {"format", format_name(in.format)}, {"census", in.census_time}};
}

json fit_json(const ModelFit& fit) {
  return {{"alpha_hat", fit.alpha_hat},     {"beta_hat", fit.beta_hat},
          {"log_lik", fit.log_lik},         {"converged", fit.converged},
          {"iterations", fit.iterations},   {"degenerate", fit.degenerate},
          {"gradient_norm", fit.gradient_norm}};
}

json interval_json(const PredictionInterval& iv) {
  return {{"lower", iv.lower},
          {"upper", iv.upper},
          {"width", iv.width()},
          {"nominal_level", iv.nominal_level},
          {"probs_used", {iv.probs_used.first, iv.probs_used.second}}};
}

std::string row_csv(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_number(values[i], 10);
  }
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
}

}  // namespace

json make_manifest(const std::string& command, json config) {
  return {{"tool", "recruitcast"}, {"version", kVersion}, {"command", command},
          {"config", std::move(config)}};
}

json cmd_fit(const InputSpec& input) {
  const TrialData data = parse_centre_csv(input.path, input.format, input.census_time);
  json out;
  ModelFit fit;
  try {
    fit = fit_mle(data);
  } catch (const DegenerateLikelihood& e) {
    fit = e.fit();
  }
  out = fit_json(fit);
  out["centres"] = data.size();
  out["active_centres"] = data.active_centres();
  out["total_count"] = data.total_count();
  out["census_time"] = data.census_time();
  out["equal_exposures"] = data.equal_exposures();
  out["alpha_over_beta"] = fit.alpha_hat / fit.beta_hat;
  if (data.equal_exposures()) {
    out["ratio_check"] = static_cast<double>(data.total_count()) /
                         (static_cast<double>(data.active_centres()) * data.common_exposure());
  } else {
    out["ratio_check"] = nullptr;
  }
  out["manifest"] = make_manifest("fit", input_json(input));
  return out;
}

json cmd_predict(const PredictOptions& o) {
  const TrialData data = parse_centre_csv(o.input.path, o.input.format, o.input.census_time);
  const ModelFit fit = fit_mle(data);
  const PooledPosterior pool = pool_centres(data, fit);
  PredictionRequest request{o.objective, o.horizon, o.level, false};
  const PredictionInterval plain = prediction_interval(pool, request);

  json out;
  out["objective"] = objective_name(o.objective);
  out["horizon"] = o.horizon;
  out["level"] = o.level;
  out["adjusted"] = o.adjusted;
  out["fit"] = fit_json(fit);
  out["pooled"] = {{"n_star", pool.n_star}, {"t_star", pool.t_star},
                   {"shape", pool.shape}, {"rate", pool.rate}};
  if (o.objective == Objective::Count) {
    const NegBinParams law = predictive_count_law(pool, o.horizon);
    out["law"] = {{"family", "negative_binomial"}, {"size", law.size}, {"prob", law.prob},
                  {"mean", law.mean()}, {"variance", law.variance()}};
  } else {
    const Pearson6Params law = predictive_time_law(pool, static_cast<std::int64_t>(o.horizon));
    out["law"] = {{"family", "pearson6"}, {"shape_num", law.shape_num},
                  {"shape_den", law.shape_den}, {"scale", law.scale}};
  }
  out["unadjusted"] = interval_json(plain);
  const PredictionInterval* chosen = &plain;
  PredictionInterval adjusted;
  if (o.adjusted) {
    request.adjusted = true;
    adjusted = prediction_interval(pool, request);
    out["adjusted_interval"] = interval_json(adjusted);
    chosen = &adjusted;
  }
  out["interval"] = {chosen->lower, chosen->upper};
  out["probs_used"] = {chosen->probs_used.first, chosen->probs_used.second};

  json config = input_json(o.input);
  config["objective"] = objective_name(o.objective);
  config["horizon"] = o.horizon;
  config["level"] = o.level;
  config["adjusted"] = o.adjusted;
  out["manifest"] = make_manifest("predict", config);
  return out;
}

json sim_config_to_json(const SimConfig& c) {
  json prior;
  if (c.prior.kind == RatePrior::Kind::SingleGamma) {
    prior = {{"kind", "gamma"}, {"alpha", c.prior.alpha}, {"beta", c.prior.beta}};
  } else {
    prior = {{"kind", "mixture"}, {"alpha", c.prior.alpha}, {"beta1", c.prior.beta},
             {"beta2", c.prior.beta2}};
  }
  json schedule;
  switch (c.schedule.kind) {
    case OpeningSchedule::Kind::Simultaneous: schedule = "simultaneous"; break;
    case OpeningSchedule::Kind::UniformOnCensus: schedule = "uniform"; break;
    case OpeningSchedule::Kind::SplitHalf: schedule = "split_half"; break;
    case OpeningSchedule::Kind::Explicit: schedule = {{"opening_times", c.schedule.opening_times}}; break;
  }
  return {{"prior", prior},         {"centres", c.centres},
          {"census_time", c.census_time}, {"schedule", schedule},
          {"objective", objective_name(c.objective)}, {"horizon", c.horizon},
          {"level", c.level},       {"replications", c.replications},
          {"seed", c.seed},
          {"degenerate_policy",
           c.degenerate_policy == DegeneratePolicy::Exclude ? "exclude" : "boundary"}};
}

SimConfig sim_config_from_json(const json& j) {
  try {
    SimConfig c = default_config();
    if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
    if (j.contains("prior")) {
      const json& p = j.at("prior");
      const std::string kind = p.value("kind", "gamma");
      if (kind == "gamma") {
        c.prior = RatePrior::single(p.value("alpha", 2.0), p.value("beta", 150.0));
      } else if (kind == "mixture") {
        c.prior = RatePrior::mixture(p.value("alpha", 2.0), p.value("beta1", 150.0),
                                     p.value("beta2", 450.0));
      } else {
        throw ConfigError("unknown prior kind '" + kind + "'");
      }
    }
    c.centres = j.value("centres", c.centres);
    c.census_time = j.value("census_time", c.census_time);
    if (j.contains("schedule")) {
      const json& s = j.at("schedule");
      if (s.is_string()) {
        const auto name = s.get<std::string>();
        if (name == "simultaneous") c.schedule = OpeningSchedule::simultaneous();
        else if (name == "uniform") c.schedule = OpeningSchedule::uniform();
        else if (name == "split_half") c.schedule = OpeningSchedule::split_half();
        else throw ConfigError("unknown schedule '" + name + "'");
      } else {
        c.schedule = OpeningSchedule::explicit_times(s.at("opening_times").get<std::vector<double>>());
      }
    }
    if (j.contains("objective")) c.objective = parse_objective(j.at("objective").get<std::string>());
    c.horizon = j.value("horizon", c.horizon);
    c.level = j.value("level", c.level);
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    if (j.contains("degenerate_policy")) {
      const auto policy = j.at("degenerate_policy").get<std::string>();
      if (policy == "boundary") c.degenerate_policy = DegeneratePolicy::BoundaryFit;
      else if (policy == "exclude") c.degenerate_policy = DegeneratePolicy::Exclude;
      else throw ConfigError("unknown degenerate_policy '" + policy + "' (boundary or exclude)");
    }
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid simulation config: ") + e.what());
  }
}

std::string cmd_simulate(const SimulateOptions& o) {
  if (o.table.has_value() == o.config_path.has_value()) {
    throw ConfigError("simulate needs exactly one of --table or --config");
  }
  const RunOptions run{o.threads};
  std::ostringstream out;

  if (o.table) {
    const CoverageTable table = coverage_table(*o.table, o.replications.value_or(2000),
                                               o.seed.value_or(1));
    json config{{"table", table.id}, {"description", table.description},
                {"replications", o.replications.value_or(2000)}, {"seed", o.seed.value_or(1)}};
    out << "# manifest: " << make_manifest("simulate", config).dump() << '\n';
    const bool count = table.objective == Objective::Count;
    out << "t";
    if (count) out << ",t_plus";
    if (table.diagnostics) out << ",t_star,t_star_over_t_c,n_star_over_n";
    out << ",unadjusted_coverage,unadjusted_width,adjusted_coverage,adjusted_width\n";
    for (const auto& row : table.rows) {
      const CoverageReport r = coverage_study(row.config, run);
      std::vector<double> v{row.census_time};
      if (count) v.push_back(row.t_plus);
      if (table.diagnostics) {
        v.insert(v.end(), {r.mean_t_star, r.t_star_ratio, r.n_star_ratio});
      }
      v.insert(v.end(), {r.mean_coverage_unadjusted, r.mean_width_unadjusted,
                         r.mean_coverage_adjusted, r.mean_width_adjusted});
      out << row_csv(v) << '\n';
    }
    return out.str();
  }

  SimConfig c = sim_config_from_json(read_json_file(*o.config_path));
  if (o.replications) c.replications = *o.replications;
  if (o.seed) c.seed = *o.seed;
  validate(c);
  out << "# manifest: " << make_manifest("simulate", sim_config_to_json(c)).dump() << '\n';
  out << "t,horizon,t_star,t_star_over_t_c,n_star_over_n,unadjusted_coverage,unadjusted_width,"
         "adjusted_coverage,adjusted_width,replications,degenerate,excluded\n";
  const CoverageReport r = coverage_study(c, run);
  out << row_csv({c.census_time, c.horizon, r.mean_t_star, r.t_star_ratio, r.n_star_ratio,
                  r.mean_coverage_unadjusted, r.mean_width_unadjusted, r.mean_coverage_adjusted,
                  r.mean_width_adjusted, static_cast<double>(r.replications),
                  static_cast<double>(r.degenerate), static_cast<double>(r.excluded)})
      << '\n';
  return out.str();
}

std::string cmd_curves(const CurvesOptions& o) {
  if (o.grid_points < 2) throw ConfigError("grid needs at least 2 points");
  const int reps = o.replications.value_or(20000);
  CurveFigure fig;
  if (o.config_path) {
    if (!o.figure.empty()) throw ConfigError("curves needs either --figure or --config, not both");
    if (!(o.p > 0.0 && o.p < 1.0)) throw ConfigError("quantile level p must lie in (0, 1)");
    SimConfig c = sim_config_from_json(read_json_file(*o.config_path));
    c.replications = reps;
    if (o.seed) c.seed = *o.seed;
    validate(c);
    fig.id = "custom";
    fig.description = sim_config_to_json(c).dump();
    fig.series.push_back({"custom", c, o.p, limit_law_for(c, o.p), true});
  } else {
    fig = curve_figure(o.figure, reps, o.seed.value_or(1));
  }
  std::vector<double> grid(static_cast<std::size_t>(o.grid_points));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = static_cast<double>(k + 1) / static_cast<double>(grid.size() + 1);
  }

  std::ostringstream out;
  json config{{"figure", fig.id}, {"description", fig.description}, {"replications", reps},
              {"seed", o.seed.value_or(1)}, {"grid_points", o.grid_points}};
  if (o.only_series) config["series"] = *o.only_series;
  if (o.config_path) config["p"] = o.p;
  out << "# manifest: " << make_manifest("curves", config).dump() << '\n';
  out << "series,w,theoretical_density,empirical_density\n";
  bool matched = false;
  for (const auto& s : fig.series) {
    if (o.only_series && s.label != *o.only_series) continue;
    matched = true;
    std::vector<double> empirical;
    if (s.empirical) {
      const auto sample = quantile_probability_study(s.config, s.p, RunOptions{o.threads});
      empirical = kernel_density(sample.values, grid);
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out << s.label << ',' << format_number(grid[k], 10) << ','
          << format_number(limit_prob_density(grid[k], s.law), 10) << ',';
      if (s.empirical) out << format_number(empirical[k], 10);
      out << '\n';
    }
  }
  if (!matched) throw ConfigError("figure " + fig.id + " has no series '" + *o.only_series + "'");
  return out.str();
}

std::string cmd_diagnose_qq(const QqOptions& o) {
  if (!(o.window > 0.0)) throw ConfigError("QQ window must be positive");
  if (o.input.format != CsvFormat::Events) {
    throw ConfigError("QQ diagnostic needs the events format (per-recruit times)");
  }
  const EventLog log = parse_event_log(o.input.path, o.input.census_time);
  const TrialData data = to_trial_data(log);
  const ModelFit fit = fit_mle(data);

  std::vector<double> counts;
  for (const auto& c : log.centres) {
    if (log.census_time - c.open_time < o.window) continue;
    const double end = c.open_time + o.window;
    counts.push_back(static_cast<double>(std::count_if(
        c.event_times.begin(), c.event_times.end(), [&](double e) { return e <= end; })));
  }
  if (counts.size() < 5) {
    throw TooFewCentres("QQ diagnostic needs at least 5 centres open for the whole window, found " +
                        std::to_string(counts.size()));
  }
  std::sort(counts.begin(), counts.end());
  const NegBinParams law{fit.alpha_hat, o.window / (fit.beta_hat + o.window)};
  const double m = static_cast<double>(counts.size());

  std::ostringstream out;
  json config = input_json(o.input);
  config["window"] = o.window;
  out << "# manifest: " << make_manifest("diagnose qq", config).dump() << '\n';
  out << "plotting_position,theoretical_quantile,empirical_quantile\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double pos = (static_cast<double>(i) + 0.5) / m;
    out << format_number(pos, 10) << ',' << nb_quantile(pos, law) << ','
        << format_number(counts[i]) << '\n';
  }
  return out.str();
}

}  // namespace recruit

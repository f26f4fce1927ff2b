// recruitcast: fit, predict, simulate and diagnose multi-centre recruitment.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "recruit/commands.hpp"
#include "recruit/errors.hpp"

using namespace recruit;

namespace {

struct InputArgs {
  std::string path;
  std::string format = "summary";
  double census = 0.0;
};

void add_input_options(CLI::App* cmd, InputArgs& args) {
  cmd->add_option("--input", args.path, "centre CSV file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", args.format, "summary or events")
      ->check(CLI::IsMember({"summary", "events"}));
  cmd->add_option("--census", args.census, "census time")->required();
}

InputSpec to_spec(const InputArgs& a) { return {a.path, parse_format(a.format), a.census}; }

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes text to the output file (or stdout) and, on request, a sidecar
// manifest carrying the wall-clock timestamps.
void emit(const std::string& text, const std::string& output, const std::string& manifest_path,
          const std::string& command, const std::string& started) {
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + output + "'");
    out << text;
  }
  if (!manifest_path.empty()) {
    nlohmann::json m{{"tool", "recruitcast"},
                     {"version", kVersion},
                     {"command", command},
                     {"output", output.empty() ? "-" : output},
                     {"started", started},
                     {"finished", utc_now()}};
    const auto first = text.find('\n');
    const std::string head = text.substr(0, first);
    const std::string tag = "# manifest: ";
    if (head.rfind(tag, 0) == 0) {
      m["embedded"] = nlohmann::json::parse(head.substr(tag.size()));
    } else if (!text.empty() && text.front() == '{') {
      m["embedded"] = nlohmann::json::parse(text).at("manifest");
    }
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + manifest_path + "'");
    out << m.dump(2) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-centre recruitment forecasting with the Poisson-Gamma model"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string output;
  std::string manifest_path;
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--output,-o", output, "write result to this file instead of stdout");
    cmd->add_option("--manifest", manifest_path, "also write a timestamped run manifest");
  };

  InputArgs fit_in;
  auto* fit = app.add_subcommand("fit", "maximum-likelihood fit of (alpha, beta)");
  add_input_options(fit, fit_in);
  add_output(fit);

  InputArgs pred_in;
  std::string objective = "count";
  double horizon = 0.0;
  double level = 0.9;
  bool adjusted = false;
  auto* predict = app.add_subcommand("predict", "prediction interval for counts or time");
  add_input_options(predict, pred_in);
  predict->add_option("--objective", objective, "count or time")
      ->check(CLI::IsMember({"count", "time"}));
  predict->add_option("--horizon", horizon, "additional time (count) or recruits (time)")
      ->required();
  predict->add_option("--level", level, "interval level in (0, 1)");
  predict->add_flag("--adjusted", adjusted, "also report the asymptotically adjusted interval");
  add_output(predict);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo coverage study");
  auto* table_opt = simulate->add_option("--table", sim.table, "table id (2, 3, 4, D1..D6, F1, F2)");
  auto* config_opt = simulate->add_option("--config", sim.config_path, "custom JSON config");
  table_opt->excludes(config_opt);
  simulate->add_option("--seed", sim.seed, "base seed");
  simulate->add_option("--reps", sim.replications, "replications per row")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--threads", sim.threads, "worker threads")->check(CLI::PositiveNumber);
  add_output(simulate);

  CurvesOptions curves;
  auto* curves_cmd = app.add_subcommand("curves", "limit densities of the quantile probability");
  auto* figure_opt = curves_cmd->add_option("--figure", curves.figure,
                                            "fig1, fig2, fig3, fig4, figD1, figD2, figD3");
  auto* curves_config = curves_cmd->add_option("--config", curves.config_path,
                                               "custom JSON config (single series)");
  figure_opt->excludes(curves_config);
  curves_cmd->add_option("--p", curves.p, "quantile level for --config");
  curves_cmd->add_option("--series", curves.only_series, "restrict to one series label");
  curves_cmd->add_option("--seed", curves.seed, "base seed");
  curves_cmd->add_option("--reps", curves.replications, "replications per series")
      ->check(CLI::PositiveNumber);
  curves_cmd->add_option("--grid-points", curves.grid_points, "interior grid points on (0, 1)");
  curves_cmd->add_option("--threads", curves.threads, "worker threads")->check(CLI::PositiveNumber);
  add_output(curves_cmd);

  auto* diagnose = app.add_subcommand("diagnose", "model diagnostics");
  diagnose->require_subcommand(1);
  InputArgs qq_in;
  qq_in.format = "events";
  double window = 0.0;
  auto* qq = diagnose->add_subcommand("qq", "QQ plot data for counts in each centre's first window");
  add_input_options(qq, qq_in);
  qq->add_option("--window", window, "initial window length a")->required();
  add_output(qq);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  const std::string started = utc_now();
  try {
    if (*fit) {
      const auto report = cmd_fit(to_spec(fit_in));
      emit(report.dump(2) + "\n", output, manifest_path, "fit", started);
      return report.at("degenerate").get<bool>() ? kExitDegenerate : kExitOk;
    }
    if (*predict) {
      PredictOptions o{to_spec(pred_in), objective == "count" ? Objective::Count : Objective::Time,
                       horizon, level, adjusted};
      emit(cmd_predict(o).dump(2) + "\n", output, manifest_path, "predict", started);
    } else if (*simulate) {
      if (!sim.table && !sim.config_path) throw ConfigError("simulate needs --table or --config");
      emit(cmd_simulate(sim), output, manifest_path, "simulate", started);
    } else if (*curves_cmd) {
      if (curves.figure.empty() && !curves.config_path) {
        throw ConfigError("curves needs --figure or --config");
      }
      emit(cmd_curves(curves), output, manifest_path, "curves", started);
    } else if (*qq) {
      emit(cmd_diagnose_qq({to_spec(qq_in), window}), output, manifest_path, "diagnose qq",
           started);
    }
    return kExitOk;
  } catch (const DegenerateLikelihood& e) {
    std::cerr << "degenerate fit: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const DomainError& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

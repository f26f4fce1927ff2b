#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "recruit/io.hpp"
#include "recruit/predict.hpp"
#include "recruit/simulate.hpp"

namespace recruit {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitDataError = 2, kExitDegenerate = 3, kExitConfigError = 4 };

struct InputSpec {
  std::string path;
  CsvFormat format = CsvFormat::Summary;
  double census_time = 0.0;
};

/// Deterministic part of a run manifest: command, echoed configuration and
/// version. Timestamps live only in the optional sidecar manifest file.
nlohmann::json make_manifest(const std::string& command, nlohmann::json config);

nlohmann::json cmd_fit(const InputSpec& input);

struct PredictOptions {
  InputSpec input;
  Objective objective = Objective::Count;
  double horizon = 0.0;
  double level = 0.9;
  bool adjusted = false;
};
nlohmann::json cmd_predict(const PredictOptions& options);

struct SimulateOptions {
  std::optional<std::string> table;        ///< paper table id
  std::optional<std::string> config_path;  ///< custom JSON config
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};
/// CSV text, one row per table row, preceded by a `# manifest:` comment line.
std::string cmd_simulate(const SimulateOptions& options);

/// Parses a custom simulation config (JSON object).
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json sim_config_to_json(const SimConfig& c);

struct CurvesOptions {
  std::string figure;                      ///< figure id, or empty with config_path
  std::optional<std::string> config_path;  ///< custom single-series study
  double p = 0.5;                          ///< quantile level for a custom study
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  int grid_points = 99;
  std::optional<std::string> only_series;
  unsigned threads = 1;
};
/// CSV of series, grid point, theoretical and empirical density.
std::string cmd_curves(const CurvesOptions& options);

struct QqOptions {
  InputSpec input;
  double window = 0.0;
};
/// CSV of plotting position, theoretical and empirical quantiles.
std::string cmd_diagnose_qq(const QqOptions& options);

}  // namespace recruit

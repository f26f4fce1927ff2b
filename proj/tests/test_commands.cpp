#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "recruit/commands.hpp"
#include "recruit/distributions.hpp"

using namespace recruit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kSource = RECRUIT_SOURCE_DIR;
const std::string kBin = RECRUITCAST_BIN;

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("recruitcast_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& args, const std::string& out_name = "stdout.txt") {
  const std::string cmd = kBin + " " + args + " > " + (scratch() / out_name).string() + " 2> " +
                          (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.push_back("");
    rows.push_back(f);
  }
  return rows;
}

// Compares two JSON values, numbers to a relative tolerance.
void check_json_close(const json& a, const json& b, const std::string& where) {
  INFO(where);
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    CHECK(std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)));
    return;
  }
  REQUIRE(a.type() == b.type());
  if (a.is_object()) {
    REQUIRE(a.size() == b.size());
    for (auto it = b.begin(); it != b.end(); ++it) {
      REQUIRE(a.contains(it.key()));
      check_json_close(a.at(it.key()), it.value(), where + "." + it.key());
    }
  } else if (a.is_array()) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) check_json_close(a[i], b[i], where + "[" + std::to_string(i) + "]");
  } else {
    CHECK(a == b);
  }
}

}  // namespace

TEST_CASE("fit: golden demo report") {
  auto report = cmd_fit({kSource + "/data/demo_summary.csv", CsvFormat::Summary, 200});
  auto golden = json::parse(read_file(kSource + "/tests/golden/fit_demo.json"));
  // The echoed input path depends on where the tests run from.
  report["manifest"]["config"].erase("input");
  golden["manifest"]["config"].erase("input");
  check_json_close(report, golden, "fit");
  CHECK(report["gradient_norm"].get<double>() < 1e-8);

  // Events export of the same trial gives the same fit.
  const auto events = cmd_fit({kSource + "/data/demo_events.csv", CsvFormat::Events, 200});
  CHECK(events["alpha_hat"] == report["alpha_hat"]);
  CHECK(events["beta_hat"] == report["beta_hat"]);
}

TEST_CASE("fit: equal exposures report the pooled rate") {
  const auto path = write_file("equal.csv", "centre_id,open_time,count\nA,0,4\nB,0,9\nC,0,1\nD,0,15\nE,0,2\n");
  const auto r = cmd_fit({path, CsvFormat::Summary, 100});
  CHECK(r["equal_exposures"] == true);
  const double check = r["ratio_check"].get<double>();
  CHECK(check == doctest::Approx(31.0 / 500).epsilon(1e-15));
  CHECK(std::abs(r["alpha_over_beta"].get<double>() - check) / check < 1e-6);
}

TEST_CASE("fit: exit codes") {
  const auto empty = write_file("empty.csv", "");
  CHECK(run("fit --input " + empty + " --census 100") == 2);
  const auto flat = write_file("flat.csv", "centre_id,open_time,count\nA,0,4\nB,0,4\nC,0,4\n");
  CHECK(run("fit --input " + flat + " --census 100", "flat.json") == 3);
  CHECK(json::parse(read_file((scratch() / "flat.json").string()))["degenerate"] == true);
  const auto bad = write_file("bad.csv", "centre_id,open_time,count\nA,0,4\nB,150,1\n");
  CHECK(run("fit --input " + bad + " --census 100") == 2);
  CHECK(read_file((scratch() / "stderr.txt").string()).find("line 3") != std::string::npos);
  CHECK(run("fit --input " + flat + " --census 100 --format yaml") == 4);
  CHECK(run("fit --census 100") == 4);
  CHECK(run("fit --input " + kSource + "/data/demo_summary.csv --census 200") == 0);
}

TEST_CASE("predict: intervals and exit codes") {
  PredictOptions o;
  o.input = {kSource + "/data/demo_summary.csv", CsvFormat::Summary, 200};
  o.horizon = 200;
  const auto plain = cmd_predict(o);
  CHECK(plain["probs_used"][0].get<double>() == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(plain["probs_used"][1].get<double>() == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(plain["law"]["family"] == "negative_binomial");
  CHECK(plain.contains("pooled"));
  CHECK_FALSE(plain.contains("adjusted_interval"));

  o.adjusted = true;
  const auto adj = cmd_predict(o);
  CHECK(adj["adjusted_interval"]["lower"].get<double>() < adj["unadjusted"]["lower"].get<double>());
  CHECK(adj["adjusted_interval"]["upper"].get<double>() > adj["unadjusted"]["upper"].get<double>());
  CHECK(adj["interval"][0] == adj["adjusted_interval"]["lower"]);

  o.objective = Objective::Time;
  o.horizon = 60;
  const auto t = cmd_predict(o);
  CHECK(t["law"]["family"] == "pearson6");
  CHECK(t["adjusted_interval"]["lower"].get<double>() < t["unadjusted"]["lower"].get<double>());

  const auto flat = write_file("flat2.csv", "centre_id,open_time,count\nA,0,4\nB,0,4\nC,0,4\n");
  CHECK(run("predict --input " + flat + " --census 100 --horizon 50") == 3);
  CHECK(run("predict --input " + kSource + "/data/demo_summary.csv --census 200 --horizon 50 --level 1.5") == 4);
  CHECK(run("predict --input " + kSource + "/data/demo_summary.csv --census 200 --objective time --horizon 2.5") == 4);
}

TEST_CASE("simulate: table layouts") {
  SimulateOptions o;
  o.table = "2";
  o.replications = 20;
  const auto rows = csv_rows(cmd_simulate(o));
  REQUIRE(rows.size() == 8);
  CHECK(rows[0] == std::vector<std::string>{"t", "t_plus", "unadjusted_coverage", "unadjusted_width",
                                            "adjusted_coverage", "adjusted_width"});
  for (int i = 1; i <= 7; ++i) {
    CHECK(std::stod(rows[i][0]) == 50.0 * i);
    CHECK(std::stod(rows[i][1]) == 400 - 50.0 * i);
  }

  o.table = "3";
  o.replications = 5;
  const auto t3 = csv_rows(cmd_simulate(o));
  CHECK(t3[0] == std::vector<std::string>{"t", "t_plus", "t_star", "t_star_over_t_c", "n_star_over_n",
                                          "unadjusted_coverage", "unadjusted_width",
                                          "adjusted_coverage", "adjusted_width"});
  o.table = "D5";
  const auto d5 = csv_rows(cmd_simulate(o));
  CHECK(d5[0][0] == "t");
  CHECK(d5[0][1] == "t_star");

  o.table = "Z9";
  CHECK_THROWS_AS(cmd_simulate(o), ConfigError);
  CHECK(run("simulate --table Z9") == 4);
  CHECK(run("simulate") == 4);
}

TEST_CASE("simulate: custom config smoke run and manifest") {
  const auto cfg = write_file("cfg.json", R"({"prior": {"kind": "gamma", "alpha": 2, "beta": 150},
    "centres": 80, "census_time": 150, "schedule": "uniform", "objective": "count",
    "horizon": 100, "level": 0.8, "replications": 10, "seed": 5})");
  const auto start = std::chrono::steady_clock::now();
  SimulateOptions o;
  o.config_path = cfg;
  const auto text = cmd_simulate(o);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));
  const auto rows = csv_rows(text);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].back() == "excluded");

  // The embedded manifest reproduces the run.
  const auto head = text.substr(0, text.find('\n'));
  const auto manifest = json::parse(head.substr(std::string("# manifest: ").size()));
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["config"]["seed"] == 5);
  const auto again = write_file("cfg2.json", manifest["config"].dump());
  SimulateOptions o2;
  o2.config_path = again;
  CHECK(cmd_simulate(o2) == text);

  const auto side = (scratch() / "side.json").string();
  CHECK(run("simulate --config " + cfg + " --manifest " + side + " -o " + (scratch() / "sim.csv").string()) == 0);
  const auto sidecar = json::parse(read_file(side));
  CHECK(sidecar.contains("started"));
  CHECK(sidecar["embedded"] == manifest);
  CHECK(read_file((scratch() / "sim.csv").string()) == text);

  const auto broken = write_file("broken.json", R"({"centres": 0})");
  CHECK(run("simulate --config " + broken) == 4);
  const auto garbage = write_file("garbage.json", "{not json");
  CHECK(run("simulate --config " + garbage) == 4);
}

TEST_CASE("curves: grids and theoretical shapes") {
  CurvesOptions o;
  o.figure = "fig1";
  o.grid_points = 19;
  const auto rows = csv_rows(cmd_curves(o));
  CHECK(rows[0] == std::vector<std::string>{"series", "w", "theoretical_density", "empirical_density"});
  std::vector<double> at200;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].size() == 4);
    CHECK(rows[i][3].empty());
    if (rows[i][0] == "t=200") at200.push_back(std::stod(rows[i][2]));
  }
  REQUIRE(at200.size() == 19);
  for (std::size_t k = 0; k < at200.size(); ++k) {
    CHECK(at200[k] == doctest::Approx(at200[at200.size() - 1 - k]).epsilon(1e-9));
  }

  o.figure = "fig3";
  o.replications = 200;
  o.only_series = "t=50";
  const auto f3 = csv_rows(cmd_curves(o));
  REQUIRE(f3.size() == 20);
  // At p = 0.25 the split between the end masses favours 0.
  const double left = std::stod(f3[1][2]);
  const double right = std::stod(f3[19][2]);
  CHECK(left > right);
  for (std::size_t i = 1; i < f3.size(); ++i) {
    CHECK_FALSE(f3[i][3].empty());
    CHECK(std::stod(f3[i][1]) == doctest::Approx(i / 20.0).epsilon(1e-12));
  }

  o.figure = "fig9";
  CHECK_THROWS_AS(cmd_curves(o), ConfigError);
  o.figure = "fig3";
  o.only_series = "t=999";
  CHECK_THROWS_AS(cmd_curves(o), ConfigError);
}

TEST_CASE("diagnose qq") {
  // Trial simulated from a gamma-Poisson model; event times uniform given counts.
  Stream rng(31);
  std::ostringstream csv;
  csv << "centre_id,open_time,event_time\n";
  const double census = 200;
  for (int c = 0; c < 70; ++c) {
    const double open = rng.uniform() * 100;
    const double lam = sample_gamma({2.0, 150.0}, rng);
    const auto n = sample_poisson(lam * (census - open), rng);
    if (n == 0) csv << "k" << c << ',' << format_number(open) << ",\n";
    for (std::int64_t i = 0; i < n; ++i) {
      csv << "k" << c << ',' << format_number(open) << ','
          << format_number(open + rng.uniform() * (census - open)) << '\n';
    }
  }
  const auto path = write_file("events.csv", csv.str());
  QqOptions o{{path, CsvFormat::Events, census}, 100};
  const auto rows = csv_rows(cmd_diagnose_qq(o));
  CHECK(rows[0] == std::vector<std::string>{"plotting_position", "theoretical_quantile", "empirical_quantile"});
  const std::size_t m = rows.size() - 1;
  CHECK(m == 70);
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double x = std::stod(rows[i][1]), y = std::stod(rows[i][2]);
    sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
  }
  const double cov = sxy - sx * sy / m;
  const double corr = cov / std::sqrt((sxx - sx * sx / m) * (syy - sy * sy / m));
  CHECK(corr > 0.95);

  // Only centres open for the whole window enter.
  std::ostringstream small;
  small << "centre_id,open_time,event_time\n";
  for (int c = 0; c < 30; ++c) {
    const double open = c < 18 ? 5.0 * c : 150 + c;
    small << "q" << c << ',' << open << ",\n";
    for (int k = 0; k < (c * c) % 13; ++k) small << "q" << c << ',' << open << ',' << open + k << '\n';
  }
  const auto spath = write_file("small.csv", small.str());
  const auto srows = csv_rows(cmd_diagnose_qq({{spath, CsvFormat::Events, census}, census / 2}));
  CHECK(srows.size() - 1 == 18);

  CHECK_THROWS_AS(cmd_diagnose_qq({{path, CsvFormat::Events, census}, 0}), ConfigError);
  CHECK_THROWS_AS(cmd_diagnose_qq({{path, CsvFormat::Events, census}, 199}), TooFewCentres);
  CHECK(run("diagnose qq --input " + path + " --census 200 --window 0") == 4);
  CHECK(run("diagnose qq --input " + path + " --census 200 --window 199") == 2);
  CHECK(run("diagnose qq --input " + path + " --census 200 --window 50") == 0);
}

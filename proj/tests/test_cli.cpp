#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "kslab/commands.hpp"
#include "kslab/config.hpp"
#include "kslab/errors.hpp"

using namespace kslab;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kslab_unit_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::vector<std::string> config_errors(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.messages();
  }
  return {};
}

bool mentions(const std::vector<std::string>& msgs, const std::string& what) {
  for (const auto& m : msgs)
    if (m.find(what) != std::string::npos) return true;
  return false;
}

const char* kMinimal = R"({"command": "simulate", "sim": {"chi": 1, "M": 2, "initial": {"kind": "gaussian", "s": 0.5}}})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal config gets defaults and a stable hash") {
  const ExperimentConfig a = parse_config(kMinimal);
  CHECK(a.command == Command::simulate);
  CHECK(a.sim.chi == 1.0);
  CHECK(a.sim.mass == 2.0);
  CHECK(a.sim.n_cells == SimConfig{}.n_cells);
  CHECK(a.sim.rho_max == SimConfig{}.rho_max);
  CHECK(a.tolerances.envelope == CheckTolerances{}.envelope);
  CHECK(a.output == "out");

  const ExperimentConfig b = parse_config(
      "{\n  \"sim\": {\"initial\": {\"s\": 0.5, \"kind\": \"gaussian\"}, \"M\": 2.0, \"chi\": 1.0},\n"
      "  \"command\": \"simulate\"\n}\n");
  CHECK(a.hash == b.hash);
  CHECK(a.canonical == b.canonical);
  CHECK(parse_config(kMinimal).hash == a.hash);

  ExperimentConfig c = a;
  c.sim.seed = 99;
  refresh_hash(c);
  CHECK(c.hash != a.hash);
}

TEST_CASE("semantic errors are named and aggregated") {
  const auto missing = config_errors(R"({"command": "simulate", "sim": {"M": 2, "initial": {"kind": "gaussian", "s": 1}}})");
  REQUIRE(missing.size() == 1);
  CHECK(mentions(missing, "sim.chi"));

  const auto many = config_errors(
      R"({"command": "simulate", "sim": {"M": -1, "n_cells": 4, "initial": {"kind": "blob"}, "colour": 1}})");
  CHECK(many.size() >= 4);
  CHECK(mentions(many, "sim.chi"));
  CHECK(mentions(many, "sim.M"));
  CHECK(mentions(many, "sim.n_cells"));
  CHECK(mentions(many, "sim.initial.kind"));
  CHECK(mentions(many, "sim.colour"));

  CHECK(mentions(config_errors(R"({"command": "fly"})"), "command"));
  CHECK(mentions(config_errors(R"({"command": "sweep", "sweep": {"chi": [1], "M": []}})"), "sweep.I0"));
}

TEST_CASE("syntax errors report the line") {
  const auto e = config_errors("{\n  \"command\": \"simulate\",\n  \"sim\": {\"chi\": 1,, }\n}\n");
  REQUIRE(e.size() == 1);
  CHECK(mentions(e, "line 3"));
}

TEST_CASE("multiples of pi") {
  CHECK(parse_pi_multiple("16pi") == doctest::Approx(16.0 * kPi).epsilon(1e-15));
  CHECK(parse_pi_multiple("pi") == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(parse_pi_multiple("32pi/9") == doctest::Approx(32.0 * kPi / 9.0).epsilon(1e-15));
  CHECK(parse_pi_multiple("2.5 * pi") == doctest::Approx(2.5 * kPi).epsilon(1e-15));
  CHECK(parse_pi_multiple("12.5") == 12.5);
  CHECK_THROWS(parse_pi_multiple("pie"));
  CHECK_THROWS(parse_pi_multiple("16pi/0"));
}

TEST_CASE("sweep resolves to the cartesian product") {
  const ExperimentConfig c = parse_config(
      R"({"command": "sweep", "sim": {"rho_max": 6}, "sweep": {"chi": [0.5, 1, 2], "M": ["4pi", 20, 30], "I0": [5]}})");
  const auto cells = c.resolved_sweep();
  REQUIRE(cells.size() == 9);
  CHECK(cells[0].chi == 0.5);
  CHECK(cells[1].mass == 20.0);
  CHECK(cells[8].chi == 2.0);
  CHECK(cells[8].mass == 30.0);
  for (const auto& s : cells) {
    CHECK(s.rho_max == 6.0);
    CHECK(s.initial.kind == "gaussian");
    CHECK(s.initial.p_moment == 5.0);
  }
}

TEST_CASE("bounds command") {
  std::string inputs = R"({"chi": 1, "M": "16pi", "I0": 10}, {"chi": 1, "M": "4pi", "I0": 2})";
  for (int k = 0; k < 98; ++k) inputs += ", {\"chi\": 1, \"M\": " + std::to_string(1 + k) + ", \"I0\": 1}";
  const fs::path dir = scratch("bounds");
  ExperimentConfig c = parse_config(R"({"command": "bounds", "bounds": {"inputs": [)" + inputs + "]}}");
  c.output = dir.string();
  std::ostringstream log;
  REQUIRE(cmd_bounds(c, log) == kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "bounds.json"));
  REQUIRE(j["entries"].size() == 100);
  CHECK(j["entries"][0]["lambda_star"].get<double>() == doctest::Approx(20.82).epsilon(1e-3));
  CHECK(j["entries"][0]["t_bl"].get<double>() == doctest::Approx(0.144).epsilon(2e-3));
  CHECK(j["entries"][1]["t_bl"].is_null());
  for (int k = 0; k < 98; ++k) CHECK(j["entries"][k + 2]["inputs"]["M"].get<double>() == 1.0 + k);
  for (const char* key : {"lambda_star", "supercritical", "blowup_condition", "t_bl", "c_plus", "k_plus", "k2",
                          "entropy_prefactor", "h_of_q"})
    CHECK(j["entries"][0].contains(key));
}

TEST_CASE("sweep command") {
  const char* text = R"({"command": "sweep",
    "sim": {"rho_max": 8, "n_cells": 1024, "t_end": 0.2, "output_every": 0.05,
            "blowup": {"density_factor": 1000, "dt_floor": 4e-5}},
    "sweep": {"chi": [1], "M": ["4pi", "16pi"], "I0": [10, 30]}})";
  ExperimentConfig c = parse_config(text);
  c.output = scratch("sweep_a").string();
  std::ostringstream log;
  REQUIRE(cmd_sweep(c, 2, log) == kExitOk);
  const auto rows = read_csv(fs::path(c.output) / "phase_diagram.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0][5] == "regime");
  CHECK(rows[1][5] == "subcritical");
  CHECK(rows[2][5] == "subcritical");
  CHECK(rows[3][5] == "blowup_condition");
  CHECK(rows[4][5] == "uncovered");
  CHECK(rows[1][7] == "completed");
  CHECK(rows[3][7] == "blowup_detected");

  const std::string first = slurp(fs::path(c.output) / "phase_diagram.csv");
  c.output = scratch("sweep_b").string();
  REQUIRE(cmd_sweep(c, 1, log) == kExitOk);
  CHECK(slurp(fs::path(c.output) / "phase_diagram.csv") == first);

  SUBCASE("all subcritical") {
    ExperimentConfig s = parse_config(text);
    s.sweep.M = {2.0 * kPi, 4.0 * kPi};
    s.sweep.I0 = {5.0};
    s.output = scratch("sweep_sub").string();
    REQUIRE(cmd_sweep(s, 1, log) == kExitOk);
    for (const auto& r : read_csv(fs::path(s.output) / "phase_diagram.csv"))
      CHECK(r[7] != "blowup_detected");
  }
  CHECK(regime_label(1.0, 8.0 * kPi, 3.0) == "critical");
}

TEST_CASE("simulate command") {
  const char* text = R"({"command": "simulate",
    "sim": {"chi": 1, "M": "4pi", "initial": {"kind": "gaussian", "s": 0.2},
            "rho_max": 12, "n_cells": 512, "t_end": 1.0, "output_every": 0.05, "dt": {"max": 5e-3}}})";
  ExperimentConfig c = parse_config(text);
  const fs::path dir = scratch("sim");
  c.output = dir.string();
  std::ostringstream log;
  REQUIRE(cmd_simulate(c, log) == kExitOk);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["status"]["outcome"] == "completed");
  CHECK(summary["theory"]["t_bl"].is_null());
  CHECK(summary["hard_violations"] == 0);

  const auto rows = read_csv(dir / "series.csv");
  const auto& head = rows.front();
  const std::vector<std::string> stable{"t", "mass", "p_moment", "rho_moment", "entropy", "fisher",
                                        "interaction", "free_energy", "lq_1.5", "lq_2", "linf",
                                        "envelope_rhs", "p_bound", "ent_lower", "ent_upper", "flags"};
  REQUIRE(head.size() > stable.size());
  for (std::size_t k = 0; k < stable.size(); ++k) CHECK(head[k] == stable[k]);

  SUBCASE("summary is recomputable from the series") {
    auto col = [&](const std::string& name) {
      return static_cast<std::size_t>(std::find(head.begin(), head.end(), name) - head.begin());
    };
    double sup = 0.0, prev_t = -1.0;
    std::map<std::string, int> counts;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const double t = std::stod(rows[r][col("t")]);
      CHECK(t > prev_t);
      prev_t = t;
      sup = std::max(sup, std::stod(rows[r][col("linf")]));
      std::istringstream fl(rows[r][col("flags")]);
      std::string f;
      while (std::getline(fl, f, ';'))
        if (f != "ok") ++counts[f];
      const double p = std::stod(rows[r][col("p_moment")]), M = std::stod(rows[1][col("mass")]);
      const double env = std::stod(rows[r][col("envelope_rhs")]);
      const bool env_ok = (p + M) * (p + M) <= env + c.tolerances.envelope * std::abs(env);
      CHECK(env_ok == (rows[r][col("flags")].find("envelope") == std::string::npos));
    }
    CHECK(summary["rows"].get<std::size_t>() == rows.size() - 1);
    CHECK(summary["sup_linf"].get<double>() == sup);
    CHECK(summary["status"]["t_final"].get<double>() == prev_t);
    for (const auto& [name, n] : summary["violations"].items()) CHECK(n.get<int>() == counts[name]);
  }
  SUBCASE("rerun is byte-identical") {
    ExperimentConfig again = c;
    again.output = scratch("sim_again").string();
    REQUIRE(cmd_simulate(again, log) == kExitOk);
    CHECK(slurp(dir / "series.csv") == slurp(fs::path(again.output) / "series.csv"));
    CHECK(slurp(dir / "summary.json") == slurp(fs::path(again.output) / "summary.json"));
  }
  SUBCASE("unwritable output leaves nothing behind") {
    const fs::path base = scratch("blocked");
    fs::create_directories(base);
    std::ofstream(base / "file") << "x";
    ExperimentConfig bad = c;
    bad.output = (base / "file" / "out").string();
    CHECK(cmd_simulate(bad, log) == kExitIo);
    CHECK(std::distance(fs::directory_iterator(base), fs::directory_iterator{}) == 1);
  }
}

TEST_CASE("atomic writer") {
  const fs::path dir = scratch("atomic");
  write_files_atomically(dir, {{"a.txt", "alpha"}, {"b.txt", "beta"}});
  CHECK(slurp(dir / "a.txt") == "alpha");
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 2);
  fs::create_directories(dir / "c.txt");
  std::ofstream(dir / "c.txt" / "keep") << "x";
  CHECK_THROWS_AS(write_files_atomically(dir, {{"d.txt", "delta"}, {"c.txt", "gamma"}}), IoError);
  CHECK_FALSE(fs::exists(dir / "d.txt"));
  CHECK_FALSE(fs::exists(dir / ".d.txt.tmp"));
  CHECK_FALSE(fs::exists(dir / ".c.txt.tmp"));
}

TEST_CASE("inequalities command") {
  ExperimentConfig c = parse_config(
      R"({"command": "inequalities", "inequalities": {"ops": ["log_hls", "relative_entropy"], "densities": 3, "samples": 2000}})");
  c.output = scratch("ineq").string();
  std::ostringstream log;
  REQUIRE(cmd_inequalities(c, 2, log) == kExitOk);
  const auto j = nlohmann::json::parse(slurp(fs::path(c.output) / "inequalities_summary.json"));
  CHECK(j["pass_rate"].get<double>() == 1.0);
  CHECK(read_csv(fs::path(c.output) / "inequalities.csv").size() == 1 + 3 + 9);
}

TEST_CASE("formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(kPi)) == kPi);
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("plain") == "plain");
  CHECK(hash_hex(0xabc) == "0000000000000abc");
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

}

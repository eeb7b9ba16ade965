#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kslab/bounds.hpp"
#include "kslab/checks.hpp"
#include "kslab/inequality_lab.hpp"
#include "kslab/radial_solver.hpp"

namespace kslab {

inline constexpr const char* kCodeVersion = "0.1.0";

enum class Command { simulate, sweep, bounds, inequalities };
std::string to_string(Command c);

struct SweepSpec {
  std::vector<double> chi;
  std::vector<double> M;
  std::vector<double> I0;
};

struct BoundsSpec {
  std::vector<TheoryInputs> inputs;
  std::vector<double> q_list{1.5, 2.0};
  std::optional<double> T;  // horizon for the entropy upper bound
};

struct ExperimentConfig {
  Command command = Command::simulate;
  SimConfig sim;
  SweepSpec sweep;
  BoundsSpec bounds;
  BatterySpec inequalities;
  std::string output = "out";
  CheckTolerances tolerances;

  /// Canonical JSON of the resolved configuration and its FNV-1a hash.
  std::string canonical;
  std::uint64_t hash = 0;

  /// One SimConfig per (chi, M, I0) of the sweep, chi slowest, I0 fastest.
  std::vector<SimConfig> resolved_sweep() const;
};

/// Parses and validates a JSON configuration. Throws ConfigError carrying
/// every problem found; a syntax error reports its line and column.
ExperimentConfig parse_config(const std::string& text);

/// Accepts a number or a multiple of pi written as "16pi", "pi", "32pi/9".
double parse_pi_multiple(const std::string& s);

/// Recomputes canonical/hash after overrides (seed, output).
void refresh_hash(ExperimentConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace kslab

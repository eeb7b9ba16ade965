#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslab/functionals.hpp"
#include "kslab/radial_grid.hpp"

namespace kslab {

struct StepPolicy {
  double dt_init = 1e-4;
  double dt_min = 1e-14;
  double dt_max = 1e-2;
  /// Fraction of the positivity bound vol_i / (chi m_i) actually used.
  double safety = 0.5;
};

struct BlowupThresholds {
  double density_factor = 1e6;
  double dt_floor = 1e-9;
};

struct SimConfig {
  double chi = 1.0;
  double mass = 1.0;
  InitialSpec initial;
  double rho_max = 10.0;
  int n_cells = 1024;
  StepPolicy policy;
  double t_end = 1.0;
  BlowupThresholds blowup;
  /// Snapshot spacing in time; 0 records every accepted step.
  double output_every = 0.01;
  long max_steps = 10'000'000;
  std::uint64_t seed = 0;
  std::vector<double> q_list = kDefaultQList;
  std::vector<double> k_list = kDefaultKList;
};

enum class Outcome { completed, blowup_detected, budget_exhausted };
std::string to_string(Outcome o);

struct RunStatus {
  Outcome outcome = Outcome::completed;
  double t_final = 0.0;
  std::optional<double> blowup_time;
  long steps = 0;
  long rejected_steps = 0;
  std::string message;
};

/// Snapshots plus, per row, the step size the controller would have taken
/// (before clipping to output times) when the row was recorded.
struct TimeSeries {
  std::vector<FunctionalRecord> records;
  std::vector<double> dt;
};

RadialState project_initial(const SimConfig& config, const RadialGrid& grid);
RadialState project_initial(const SimConfig& config, std::shared_ptr<const RadialGrid> grid);

/// d c / d rho at interior edges 1 .. n_cells-1: -m(rho_e) / (2 pi sinh rho_e).
Eigen::VectorXd elliptic_drift(const RadialState& state);

/// Largest dt for which the explicit drift keeps every cell nonnegative:
/// min over cells of vol_i / (chi m_i). Infinite when chi = 0.
double positivity_bound(const RadialState& state);

/// One step: explicit upwind drift followed by implicit diffusion, both in
/// edge-flux form with zero flux at rho = 0 and rho_max.
/// Throws StepTooLargeError when dt exceeds positivity_bound.
RadialState step_fv(const RadialState& state, double dt);

/// Called after every accepted step with the new state and the step taken.
using StepObserver = std::function<void(const RadialState&, double dt)>;

struct RunResult {
  TimeSeries series;
  RunStatus status;
  RadialState final_state;
};

/// Adaptive time stepping from `initial` (its t and chi are used; config
/// supplies the policy, t_end, thresholds and cadence).
RunResult run_from(const RadialState& initial, const SimConfig& config,
                   const StepObserver& observer = {});

/// Builds the grid, projects the initial profile and calls run_from.
RunResult run_simulation(const SimConfig& config, const StepObserver& observer = {});

/// Heat semigroup: the chi = 0 evolution of `state` for a duration t.
RadialState heat_propagate(const RadialState& state, double t, const StepPolicy& policy = {});

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
  std::vector<double> times;
  std::vector<double> norms;
};

/// Least-squares slope of log ||e^{t Delta_H} u0||_q against log t at
/// log-spaced times in [t_lo, t_hi]. Throws ParameterError when
/// t_hi / t_lo < 2 or t_lo <= 0.
RateFit dispersive_rate_fit(const RadialState& u0, double q, double t_lo, double t_hi,
                            const StepPolicy& policy = {}, int points = 16);

/// Blow-up is declared at the first row where linf reaches
/// density_factor * initial linf and the row's dt is at or below dt_floor.
RunStatus detect_blowup(const TimeSeries& series, const SimConfig& config);

}  // namespace kslab

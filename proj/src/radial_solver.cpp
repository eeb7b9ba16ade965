#include "kslab/radial_solver.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kslab/errors.hpp"

namespace kslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGrowAfter = 10;
constexpr double kGrowFactor = 1.2;

double bound_from_mass(const RadialState& s, const Eigen::VectorXd& m) {
  if (s.chi == 0.0) return kInf;
  double b = kInf;
  for (Eigen::Index i = 1; i < s.n.size(); ++i) {
    if (m(i) > 0.0 && s.n(i) > 0.0) b = std::min(b, s.grid->volumes(i) / (s.chi * m(i)));
  }
  return b;
}

// Backward-Euler diffusion: (vol/dt) (x - rhs) = div of a_e (x_{i+1} - x_i).
Eigen::VectorXd implicit_diffusion(const RadialGrid& g, const Eigen::VectorXd& rhs, double dt) {
  const Eigen::Index n = g.size();
  Eigen::VectorXd lower(n), diag(n), upper(n), x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a_in = i == 0 ? 0.0 : kTwoPi * g.sinh_edges(i) / g.d_rho;
    const double a_out = i == n - 1 ? 0.0 : kTwoPi * g.sinh_edges(i + 1) / g.d_rho;
    const double r = dt / g.volumes(i);
    lower(i) = -r * a_in;
    upper(i) = -r * a_out;
    diag(i) = 1.0 + r * (a_in + a_out);
  }
  // Thomas algorithm; the matrix is strictly diagonally dominant.
  Eigen::VectorXd c(n), d(n);
  c(0) = upper(0) / diag(0);
  d(0) = rhs(0) / diag(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double den = diag(i) - lower(i) * c(i - 1);
    c(i) = upper(i) / den;
    d(i) = (rhs(i) - lower(i) * d(i - 1)) / den;
  }
  x(n - 1) = d(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);

  // Rebuild the update from the edge fluxes of x, so the cell masses change
  // by telescoping amounts regardless of rounding in the elimination.
  Eigen::VectorXd flux = Eigen::VectorXd::Zero(n + 1);
  for (Eigen::Index e = 1; e < n; ++e)
    flux(e) = dt * kTwoPi * g.sinh_edges(e) / g.d_rho * (x(e) - x(e - 1));
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = rhs(i) + (flux(i + 1) - flux(i)) / g.volumes(i);
    out(i) = v >= 0.0 ? v : x(i);
  }
  return out;
}

SimConfig heat_config(const RadialState& s, double t, const StepPolicy& policy) {
  SimConfig c;
  c.chi = 0.0;
  c.policy = policy;
  c.t_end = s.t + t;
  c.output_every = t > 0.0 ? t : 1.0;
  return c;
}

}  // namespace

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::completed: return "completed";
    case Outcome::blowup_detected: return "blowup_detected";
    case Outcome::budget_exhausted: return "budget_exhausted";
  }
  return "unknown";
}

RadialState project_initial(const SimConfig& config, std::shared_ptr<const RadialGrid> grid) {
  RadialState s;
  s.n = project_density(config.initial.to_density(config.mass), *grid);
  s.grid = std::move(grid);
  s.t = 0.0;
  s.chi = config.chi;
  return s;
}

RadialState project_initial(const SimConfig& config, const RadialGrid& grid) {
  return project_initial(config, std::make_shared<const RadialGrid>(grid));
}

Eigen::VectorXd elliptic_drift(const RadialState& s) {
  const Eigen::VectorXd m = cumulative_mass(s);
  const Eigen::Index n = s.n.size();
  Eigen::VectorXd out(n - 1);
  for (Eigen::Index e = 1; e < n; ++e) out(e - 1) = -m(e) / (kTwoPi * s.grid->sinh_edges(e));
  return out;
}

double positivity_bound(const RadialState& s) { return bound_from_mass(s, cumulative_mass(s)); }

RadialState step_fv(const RadialState& s, double dt) {
  if (!(dt > 0.0)) throw ParameterError("step_fv: dt must be positive");
  const RadialGrid& g = *s.grid;
  const Eigen::Index n = s.n.size();
  const Eigen::VectorXd m = cumulative_mass(s);
  const double bound = bound_from_mass(s, m);
  if (dt > bound) throw StepTooLargeError("step_fv: dt exceeds the positivity bound", bound);

  Eigen::VectorXd next = s.n;
  if (s.chi != 0.0) {
    // Inward drift through edge e, upwinded from the outer cell. The
    // circumference 2 pi sinh and the field m / (2 pi sinh) cancel.
    for (Eigen::Index e = 1; e < n; ++e) {
      const double moved = dt * s.chi * s.n(e) * m(e);
      next(e) -= moved / g.volumes(e);
      next(e - 1) += moved / g.volumes(e - 1);
    }
  }
  RadialState out;
  out.grid = s.grid;
  out.n = implicit_diffusion(g, next, dt);
  out.t = s.t + dt;
  out.chi = s.chi;
  return out;
}

RunResult run_from(const RadialState& initial, const SimConfig& cfg,
                   const StepObserver& observer) {
  const StepPolicy& pol = cfg.policy;
  if (!(pol.dt_min > 0.0) || !(pol.dt_max >= pol.dt_min) || !(pol.dt_init > 0.0) ||
      !(pol.safety > 0.0 && pol.safety <= 1.0)) {
    throw ParameterError("step policy: need 0 < dt_min <= dt_max, dt_init > 0, 0 < safety <= 1");
  }
  if (cfg.output_every < 0.0) throw ParameterError("output cadence must be >= 0");

  RunResult res;
  RadialState state = initial;
  const double linf0 = linf_norm(state);
  const double t0 = state.t;
  auto record = [&](double dt_ctrl) {
    res.series.records.push_back(functional_record(state, cfg.q_list, cfg.k_list));
    res.series.dt.push_back(dt_ctrl);
  };

  double dt = std::min(pol.dt_init, pol.dt_max);
  record(dt);
  const double t_tol = 1e-12 * std::max(1.0, std::abs(cfg.t_end));
  long out_index = 1;
  int clean = 0;
  RunStatus& st = res.status;

  while (state.t < cfg.t_end - t_tol) {
    if (st.steps >= cfg.max_steps) {
      st.outcome = Outcome::budget_exhausted;
      st.message = "step budget exhausted";
      break;
    }
    const double dt_ctrl = std::min({dt, pol.safety * positivity_bound(state), pol.dt_max});
    if (dt_ctrl < pol.dt_min) {
      st.outcome = Outcome::budget_exhausted;
      st.message = "time step fell below dt_min";
      break;
    }
    double target = cfg.t_end;
    if (cfg.output_every > 0.0) target = std::min(target, t0 + out_index * cfg.output_every);
    double dt_try = dt_ctrl;
    bool clipped = false;
    if (state.t + dt_try >= target - t_tol) {
      dt_try = target - state.t;
      clipped = true;
    }
    RadialState next = step_fv(state, dt_try);
    if (!(next.n.minCoeff() >= 0.0) || !next.n.allFinite()) {
      dt = 0.5 * dt_ctrl;
      clean = 0;
      ++st.rejected_steps;
      continue;
    }
    if (clipped) next.t = target;
    state = std::move(next);
    ++st.steps;
    if (++clean >= kGrowAfter) {
      dt = std::min(dt * kGrowFactor, pol.dt_max);
      clean = 0;
    }
    if (observer) observer(state, dt_try);

    const bool blown =
        linf_norm(state) >= cfg.blowup.density_factor * linf0 && dt_ctrl <= cfg.blowup.dt_floor;
    bool at_output = cfg.output_every == 0.0 || blown || state.t >= cfg.t_end - t_tol;
    if (cfg.output_every > 0.0 && state.t >= t0 + out_index * cfg.output_every - t_tol) {
      at_output = true;
      while (t0 + out_index * cfg.output_every <= state.t + t_tol) ++out_index;
    }
    if (at_output) record(dt_ctrl);
    if (blown) {
      st.outcome = Outcome::blowup_detected;
      st.blowup_time = state.t;
      break;
    }
  }
  if (res.series.records.back().t != state.t) record(dt);
  st.t_final = state.t;
  res.final_state = std::move(state);
  return res;
}

RunResult run_simulation(const SimConfig& cfg, const StepObserver& observer) {
  if (!(cfg.chi >= 0.0)) throw ParameterError("chi must be >= 0");
  if (!(cfg.mass > 0.0)) throw ParameterError("mass must be > 0");
  if (!(cfg.t_end >= 0.0)) throw ParameterError("t_end must be >= 0");
  auto grid = std::make_shared<const RadialGrid>(build_grid(cfg.rho_max, cfg.n_cells));
  return run_from(project_initial(cfg, grid), cfg, observer);
}

RadialState heat_propagate(const RadialState& s, double t, const StepPolicy& policy) {
  if (!(t >= 0.0)) throw ParameterError("heat_propagate: t must be >= 0");
  RadialState start = s;
  start.chi = 0.0;
  if (t == 0.0) return start;
  RunResult r = run_from(start, heat_config(start, t, policy));
  if (r.status.outcome != Outcome::completed) throw BudgetError("heat_propagate: " + r.status.message);
  return r.final_state;
}

RateFit dispersive_rate_fit(const RadialState& u0, double q, double t_lo, double t_hi,
                            const StepPolicy& policy, int points) {
  if (!(t_lo > 0.0) || !(t_hi >= 2.0 * t_lo))
    throw ParameterError("dispersive_rate_fit: window too narrow (need 0 < 2 t_lo <= t_hi)");
  if (points < 3) throw ParameterError("dispersive_rate_fit: need at least 3 points");
  RateFit fit;
  fit.points = points;
  RadialState cur = u0;
  cur.chi = 0.0;
  double elapsed = 0.0;
  for (int k = 0; k < points; ++k) {
    const double tk = t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (points - 1));
    cur = heat_propagate(cur, tk - elapsed, policy);
    elapsed = tk;
    fit.times.push_back(tk);
    fit.norms.push_back(lq_norm(cur, q));
  }
  Eigen::MatrixXd A(points, 2);
  Eigen::VectorXd y(points);
  for (int k = 0; k < points; ++k) {
    A(k, 0) = std::log(fit.times[k]);
    A(k, 1) = 1.0;
    y(k) = std::log(fit.norms[k]);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(y);
  fit.slope = coef(0);
  fit.intercept = coef(1);
  return fit;
}

RunStatus detect_blowup(const TimeSeries& series, const SimConfig& cfg) {
  if (series.records.empty()) throw ParameterError("detect_blowup: empty series");
  RunStatus st;
  const double linf0 = series.records.front().linf;
  for (std::size_t k = 0; k < series.records.size(); ++k) {
    const auto& r = series.records[k];
    if (r.linf >= cfg.blowup.density_factor * linf0 && series.dt[k] <= cfg.blowup.dt_floor) {
      st.outcome = Outcome::blowup_detected;
      st.blowup_time = r.t;
      st.t_final = r.t;
      return st;
    }
  }
  st.t_final = series.records.back().t;
  const double t_tol = 1e-12 * std::max(1.0, std::abs(cfg.t_end));
  st.outcome = st.t_final >= cfg.t_end - t_tol ? Outcome::completed : Outcome::budget_exhausted;
  return st;
}

}  // namespace kslab

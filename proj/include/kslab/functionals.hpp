#pragma once

#include <Eigen/Core>

#include <map>
#include <vector>

#include "kslab/radial_grid.hpp"

namespace kslab {

/// Every scalar diagnostic of one snapshot.
struct FunctionalRecord {
  double t = 0.0;
  double mass = 0.0;
  double p_moment = 0.0;
  double rho_moment = 0.0;
  double entropy = 0.0;
  double fisher = 0.0;
  double interaction = 0.0;
  double free_energy = 0.0;
  std::map<double, double> lq_norms;
  double linf = 0.0;
  double min_density = 0.0;
  std::map<double, double> m_t_K;
};

inline const std::vector<double> kDefaultQList{1.5, 2.0};
inline const std::vector<double> kDefaultKList{10.0, 100.0, 1000.0};

FunctionalRecord functional_record(const RadialState& state,
                                   const std::vector<double>& q_list = kDefaultQList,
                                   const std::vector<double>& k_list = kDefaultKList);

double mass(const RadialState& state);
double p_moment(const RadialState& state);
/// Cell-centre rule for the integral of rho * n.
double rho_moment(const RadialState& state);
/// Sum of n log n vol; cells below 1e-300 contribute nothing.
double entropy(const RadialState& state);
/// Edge differences of log n, weighted by the arithmetic-mean edge density.
double fisher_information(const RadialState& state);
double lq_norm(const RadialState& state, double q);
double linf_norm(const RadialState& state);
double truncated_excess_mass(const RadialState& state, double K);

/// Cumulative masses at the grid edges; m(0) = 0, m(rho_max) = mass.
Eigen::VectorXd cumulative_mass(const RadialState& state);

/// Potential c = (-Delta_H)^{-1} n at the edges, with the exact exterior
/// tail c(rho_max) = M G(rho_max).
Eigen::VectorXd potential_at_edges(const RadialState& state);

/// Volume averages of the potential over each cell, integrated exactly
/// within cells for piecewise-constant n (4-point Gauss for the average).
Eigen::VectorXd cell_potential(const RadialState& state);

/// <n, (-Delta_H)^{-1} n> as sum of n_i * cbar_i * vol_i.
double interaction_energy(const RadialState& state);

/// Same quantity as int m^2 / (2 pi sinh rho) d rho + M^2 G(rho_max).
double interaction_energy_form(const RadialState& state);

/// entropy - chi/2 * interaction.
double free_energy(const RadialState& state);

/// max over snapshots with t <= T of t^(1 - 1/q) ||n_t||_q. The q-norm must
/// be present in every record. Throws ParameterError on an empty series.
double xtq_seminorm(const std::vector<FunctionalRecord>& series, double q, double T);

}  // namespace kslab

#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

#include "kslab/test_density.hpp"

namespace kslab {

/// Uniform finite-volume grid in the geodesic radius. Cell volumes are the
/// exact hyperbolic annulus areas 2 pi (cosh b - cosh a).
struct RadialGrid {
  double rho_max = 0.0;
  double d_rho = 0.0;
  Eigen::VectorXd edges;    // n_cells + 1 entries, edges(0) = 0
  Eigen::VectorXd centers;  // midpoints
  Eigen::VectorXd volumes;
  Eigen::VectorXd p_mean;   // volume average of p = cosh rho - 1 over each cell
  Eigen::VectorXd sinh_edges;

  Eigen::Index size() const { return volumes.size(); }
  double total_volume() const;
};

/// 2 pi (cosh b - cosh a), evaluated without cancellation.
double annulus_volume(double a, double b);

/// Throws ParameterError unless rho_max > 0 and n_cells >= 16.
RadialGrid build_grid(double rho_max, int n_cells);

/// Cell-average densities on a shared grid.
struct RadialState {
  std::shared_ptr<const RadialGrid> grid;
  Eigen::VectorXd n;
  double t = 0.0;
  double chi = 0.0;
};

/// Radial initial profile. A gaussian is given either by its width s or by
/// a target p-moment (then s = p_moment / mass).
struct InitialSpec {
  std::string kind = "gaussian";  // gaussian | annulus | mixture
  double s = 0.0;
  double p_moment = 0.0;
  double a = 0.0, b = 0.0;
  std::vector<InitialSpec> components;
  std::vector<double> weights;

  TestDensity to_density(double mass) const;
};

/// Cell averages of `density` by per-cell Gauss quadrature (split at the
/// profile's breakpoints), rescaled so the grid mass equals the density's
/// mass exactly. Throws TruncationError if more than 1% of the mass lies
/// beyond the grid.
Eigen::VectorXd project_density(const TestDensity& density, const RadialGrid& grid);

}  // namespace kslab

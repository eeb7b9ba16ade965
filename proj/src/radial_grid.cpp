#include "kslab/radial_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kslab/errors.hpp"
#include "kslab/geometry.hpp"
#include "kslab/quadrature.hpp"

namespace kslab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMinCells = 16;
constexpr double kMaxTruncation = 0.01;
}  // namespace

double RadialGrid::total_volume() const { return annulus_volume(0.0, rho_max); }

double annulus_volume(double a, double b) {
  return 2.0 * kTwoPi * std::sinh(0.5 * (a + b)) * std::sinh(0.5 * (b - a));
}

RadialGrid build_grid(double rho_max, int n_cells) {
  if (!(rho_max > 0.0) || !std::isfinite(rho_max))
    throw ParameterError("build_grid: rho_max must be positive and finite");
  if (n_cells < kMinCells) throw ParameterError("build_grid: need at least 16 cells");
  RadialGrid g;
  g.rho_max = rho_max;
  g.d_rho = rho_max / n_cells;
  g.edges.resize(n_cells + 1);
  for (int e = 0; e <= n_cells; ++e) g.edges(e) = rho_max * e / n_cells;
  g.edges(n_cells) = rho_max;
  g.centers.resize(n_cells);
  g.volumes.resize(n_cells);
  g.p_mean.resize(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    const double a = g.edges(i), b = g.edges(i + 1);
    g.centers(i) = 0.5 * (a + b);
    g.volumes(i) = annulus_volume(a, b);
    g.p_mean(i) = 0.5 * (weight_p(a) + weight_p(b));
  }
  g.sinh_edges = g.edges.array().sinh();
  return g;
}

TestDensity InitialSpec::to_density(double mass) const {
  if (kind == "gaussian") {
    const double width = s > 0.0 ? s : p_moment / mass;
    return TestDensity::hyperbolic_gaussian(width, mass);
  }
  if (kind == "annulus") return TestDensity::annulus(a, b, mass);
  if (kind == "mixture") {
    if (components.empty() || components.size() != weights.size())
      throw ParameterError("mixture initial spec needs matching components and weights");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw ParameterError("mixture weights must sum to a positive value");
    std::vector<TestDensity> parts;
    std::vector<double> ones;
    for (std::size_t k = 0; k < components.size(); ++k) {
      parts.push_back(components[k].to_density(mass * weights[k] / total));
      ones.push_back(1.0);
    }
    return TestDensity::mixture(std::move(parts), std::move(ones));
  }
  throw ParameterError("unknown initial density kind '" + kind + "'");
}

Eigen::VectorXd project_density(const TestDensity& density, const RadialGrid& grid) {
  const std::vector<double> breaks = density.radial_breakpoints();
  const GaussRule gl = gauss_legendre(8);
  const Eigen::Index n = grid.size();
  Eigen::VectorXd out(n);
  std::vector<double> cuts;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = grid.edges(i), b = grid.edges(i + 1);
    cuts.assign({a, b});
    for (double bp : breaks) {
      if (bp > a && bp < b) cuts.push_back(bp);
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double half = 0.5 * (cuts[k + 1] - cuts[k]), mid = 0.5 * (cuts[k + 1] + cuts[k]);
      for (int j = 0; j < gl.nodes.size(); ++j) {
        const double r = mid + half * gl.nodes(j);
        acc += half * gl.weights(j) * kTwoPi * std::sinh(r) * density.radial_value(r);
      }
    }
    out(i) = acc / grid.volumes(i);
  }
  const double on_grid = out.dot(grid.volumes);
  if (!(on_grid >= (1.0 - kMaxTruncation) * density.mass())) {
    throw TruncationError("initial profile: more than 1% of the mass lies beyond rho_max");
  }
  out *= density.mass() / on_grid;
  return out;
}

}  // namespace kslab

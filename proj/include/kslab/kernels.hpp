#pragma once

#include "kslab/geometry.hpp"
#include "kslab/test_density.hpp"

namespace kslab {

/// Green function of -Delta_H as a function of geodesic distance:
/// G(rho) = -(1/2pi) log tanh(rho/2). Throws SingularityError at rho <= 0.
double green_value(double rho);

/// dG/drho = -1 / (2 pi sinh rho).
double green_radial_derivative(double rho);

/// Value and Euclidean x-gradient of the Green function for a point pair.
struct KernelValue {
  double g = 0.0;
  Vec2<double> grad = Vec2<double>::Zero();
};
KernelValue green_kernel(const Point& x, const Point& y);

/// H(x,y) = log |T_x(y)|^2, so that G = -H / (4 pi).
double h_value(const Point& x, const Point& y);

/// Euclidean gradient of H in its first argument. Throws SingularityError
/// when |x - y| < 1e-12.
Vec2<double> grad_x_H(const Point& x, const Point& y);

/// L(x,y) = 2 (1 - |x|^2 |y|^2) / V(x,y), the interaction factor of the
/// p-moment identity.
double l_factor(const Point& x, const Point& y);

/// The symmetrised gradient combination
///   ((1-|x|^2)/2)^2 grad p(x) . grad_x H + (x <-> y),
/// assembled from the pieces. Equals l_factor(x, y).
double l_factor_assembled(const Point& x, const Point& y);

/// Lower bound 2 (1 - |x||y|) / (1 + |x||y|) for L, from V <= (1 + |x||y|)^2.
double l_factor_lower_bound(const Point& x, const Point& y);

/// Tensor-quadrature settings for kernel sums. The rule is refined by
/// doubling both directions until successive results agree to `tol`
/// (relative) or `max_nodes` is exceeded.
struct PotentialQuadrature {
  int rho_panels = 48;
  int theta_panels = 24;
  int order = 8;
  double tol = 1e-9;
  long max_nodes = 20'000'000;
};

/// c(x) = int G(x,y) f(y) dV_y by quadrature in geodesic polar
/// coordinates centred at x (substituting y = T_x(z)). Nodes closer than
/// 1e-8 to x are skipped. Throws BudgetError when `tol` is not reached.
double potential_quadrature(const TestDensity& density, const Point& x,
                            const PotentialQuadrature& q = {});

/// d c / d rho along the ray through x, by quadrature of the Green function
/// against the derivative of the translated density (shared nodes).
double potential_radial_derivative_quadrature(const TestDensity& density, double rho,
                                              const PotentialQuadrature& q = {});

/// <f, (-Delta_H)^{-1} f> by nested quadrature (outer over f, inner via
/// potential_quadrature). Slow; intended for coarse cross-checks.
double interaction_double_quadrature(const TestDensity& density, const QuadratureOrder& outer,
                                     const PotentialQuadrature& inner);

}  // namespace kslab

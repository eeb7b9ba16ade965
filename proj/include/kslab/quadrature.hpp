#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace kslab {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule, nodes by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

/// Nodes and weights of a composite Gauss-Legendre rule on [a, b] with
/// `panels` equal panels of `order` points each. Extra breakpoints inside
/// (a, b) split panels so discontinuities fall on panel edges.
struct CompositeRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
CompositeRule composite_gauss(double a, double b, int panels, int order,
                              std::span<const double> breakpoints = {});

/// Integral of f over [a, b] with the composite rule above.
double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           int panels, int order, std::span<const double> breakpoints = {});

/// Lanczos approximation of Gamma(x) (g = 7, 9 coefficients) with reflection
/// for x < 1/2.
double lanczos_gamma(double x);

/// Fixed-order pairwise sum; identical result for identical input order.
double pairwise_sum(std::span<const double> values);

}  // namespace kslab

#include "kslab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCoincidence = 1e-12;
constexpr double kNodeSkip = 1e-8;

// Polar window (in coordinates centred at the evaluation point) that
// contains the support ball of radius S about the origin. The origin itself
// sits at z0 = T_x(0) = x, at distance d.
struct Window {
  double rho_lo, rho_hi;
  double theta_lo, theta_hi;
};

Window support_window(const Point& x, double support) {
  const double d = x.rho();
  if (d <= support) return {0.0, d + support, 0.0, kTwoPi};
  const double alpha = std::asin(std::min(1.0, std::sinh(support) / std::sinh(d)));
  const double theta0 = std::atan2(x.x2(), x.x1());
  return {d - support, d + support, theta0 - alpha, theta0 + alpha};
}

// Tensor rule in (u, theta) with rho = u^2, weights folded with the volume
// element sinh(rho) and the Green function.
struct PolarNodes {
  std::vector<double> rho, theta;
  std::vector<double> w_rho, w_theta;
};

PolarNodes polar_nodes(const Window& w, int rho_panels, int theta_panels, int order) {
  PolarNodes out;
  const CompositeRule ru =
      composite_gauss(std::sqrt(w.rho_lo), std::sqrt(w.rho_hi), rho_panels, order);
  const CompositeRule rt = composite_gauss(w.theta_lo, w.theta_hi, theta_panels, order);
  for (std::size_t i = 0; i < ru.nodes.size(); ++i) {
    const double u = ru.nodes[i];
    const double rho = u * u;
    if (rho < kNodeSkip) continue;
    out.rho.push_back(rho);
    out.w_rho.push_back(ru.weights[i] * 2.0 * u * std::sinh(rho) * green_value(rho));
  }
  out.theta = rt.nodes;
  out.w_theta = rt.weights;
  return out;
}

double potential_on_nodes(const TestDensity& f, const Point& x, const PolarNodes& nodes) {
  std::vector<double> rows(nodes.rho.size());
  std::vector<double> cols(nodes.theta.size());
  for (std::size_t i = 0; i < nodes.rho.size(); ++i) {
    const double r = std::tanh(0.5 * nodes.rho[i]);
    for (std::size_t j = 0; j < nodes.theta.size(); ++j) {
      const double th = nodes.theta[j];
      const Point z(r * std::cos(th), r * std::sin(th));
      cols[j] = nodes.w_theta[j] * f(mobius_translate(x, z));
    }
    rows[i] = nodes.w_rho[i] * pairwise_sum(cols);
  }
  return pairwise_sum(rows);
}

template <typename Eval>
double refine_until_converged(const PotentialQuadrature& q, Eval&& eval, const char* what) {
  if (q.rho_panels < 1 || q.theta_panels < 1 || q.order < 1)
    throw ParameterError("potential quadrature: panels and order must be positive");
  int rp = q.rho_panels, tp = q.theta_panels;
  double prev = eval(rp, tp);
  while (true) {
    rp *= 2;
    tp *= 2;
    const long nodes = static_cast<long>(rp) * tp * q.order * q.order;
    if (nodes > q.max_nodes) {
      throw BudgetError(std::string(what) + ": tolerance not reached within the node cap");
    }
    const double cur = eval(rp, tp);
    if (std::abs(cur - prev) <= q.tol * std::abs(cur)) return cur;
    prev = cur;
  }
}

}  // namespace

double green_value(double rho) {
  if (!(rho > 0.0)) throw SingularityError("green_value: rho must be > 0");
  // tanh(rho/2) = 1 - 2/(e^rho + 1); log1p keeps the far field accurate.
  const double lt = rho < 1.0 ? std::log(std::tanh(0.5 * rho))
                              : std::log1p(-2.0 / (std::exp(rho) + 1.0));
  return -lt / kTwoPi;
}

double green_radial_derivative(double rho) {
  if (!(rho > 0.0)) throw SingularityError("green_radial_derivative: rho must be > 0");
  return -1.0 / (kTwoPi * std::sinh(rho));
}

double h_value(const Point& x, const Point& y) {
  const double t2 = mobius_norm2(x, y);
  if (!(t2 > 0.0)) throw SingularityError("h_value: coincident points");
  return std::log(t2);
}

Vec2<double> grad_x_H(const Point& x, const Point& y) {
  const Vec2<double> d = x.coords() - y.coords();
  const double d2 = d.squaredNorm();
  if (std::sqrt(d2) < kCoincidence) throw SingularityError("grad_x_H: coincident points");
  const double v = v_factor_sum_form(x, y);
  const double wx = 1.0 - x.norm2(), wy = 1.0 - y.norm2();
  return 2.0 * wx * wy / (d2 * v) * d + 2.0 * wy / v * x.coords();
}

KernelValue green_kernel(const Point& x, const Point& y) {
  KernelValue k;
  k.g = green_value(hyperbolic_distance(x, y));
  k.grad = -grad_x_H(x, y) / (2.0 * kTwoPi);
  return k;
}

double l_factor(const Point& x, const Point& y) {
  return 2.0 * (1.0 - x.norm2() * y.norm2()) / v_factor_sum_form(x, y);
}

double l_factor_assembled(const Point& x, const Point& y) {
  auto half_term = [](const Point& a, const Point& b) {
    const double w = 0.5 * (1.0 - a.norm2());
    return w * w * weight_p_gradient(a).dot(grad_x_H(a, b));
  };
  return half_term(x, y) + half_term(y, x);
}

double l_factor_lower_bound(const Point& x, const Point& y) {
  const double r = x.norm() * y.norm();
  return 2.0 * (1.0 - r) / (1.0 + r);
}

double potential_quadrature(const TestDensity& density, const Point& x,
                            const PotentialQuadrature& q) {
  const Window w = support_window(x, density.support_radius());
  return refine_until_converged(
      q,
      [&](int rp, int tp) {
        return potential_on_nodes(density, x, polar_nodes(w, rp, tp, q.order));
      },
      "potential_quadrature");
}

double potential_radial_derivative_quadrature(const TestDensity& density, double rho,
                                              const PotentialQuadrature& q) {
  const double h = 1e-5;
  const Point xm(std::tanh(0.5 * (rho - h)), 0.0);
  const Point xp(std::tanh(0.5 * (rho + h)), 0.0);
  const Point x0(std::tanh(0.5 * rho), 0.0);
  // One window for both shifted points, padded by the shift.
  const Window w = support_window(x0, density.support_radius() + 2.0 * h);
  return refine_until_converged(
      q,
      [&](int rp, int tp) {
        const PolarNodes nodes = polar_nodes(w, rp, tp, q.order);
        return (potential_on_nodes(density, xp, nodes) - potential_on_nodes(density, xm, nodes)) /
               (2.0 * h);
      },
      "potential_radial_derivative_quadrature");
}

double interaction_double_quadrature(const TestDensity& density, const QuadratureOrder& outer,
                                     const PotentialQuadrature& inner) {
  return density.integrate(
      [&](const Point& y) { return potential_quadrature(density, y, inner); }, outer);
}

}  // namespace kslab

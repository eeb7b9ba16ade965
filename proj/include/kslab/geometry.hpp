#pragma once

// Poincare-disk geometry. Everything here is a pure function of its inputs;
// the point type and the free functions are templated on the scalar so they
// can be instantiated for long double in accuracy checks.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <numbers>

#include "kslab/errors.hpp"

namespace kslab {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// Points with |x| > 1 - kBoundaryMargin are rejected, not clamped.
inline constexpr double kBoundaryMargin = 1e-9;

template <typename Scalar = double>
class DiskPoint {
 public:
  DiskPoint() : x_(Vec2<Scalar>::Zero()) {}
  DiskPoint(Scalar x1, Scalar x2) : DiskPoint(Vec2<Scalar>(x1, x2)) {}
  explicit DiskPoint(const Vec2<Scalar>& x) : x_(x) {
    using std::sqrt;
    const Scalar r = sqrt(x_.squaredNorm());
    if (!(r <= Scalar(1) - Scalar(kBoundaryMargin))) {
      throw DomainError("point outside the open unit disk (|x| >= 1 - 1e-9)");
    }
  }

  /// Point at hyperbolic distance rho from the origin, polar angle theta.
  static DiskPoint polar(Scalar rho, Scalar theta) {
    using std::cos;
    using std::sin;
    using std::tanh;
    const Scalar r = tanh(rho / Scalar(2));
    return DiskPoint(r * cos(theta), r * sin(theta));
  }

  const Vec2<Scalar>& coords() const { return x_; }
  Scalar x1() const { return x_(0); }
  Scalar x2() const { return x_(1); }
  Scalar norm2() const { return x_.squaredNorm(); }
  Scalar norm() const { return x_.norm(); }

  /// Hyperbolic distance to the origin.
  Scalar rho() const {
    using std::atanh;
    return Scalar(2) * atanh(norm());
  }

 private:
  Vec2<Scalar> x_;
};

using Point = DiskPoint<double>;

/// V(x,y) = 1 - 2 x.y + |x|^2 |y|^2.
template <typename Scalar>
Scalar v_factor(const DiskPoint<Scalar>& x, const DiskPoint<Scalar>& y) {
  return Scalar(1) - Scalar(2) * x.coords().dot(y.coords()) + x.norm2() * y.norm2();
}

/// Same quantity in the form |x-y|^2 + (1-|x|^2)(1-|y|^2); always positive.
template <typename Scalar>
Scalar v_factor_sum_form(const DiskPoint<Scalar>& x, const DiskPoint<Scalar>& y) {
  return (x.coords() - y.coords()).squaredNorm() +
         (Scalar(1) - x.norm2()) * (Scalar(1) - y.norm2());
}

/// Mobius translation T_x(y); sends x to the origin and is an involution.
template <typename Scalar>
DiskPoint<Scalar> mobius_translate(const DiskPoint<Scalar>& x, const DiskPoint<Scalar>& y) {
  const Vec2<Scalar> d = y.coords() - x.coords();
  const Vec2<Scalar> num = d.squaredNorm() * x.coords() - (Scalar(1) - x.norm2()) * d;
  return DiskPoint<Scalar>(Vec2<Scalar>(num / v_factor_sum_form(x, y)));
}

/// |T_x(y)|^2 = |x-y|^2 / V(x,y), without forming T_x(y).
template <typename Scalar>
Scalar mobius_norm2(const DiskPoint<Scalar>& x, const DiskPoint<Scalar>& y) {
  return (x.coords() - y.coords()).squaredNorm() / v_factor_sum_form(x, y);
}

template <typename Scalar>
Scalar hyperbolic_distance(const DiskPoint<Scalar>& x, const DiskPoint<Scalar>& y) {
  using std::atanh;
  using std::sqrt;
  // 2 atanh(t) = log((1+t)/(1-t)), accurate for small separations.
  return Scalar(2) * atanh(sqrt(mobius_norm2(x, y)));
}

/// Exponential weight p = cosh(rho) - 1 = 2 sinh^2(rho/2).
template <typename Scalar>
Scalar weight_p(Scalar rho) {
  using std::sinh;
  const Scalar s = sinh(rho / Scalar(2));
  return Scalar(2) * s * s;
}

/// Point form of the weight, 2|x|^2 / (1 - |x|^2).
template <typename Scalar>
Scalar weight_p(const DiskPoint<Scalar>& x) {
  return Scalar(2) * x.norm2() / (Scalar(1) - x.norm2());
}

/// Euclidean gradient of the weight, 4x / (1-|x|^2)^2.
template <typename Scalar>
Vec2<Scalar> weight_p_gradient(const DiskPoint<Scalar>& x) {
  const Scalar w = Scalar(1) - x.norm2();
  return Scalar(4) * x.coords() / (w * w);
}

/// Conformal factor (2 / (1-|x|^2))^2 of the metric and the volume element.
template <typename Scalar>
Scalar metric_factor(const DiskPoint<Scalar>& x) {
  const Scalar w = Scalar(2) / (Scalar(1) - x.norm2());
  return w * w;
}

/// Discrete radial Laplace-Beltrami operator f'' + coth(rho) f' on a uniform
/// grid rho_j = rho0 + j*h. Second order everywhere; at rho = 0 the limit
/// 2 f''(0) with even reflection is used, at a nonzero left end and at the
/// right end one-sided four-point stencils.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> laplace_beltrami_radial(
    const Eigen::MatrixBase<Derived>& f, typename Derived::Scalar rho0,
    typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::tanh;
  const Eigen::Index n = f.size();
  if (n < 3) throw ParameterError("laplace_beltrami_radial: need at least 3 grid points");
  if (!(h > Scalar(0))) throw ParameterError("laplace_beltrami_radial: spacing must be positive");
  if (rho0 < Scalar(0)) throw ParameterError("laplace_beltrami_radial: grid must start at rho >= 0");

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  const Scalar h2 = h * h;
  auto coth = [](Scalar r) { return Scalar(1) / tanh(r); };

  auto left_or_right = [&](Eigen::Index j, int dir) {
    // dir = +1: forward stencil from j, dir = -1: backward stencil.
    const auto at = [&](int k) { return f(j + dir * k); };
    Scalar d2, d1;
    if (n >= 4) {
      d2 = (Scalar(2) * at(0) - Scalar(5) * at(1) + Scalar(4) * at(2) - at(3)) / h2;
    } else {
      d2 = (at(0) - Scalar(2) * at(1) + at(2)) / h2;
    }
    d1 = Scalar(dir) * (-Scalar(3) * at(0) + Scalar(4) * at(1) - at(2)) / (Scalar(2) * h);
    return d2 + coth(rho0 + Scalar(j) * h) * d1;
  };

  for (Eigen::Index j = 1; j + 1 < n; ++j) {
    const Scalar rho = rho0 + Scalar(j) * h;
    const Scalar d2 = (f(j + 1) - Scalar(2) * f(j) + f(j - 1)) / h2;
    const Scalar d1 = (f(j + 1) - f(j - 1)) / (Scalar(2) * h);
    out(j) = d2 + coth(rho) * d1;
  }
  if (abs(rho0) == Scalar(0)) {
    out(0) = Scalar(4) * (f(1) - f(0)) / h2;
  } else {
    out(0) = left_or_right(0, +1);
  }
  out(n - 1) = left_or_right(n - 1, -1);
  return out;
}

}  // namespace kslab

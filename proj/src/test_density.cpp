#include "kslab/test_density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// exp(-60) relative tail is dropped from gaussian quadrature and support.
constexpr double kGaussianTail = 60.0;
constexpr double kMassCheckTol = 1e-6;

double rho_of_p(double p) { return 2.0 * std::asinh(std::sqrt(0.5 * p)); }

Point point_from_p(double p, double theta) {
  const double r = std::sqrt(p / (p + 2.0));
  return Point(r * std::cos(theta), r * std::sin(theta));
}

double polar_integral(const std::function<double(double, double)>& integrand, double lo,
                      double hi, const std::vector<double>& breakpoints,
                      const QuadratureOrder& q) {
  const CompositeRule rr = composite_gauss(lo, hi, q.rho_panels, q.order, breakpoints);
  const CompositeRule tt = composite_gauss(0.0, kTwoPi, q.theta_panels, q.order);
  std::vector<double> rows(rr.nodes.size());
  std::vector<double> cols(tt.nodes.size());
  for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
    const double rho = rr.nodes[i];
    for (std::size_t j = 0; j < tt.nodes.size(); ++j) {
      cols[j] = tt.weights[j] * integrand(rho, tt.nodes[j]);
    }
    rows[i] = rr.weights[i] * std::sinh(rho) * pairwise_sum(cols);
  }
  return pairwise_sum(rows);
}

}  // namespace

std::string to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::hyperbolic_gaussian: return "hyperbolic_gaussian";
    case DensityKind::mobius_translated: return "mobius_translated";
    case DensityKind::annulus: return "annulus";
    case DensityKind::mixture: return "mixture";
  }
  return "unknown";
}

double radial_measure_integral(const std::function<double(double)>& g, double lo, double hi,
                               int panels, int order, const std::vector<double>& breakpoints) {
  return integrate_composite(
      [&](double rho) { return kTwoPi * std::sinh(rho) * g(rho); }, lo, hi, panels, order,
      breakpoints);
}

struct TestDensity::Model {
  virtual ~Model() = default;
  virtual DensityKind kind() const = 0;
  virtual std::string describe() const = 0;
  virtual double mass() const = 0;
  virtual double value(const Point& x) const = 0;
  virtual Point sample(Rng& rng) const = 0;
  virtual bool radial() const = 0;
  virtual bool smooth() const = 0;
  virtual double radial_value(double rho) const = 0;
  virtual double radial_derivative(double rho) const = 0;
  virtual std::vector<double> breakpoints() const = 0;
  virtual double support_radius() const = 0;
  virtual double integrate(const std::function<double(const Point&)>& h,
                           const QuadratureOrder& q) const = 0;
  virtual std::shared_ptr<const Model> scaled(double factor) const = 0;
};

namespace {

using Model = TestDensity::Model;

class GaussianModel final : public Model {
 public:
  GaussianModel(double s, double mass) : s_(s), mass_(mass) {}
  DensityKind kind() const override { return DensityKind::hyperbolic_gaussian; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(6);
    os << "gaussian(s=" << s_ << ",M=" << mass_ << ")";
    return os.str();
  }
  double mass() const override { return mass_; }
  double value(const Point& x) const override { return profile_p(weight_p(x)); }
  Point sample(Rng& rng) const override {
    const double p = s_ * rng.exponential();
    return point_from_p(p, kTwoPi * rng.uniform());
  }
  bool radial() const override { return true; }
  bool smooth() const override { return true; }
  double radial_value(double rho) const override { return profile_p(weight_p(rho)); }
  double radial_derivative(double rho) const override {
    return -std::sinh(rho) / s_ * radial_value(rho);
  }
  std::vector<double> breakpoints() const override { return {}; }
  double support_radius() const override { return rho_of_p(kGaussianTail * s_); }
  double integrate(const std::function<double(const Point&)>& h,
                   const QuadratureOrder& q) const override {
    return polar_integral(
        [&](double rho, double theta) {
          return h(Point::polar(rho, theta)) * radial_value(rho);
        },
        0.0, support_radius(), {}, q);
  }
  std::shared_ptr<const Model> scaled(double factor) const override {
    return std::make_shared<GaussianModel>(s_, mass_ * factor);
  }

 private:
  double profile_p(double p) const { return mass_ / (kTwoPi * s_) * std::exp(-p / s_); }
  double s_, mass_;
};

class AnnulusModel final : public Model {
 public:
  AnnulusModel(double a, double b, double mass)
      : a_(a), b_(b), mass_(mass), pa_(weight_p(a)), pb_(weight_p(b)) {
    level_ = mass_ / (kTwoPi * (pb_ - pa_));
  }
  DensityKind kind() const override { return DensityKind::annulus; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(6);
    os << "annulus(a=" << a_ << ",b=" << b_ << ",M=" << mass_ << ")";
    return os.str();
  }
  double mass() const override { return mass_; }
  double value(const Point& x) const override { return radial_value(x.rho()); }
  Point sample(Rng& rng) const override {
    // dV = 2 pi dp, so p is uniform on [p(a), p(b)].
    const double p = pa_ + (pb_ - pa_) * rng.uniform();
    return point_from_p(p, kTwoPi * rng.uniform());
  }
  bool radial() const override { return true; }
  bool smooth() const override { return false; }
  double radial_value(double rho) const override {
    return (rho >= a_ && rho <= b_) ? level_ : 0.0;
  }
  double radial_derivative(double) const override {
    throw ParameterError("annulus density is not differentiable");
  }
  std::vector<double> breakpoints() const override { return {a_, b_}; }
  double support_radius() const override { return b_; }
  double integrate(const std::function<double(const Point&)>& h,
                   const QuadratureOrder& q) const override {
    return polar_integral(
        [&](double rho, double theta) { return h(Point::polar(rho, theta)) * level_; }, a_, b_,
        {}, q);
  }
  std::shared_ptr<const Model> scaled(double factor) const override {
    return std::make_shared<AnnulusModel>(a_, b_, mass_ * factor);
  }

 private:
  double a_, b_, mass_, pa_, pb_, level_;
};

class TranslatedModel final : public Model {
 public:
  TranslatedModel(std::shared_ptr<const Model> base, const Point& c)
      : base_(std::move(base)), c_(c) {}
  DensityKind kind() const override { return DensityKind::mobius_translated; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(6);
    os << "translated(" << base_->describe() << ",c=(" << c_.x1() << "," << c_.x2() << "))";
    return os.str();
  }
  double mass() const override { return base_->mass(); }
  double value(const Point& x) const override { return base_->value(mobius_translate(c_, x)); }
  Point sample(Rng& rng) const override { return mobius_translate(c_, base_->sample(rng)); }
  bool radial() const override { return c_.norm2() == 0.0 && base_->radial(); }
  bool smooth() const override { return base_->smooth(); }
  double radial_value(double rho) const override {
    if (!radial()) throw ParameterError("translated density is not radial");
    return base_->radial_value(rho);
  }
  double radial_derivative(double rho) const override {
    if (!radial()) throw ParameterError("translated density is not radial");
    return base_->radial_derivative(rho);
  }
  std::vector<double> breakpoints() const override {
    return radial() ? base_->breakpoints() : std::vector<double>{};
  }
  double support_radius() const override { return c_.rho() + base_->support_radius(); }
  double integrate(const std::function<double(const Point&)>& h,
                   const QuadratureOrder& q) const override {
    // y = T_c(z) is an isometry and T_c is an involution.
    return base_->integrate([&](const Point& z) { return h(mobius_translate(c_, z)); }, q);
  }
  std::shared_ptr<const Model> scaled(double factor) const override {
    return std::make_shared<TranslatedModel>(base_->scaled(factor), c_);
  }

 private:
  std::shared_ptr<const Model> base_;
  Point c_;
};

class MixtureModel final : public Model {
 public:
  MixtureModel(std::vector<std::shared_ptr<const Model>> comps, std::vector<double> weights)
      : comps_(std::move(comps)), w_(std::move(weights)) {
    double acc = 0.0;
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      acc += w_[k] * comps_[k]->mass();
      cumulative_.push_back(acc);
    }
    mass_ = acc;
  }
  DensityKind kind() const override { return DensityKind::mixture; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(6);
    os << "mixture(";
    for (std::size_t k = 0; k < comps_.size(); ++k) {
      if (k) os << "+";
      os << w_[k] << "*" << comps_[k]->describe();
    }
    os << ")";
    return os.str();
  }
  double mass() const override { return mass_; }
  double value(const Point& x) const override {
    double v = 0.0;
    for (std::size_t k = 0; k < comps_.size(); ++k) v += w_[k] * comps_[k]->value(x);
    return v;
  }
  Point sample(Rng& rng) const override {
    const double u = rng.uniform() * mass_;
    std::size_t k = 0;
    while (k + 1 < comps_.size() && u >= cumulative_[k]) ++k;
    return comps_[k]->sample(rng);
  }
  bool radial() const override {
    return std::all_of(comps_.begin(), comps_.end(), [](const auto& c) { return c->radial(); });
  }
  bool smooth() const override {
    return std::all_of(comps_.begin(), comps_.end(), [](const auto& c) { return c->smooth(); });
  }
  double radial_value(double rho) const override {
    if (!radial()) throw ParameterError("mixture is not radial");
    double v = 0.0;
    for (std::size_t k = 0; k < comps_.size(); ++k) v += w_[k] * comps_[k]->radial_value(rho);
    return v;
  }
  double radial_derivative(double rho) const override {
    if (!radial()) throw ParameterError("mixture is not radial");
    double v = 0.0;
    for (std::size_t k = 0; k < comps_.size(); ++k)
      v += w_[k] * comps_[k]->radial_derivative(rho);
    return v;
  }
  std::vector<double> breakpoints() const override {
    std::vector<double> out;
    for (const auto& c : comps_) {
      const auto b = c->breakpoints();
      out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  double support_radius() const override {
    double r = 0.0;
    for (const auto& c : comps_) r = std::max(r, c->support_radius());
    return r;
  }
  double integrate(const std::function<double(const Point&)>& h,
                   const QuadratureOrder& q) const override {
    double acc = 0.0;
    for (std::size_t k = 0; k < comps_.size(); ++k) acc += w_[k] * comps_[k]->integrate(h, q);
    return acc;
  }
  std::shared_ptr<const Model> scaled(double factor) const override {
    auto w = w_;
    for (auto& x : w) x *= factor;
    return std::make_shared<MixtureModel>(comps_, std::move(w));
  }

 private:
  std::vector<std::shared_ptr<const Model>> comps_;
  std::vector<double> w_;
  std::vector<double> cumulative_;
  double mass_ = 0.0;
};

void check_mass(const TestDensity& d) {
  const double q = d.integrate_radial([](double) { return 1.0; }, 512, 8);
  if (std::abs(q - d.mass()) > kMassCheckTol * d.mass()) {
    throw ParameterError("density quadrature mass mismatch for " + d.describe());
  }
}

}  // namespace

TestDensity TestDensity::hyperbolic_gaussian(double s, double mass) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("gaussian width s must be > 0");
  if (!(mass > 0.0)) throw ParameterError("density mass must be > 0");
  TestDensity d(std::make_shared<GaussianModel>(s, mass));
  check_mass(d);
  return d;
}

TestDensity TestDensity::annulus(double a, double b, double mass) {
  if (!(a >= 0.0) || !(b > a)) throw ParameterError("annulus needs 0 <= a < b");
  if (!(mass > 0.0)) throw ParameterError("density mass must be > 0");
  TestDensity d(std::make_shared<AnnulusModel>(a, b, mass));
  check_mass(d);
  return d;
}

TestDensity TestDensity::mobius_translated(const TestDensity& base, const Point& center) {
  return TestDensity(std::make_shared<TranslatedModel>(base.m_, center));
}

TestDensity TestDensity::mixture(std::vector<TestDensity> components,
                                 std::vector<double> weights) {
  if (components.empty() || components.size() != weights.size())
    throw ParameterError("mixture needs matching, non-empty components and weights");
  std::vector<std::shared_ptr<const Model>> comps;
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (!(weights[k] > 0.0)) throw ParameterError("mixture weights must be > 0");
    comps.push_back(components[k].m_);
  }
  return TestDensity(std::make_shared<MixtureModel>(std::move(comps), std::move(weights)));
}

DensityKind TestDensity::kind() const { return m_->kind(); }
std::string TestDensity::describe() const { return m_->describe(); }
double TestDensity::mass() const { return m_->mass(); }
double TestDensity::operator()(const Point& x) const { return m_->value(x); }
Point TestDensity::sample(Rng& rng) const { return m_->sample(rng); }
bool TestDensity::is_radial() const { return m_->radial(); }
bool TestDensity::is_smooth() const { return m_->smooth(); }
double TestDensity::radial_value(double rho) const { return m_->radial_value(rho); }
double TestDensity::radial_derivative(double rho) const { return m_->radial_derivative(rho); }
std::vector<double> TestDensity::radial_breakpoints() const { return m_->breakpoints(); }
double TestDensity::support_radius() const { return m_->support_radius(); }

double TestDensity::integrate(const std::function<double(const Point&)>& h,
                              const QuadratureOrder& order) const {
  return m_->integrate(h, order);
}

double TestDensity::integrate_radial(const std::function<double(double)>& g, int panels,
                                     int order) const {
  if (!is_radial()) throw ParameterError("integrate_radial: density is not radial");
  return radial_measure_integral([&](double rho) { return g(rho) * radial_value(rho); }, 0.0,
                                 support_radius(), panels, order, radial_breakpoints());
}

TestDensity TestDensity::scaled(double factor) const {
  if (!(factor > 0.0)) throw ParameterError("scale factor must be > 0");
  return TestDensity(m_->scaled(factor));
}

}  // namespace kslab

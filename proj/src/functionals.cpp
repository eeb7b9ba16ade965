#include "kslab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kslab/errors.hpp"
#include "kslab/kernels.hpp"
#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTiny = 1e-300;

double log_tanh_half(double r) {
  return r < 1.0 ? std::log(std::tanh(0.5 * r)) : std::log1p(-2.0 / (std::exp(r) + 1.0));
}

// int_r^b m(rho) / (2 pi sinh rho) d rho inside cell [a, b] with constant
// density n and inner cumulative mass m_a.
double cell_tail(double m_a, double n, double a, double b, double r) {
  if (a == 0.0) {
    return 2.0 * n * (std::log(std::cosh(0.5 * b)) - std::log(std::cosh(0.5 * r)));
  }
  const double dl = log_tanh_half(b) - log_tanh_half(r);
  const double ds = std::log(std::sinh(b) / std::sinh(r));
  return (m_a / kTwoPi - n * std::cosh(a)) * dl + n * ds;
}

}  // namespace

double mass(const RadialState& s) { return s.n.dot(s.grid->volumes); }

double p_moment(const RadialState& s) {
  return (s.n.array() * s.grid->volumes.array() * s.grid->p_mean.array()).sum();
}

double rho_moment(const RadialState& s) {
  return (s.n.array() * s.grid->volumes.array() * s.grid->centers.array()).sum();
}

double entropy(const RadialState& s) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.n.size(); ++i) {
    const double v = s.n(i);
    if (v >= kTiny) acc += v * std::log(v) * s.grid->volumes(i);
  }
  return acc;
}

double fisher_information(const RadialState& s) {
  const RadialGrid& g = *s.grid;
  double acc = 0.0;
  for (Eigen::Index e = 1; e < g.size(); ++e) {
    const double lo = s.n(e - 1), hi = s.n(e);
    if (lo < kTiny || hi < kTiny) continue;
    const double dl = (std::log(hi) - std::log(lo)) / g.d_rho;
    acc += kTwoPi * g.sinh_edges(e) * g.d_rho * 0.5 * (lo + hi) * dl * dl;
  }
  return acc;
}

double lq_norm(const RadialState& s, double q) {
  if (!(q >= 1.0)) throw ParameterError("lq_norm: q must be >= 1");
  if (q == 1.0) return (s.n.array().abs() * s.grid->volumes.array()).sum();
  const double scale = linf_norm(s);
  if (scale == 0.0) return 0.0;
  const double sum =
      ((s.n.array().abs() / scale).pow(q) * s.grid->volumes.array()).sum();
  return scale * std::pow(sum, 1.0 / q);
}

double linf_norm(const RadialState& s) { return s.n.cwiseAbs().maxCoeff(); }

double truncated_excess_mass(const RadialState& s, double K) {
  return ((s.n.array() - K).max(0.0) * s.grid->volumes.array()).sum();
}

Eigen::VectorXd cumulative_mass(const RadialState& s) {
  const Eigen::Index n = s.n.size();
  Eigen::VectorXd m(n + 1);
  m(0) = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) m(i + 1) = m(i) + s.n(i) * s.grid->volumes(i);
  return m;
}

Eigen::VectorXd potential_at_edges(const RadialState& s) {
  const RadialGrid& g = *s.grid;
  const Eigen::VectorXd m = cumulative_mass(s);
  const Eigen::Index n = g.size();
  Eigen::VectorXd c(n + 1);
  c(n) = m(n) * green_value(g.rho_max);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double a = g.edges(i), b = g.edges(i + 1);
    c(i) = c(i + 1) + cell_tail(m(i), s.n(i), a, b, a);
  }
  return c;
}

Eigen::VectorXd cell_potential(const RadialState& s) {
  const RadialGrid& g = *s.grid;
  const Eigen::VectorXd m = cumulative_mass(s);
  const Eigen::VectorXd c = potential_at_edges(s);
  const GaussRule gl = gauss_legendre(4);
  Eigen::VectorXd out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double a = g.edges(i), b = g.edges(i + 1);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double r = mid + half * gl.nodes(j);
      acc += half * gl.weights(j) * kTwoPi * std::sinh(r) * cell_tail(m(i), s.n(i), a, b, r);
    }
    out(i) = c(i + 1) + acc / g.volumes(i);
  }
  return out;
}

double interaction_energy(const RadialState& s) {
  const Eigen::VectorXd cbar = cell_potential(s);
  return (s.n.array() * cbar.array() * s.grid->volumes.array()).sum();
}

double interaction_energy_form(const RadialState& s) {
  const RadialGrid& g = *s.grid;
  const Eigen::VectorXd m = cumulative_mass(s);
  const GaussRule gl = gauss_legendre(4);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double a = g.edges(i), b = g.edges(i + 1);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int j = 0; j < 4; ++j) {
      const double r = mid + half * gl.nodes(j);
      const double mr = m(i) + s.n(i) * annulus_volume(a, r);
      acc += half * gl.weights(j) * mr * mr / (kTwoPi * std::sinh(r));
    }
  }
  const double M = m(g.size());
  return acc + M * M * green_value(g.rho_max);
}

double free_energy(const RadialState& s) {
  return entropy(s) - 0.5 * s.chi * interaction_energy(s);
}

FunctionalRecord functional_record(const RadialState& s, const std::vector<double>& q_list,
                                   const std::vector<double>& k_list) {
  FunctionalRecord r;
  r.t = s.t;
  r.mass = mass(s);
  r.p_moment = p_moment(s);
  r.rho_moment = rho_moment(s);
  r.entropy = entropy(s);
  r.fisher = fisher_information(s);
  r.interaction = interaction_energy(s);
  r.free_energy = r.entropy - 0.5 * s.chi * r.interaction;
  for (double q : q_list) r.lq_norms[q] = lq_norm(s, q);
  r.linf = linf_norm(s);
  r.min_density = s.n.minCoeff();
  for (double K : k_list) r.m_t_K[K] = truncated_excess_mass(s, K);
  return r;
}

double xtq_seminorm(const std::vector<FunctionalRecord>& series, double q, double T) {
  if (series.empty()) throw ParameterError("xtq_seminorm: empty series");
  double best = 0.0;
  for (const auto& r : series) {
    if (r.t > T) continue;
    const auto it = r.lq_norms.find(q);
    if (it == r.lq_norms.end()) throw ParameterError("xtq_seminorm: q-norm not recorded");
    best = std::max(best, std::pow(r.t, 1.0 - 1.0 / q) * it->second);
  }
  return best;
}

}  // namespace kslab

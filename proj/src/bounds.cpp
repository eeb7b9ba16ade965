#include "kslab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kslab/errors.hpp"

namespace kslab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

double crit_ratio(const TheoryInputs& in) { return in.chi * in.M / (8.0 * kPi); }
}  // namespace

double lambda_star(double chi, double M) { return M * (std::sqrt(chi * M / (8.0 * kPi)) - 1.0); }

bool is_supercritical(const TheoryInputs& in) { return in.chi * in.M > 8.0 * kPi; }

bool blowup_condition(const TheoryInputs& in) {
  return is_supercritical(in) && in.I0 < lambda_star(in.chi, in.M);
}

std::optional<double> blowup_time_bound(const TheoryInputs& in) {
  if (!blowup_condition(in)) return std::nullopt;
  const double M = in.M;
  const double num = M * M / (8.0 * kPi) * (in.chi * M - 8.0 * kPi);
  const double den = in.chi * M * M * M / (8.0 * kPi) - (M + in.I0) * (M + in.I0);
  return 0.25 * std::log(num / den);
}

double virial_envelope(const TheoryInputs& in, double t) {
  const double a = in.chi * in.M * in.M * in.M / (8.0 * kPi);
  const double b = (in.I0 + in.M) * (in.I0 + in.M);
  return (b - a) * std::exp(4.0 * t) + a;
}

double c_plus(const TheoryInputs& in) {
  const double excess = std::max(in.I0 - lambda_star(in.chi, in.M), 0.0);
  return std::sqrt(excess) * std::sqrt(in.I0 + in.M + in.M * std::sqrt(crit_ratio(in)));
}

double p_moment_bound(const TheoryInputs& in, double t) {
  return c_plus(in) * std::exp(2.0 * t) + lambda_star(in.chi, in.M);
}

double k_plus(const TheoryInputs& in) {
  const double M = in.M;
  const double ls = std::max(lambda_star(in.chi, M), 0.0);
  const double first = 2.0 * std::sqrt(c_plus(in) / (2.0 * M));
  const double second = 2.0 * std::sqrt(ls / (2.0 * M)) + 1.0;
  return 2.0 * M * std::log(std::max(first, second));
}

double rho_moment_bound(const TheoryInputs& in, double t) { return k_plus(in) + 2.0 * in.M * t; }

double rho_jensen_bound(double M, double I) {
  return 2.0 * M * std::asinh(std::sqrt(std::max(I, 0.0) / (2.0 * M)));
}

double rho_log_bound(double M, double I) {
  return 2.0 * M * std::log(2.0 * std::sqrt(std::max(I, 0.0) / (2.0 * M)) + 1.0);
}

double k2(double M) { return M * std::log(4.0 * kE * kPi * M); }

double entropy_lower_bound(const TheoryInputs& in, double t) {
  const double M = in.M;
  return -in.I0 - M + M * std::exp(-2.0 * t) + M * std::log(M / (2.0 * kPi)) - 2.0 * M * t;
}

double entropy_constant(const TheoryInputs& in, double T) {
  return in.F0 + crit_ratio(in) * (k2(in.M) + 2.0 * k_plus(in) + 4.0 * in.M * T);
}

double entropy_upper_bound(const TheoryInputs& in, double T) {
  if (!(crit_ratio(in) < 1.0)) throw RegimeError("entropy_upper_bound requires chi M < 8 pi");
  return entropy_constant(in, T) / (1.0 - crit_ratio(in));
}

EntropyDecay entropy_decay_bounds(const TheoryInputs& in, double t) {
  EntropyDecay out;
  const double M = in.M;
  const double chiM = in.chi * M;
  const double drift = -in.chi * M * M * t / (4.0 * kPi);
  if (chiM <= 4.0 * kPi) out.linear = drift + in.Ent0;
  if (chiM < 4.0 * kPi) {
    const double growth = chiM > 0.0 ? -std::expm1(-chiM * t / (4.0 * kPi)) * (4.0 * kPi / chiM - 1.0)
                                     : t;  // chi -> 0 limit of (4pi/chiM - 1)(1 - e^{-chiM t/4pi})
    const double arg = std::exp(-in.Ent0 / M) + 4.0 * kPi * kE / M * growth;
    out.strong = drift - M * std::log(arg);
  }
  return out;
}

double h_of_q(double q) { return 4.0 * q / ((q + 1.0) * (q + 1.0)); }

double lq_monotonicity_threshold(double q) {
  if (!(q >= 1.0)) throw ParameterError("lq_monotonicity_threshold: q must be >= 1");
  return 4.0 * kPi * h_of_q(q);
}

double log_abs_bound(const TheoryInputs& in, double T, double s) {
  if (!(s > 0.0)) throw ParameterError("log_abs_bound: s must be > 0");
  return entropy_upper_bound(in, T) + 2.0 / kE + 2.0 * in.M * std::log(2.0 * kPi * s) +
         p_moment_bound(in, T) / s;
}

BoundsReport make_report(const TheoryInputs& in) {
  BoundsReport r;
  r.inputs = in;
  r.lambda_star = lambda_star(in.chi, in.M);
  r.supercritical = is_supercritical(in);
  r.blowup_condition = blowup_condition(in);
  r.t_bl = blowup_time_bound(in);
  r.c_plus = c_plus(in);
  r.k_plus = k_plus(in);
  r.k2 = k2(in.M);
  r.entropy_prefactor = crit_ratio(in) < 1.0 ? 1.0 / (1.0 - crit_ratio(in)) : 0.0;
  return r;
}

}  // namespace kslab

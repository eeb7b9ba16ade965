#pragma once

#include <optional>

namespace kslab {

struct TheoryInputs {
  double chi = 1.0;
  double M = 1.0;
  double I0 = 0.0;
  double Ent0 = 0.0;
  double F0 = 0.0;
};

/// lambda*(M) = M (sqrt(chi M / 8 pi) - 1).
double lambda_star(double chi, double M);

bool is_supercritical(const TheoryInputs& in);
bool blowup_condition(const TheoryInputs& in);

/// T_bl = 1/4 log[(M^2/8pi)(chi M - 8pi) / (chi M^3/8pi - (M + I0)^2)],
/// present only when chi M > 8 pi and I0 < lambda*.
std::optional<double> blowup_time_bound(const TheoryInputs& in);

/// ([I0 + M]^2 - chi M^3/8pi) e^{4t} + chi M^3/8pi.
double virial_envelope(const TheoryInputs& in, double t);

/// sqrt((I0 - lambda*)_+) sqrt(I0 + M + M sqrt(chi M / 8 pi)).
double c_plus(const TheoryInputs& in);

/// C_+ e^{2t} + lambda*.
double p_moment_bound(const TheoryInputs& in, double t);

/// 2M log(max(2 sqrt(C_+/2M), 2 sqrt(lambda*_+/2M) + 1)).
double k_plus(const TheoryInputs& in);

/// K_+ + 2 M t.
double rho_moment_bound(const TheoryInputs& in, double t);

/// 2M asinh(sqrt(I / 2M)), the Jensen bound on the rho-moment.
double rho_jensen_bound(double M, double I);

/// 2M log(2 sqrt(I / 2M) + 1), the next link of the chain.
double rho_log_bound(double M, double I);

/// K_2(M) = M log(4 e pi M).
double k2(double M);

/// -I0 - M + M e^{-2t} + M log(M / 2pi) - 2 M t.
double entropy_lower_bound(const TheoryInputs& in, double t);

/// C(n0, T) = F0 + (chi M / 8pi)(K_2 + 2 K_+ + 4 M T).
double entropy_constant(const TheoryInputs& in, double T);

/// (1 - chi M / 8pi)^{-1} C(n0, T). Throws RegimeError unless chi M < 8 pi.
double entropy_upper_bound(const TheoryInputs& in, double T);

struct EntropyDecay {
  std::optional<double> linear;  // chi M <= 4 pi
  std::optional<double> strong;  // chi M < 4 pi
};
EntropyDecay entropy_decay_bounds(const TheoryInputs& in, double t);

/// h(q) = 4q / (q + 1)^2.
double h_of_q(double q);

/// 4 pi h(q). Throws ParameterError for q < 1.
double lq_monotonicity_threshold(double q);

/// Bound on int n |log n| over [0, T] from the entropy and p-moment bounds:
/// (1 - chi M/8pi)^{-1} C(n0,T) + 2/e + 2M log(2 pi s) + (C_+ e^{2T} + lambda*) / s.
double log_abs_bound(const TheoryInputs& in, double T, double s = 1.0);

struct BoundsReport {
  TheoryInputs inputs;
  double lambda_star = 0.0;
  bool supercritical = false;
  bool blowup_condition = false;
  std::optional<double> t_bl;
  double c_plus = 0.0;
  double k_plus = 0.0;
  double k2 = 0.0;
  double entropy_prefactor = 0.0;  // (1 - chi M/8pi)^{-1} when subcritical, else 0
  double h_of_q(double q) const { return kslab::h_of_q(q); }
};

BoundsReport make_report(const TheoryInputs& in);

}  // namespace kslab

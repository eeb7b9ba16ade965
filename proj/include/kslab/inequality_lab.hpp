#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kslab/test_density.hpp"

namespace kslab {

/// value is oriented so that the inequality holds iff value >= 0.
struct DeficitReport {
  double value = 0.0;
  double mc_error = 0.0;
  long nodes_or_samples = 0;
  long resampled = 0;
};

/// Monte Carlo settings. Samples are split into `chunks`, each with its own
/// stream seeded by (seed, op, key, chunk); chunk sums are combined in chunk
/// order, so the result does not depend on `jobs`.
struct McBudget {
  long samples = 100'000;
  int chunks = 16;
  std::uint64_t seed = 1;
  std::uint64_t key = 0;
  int jobs = 1;
};

/// Pairs closer than this (in rho) are redrawn.
inline constexpr double kPairFloor = 1e-10;

/// int f log f - (4 pi / M) iint f f G  +  K_2(M) + 2 int rho f.
DeficitReport log_hls_deficit(const TestDensity& f, const McBudget& budget = {});

/// int f log f + (2 / M) iint f f log[2 sinh(rho/2)] + M log(e pi M).
DeficitReport sinh_log_hls_deficit(const TestDensity& f, const McBudget& budget = {});

/// (2/M) iint f f log cosh(rho/2) - 2 int rho f, the gap between the sinh
/// and Green forms of the two deficits above.
DeficitReport log_hls_form_gap(const TestDensity& f, const McBudget& budget = {});

/// C_{n,lambda} = pi^{lambda/2} Gamma(n/2 - lambda/2) / Gamma(n - lambda/2)
///                * (Gamma(n/2) / Gamma(n))^{-1 + lambda/n}.
double hls_constant(int n, double lambda);

/// iint f(x) g(y) [2 sinh(rho(x,y)/2)]^{-lambda} dV dV, by importance
/// sampling: x ~ f, then y = T_x(z) with z drawn from a radial proposal
/// matched to the kernel singularity.
DeficitReport hls_double_integral(const TestDensity& f, const TestDensity& g, double lambda,
                                  const McBudget& budget = {});

/// C_{2,lambda} ||f||_p ||g||_p - iint f g / [2 sinh(rho/2)]^lambda, p = 4/(4 - lambda).
DeficitReport hls_ratio(const TestDensity& f, const TestDensity& g, double lambda,
                        const McBudget& budget = {});

/// ||f||_p^p by deterministic quadrature.
double lp_norm_pow(const TestDensity& f, double p);

/// Radial profile u(rho) with derivative, supported in [0, rho_max].
struct RadialProfile {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  double rho_max = 0.0;
  std::vector<double> breakpoints;
};

/// Profile of a smooth radial density; throws ParameterError otherwise.
RadialProfile profile_of(const TestDensity& f);
/// Profile of sqrt(f) for a smooth radial density.
RadialProfile sqrt_profile_of(const TestDensity& f);

/// (int |grad u|)^2 - (int |u|)^2 - 4 pi int u^2.
DeficitReport mugelli_talenti_deficit(const RadialProfile& u);
DeficitReport mugelli_talenti_deficit(const TestDensity& u);

/// 1/2 log((1 / pi e) int |grad u|^2) - int u^2 log|u| after scaling u to
/// unit L^2 norm. Throws ParameterError for the zero function.
DeficitReport beckner_deficit(const RadialProfile& u);
/// Applied to u = sqrt(f).
DeficitReport beckner_deficit(const TestDensity& f);

/// M log(fisher / (4 pi e)) - entropy: the entropy form of the log-Sobolev
/// inequality for a density of mass M.
double beckner_entropy_gap(double M, double entropy, double fisher);

/// int f log f + (1/s) int p f - M log(M / (2 pi s)).
DeficitReport relative_entropy_check(const TestDensity& f, double s);

/// int f log f and int h f by deterministic quadrature (radial rule when f
/// is radial).
double density_entropy(const TestDensity& f);
double density_moment(const TestDensity& f, const std::function<double(double)>& h_of_rho);

/// Pass rule of the battery: value >= -3 mc_error - tol.
bool deficit_passes(const DeficitReport& r, double tol);

enum class LabOp { log_hls, sinh_log_hls, hls_ratio, mugelli_talenti, beckner, relative_entropy };
std::string to_string(LabOp op);
LabOp lab_op_from_string(const std::string& name);

/// Seeded family of test densities for an op. Radial smooth families only
/// for mugelli_talenti and beckner.
std::vector<TestDensity> default_battery(LabOp op, int count, std::uint64_t seed);

struct BatteryRow {
  LabOp op = LabOp::log_hls;
  int index = 0;
  std::string density;
  double parameter = 0.0;  // lambda for hls_ratio, s for relative_entropy
  DeficitReport report;
  bool pass = false;
};

struct BatterySpec {
  std::vector<LabOp> ops{LabOp::log_hls,         LabOp::sinh_log_hls, LabOp::hls_ratio,
                         LabOp::mugelli_talenti, LabOp::beckner,      LabOp::relative_entropy};
  int densities = 50;
  std::uint64_t seed = 1;
  long samples = 100'000;
  int chunks = 16;
  std::vector<double> lambdas{0.5, 1.0, 1.5};
  std::vector<double> entropy_s{0.1, 1.0, 10.0};
  double tol = 1e-6;
};

/// Every (op, density, parameter) row, in op / density / parameter order.
std::vector<BatteryRow> run_battery(const BatterySpec& spec, int jobs = 1);

}  // namespace kslab

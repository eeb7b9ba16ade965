#include "kslab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kslab {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string AnnotatedRow::flags() const {
  if (violations.empty()) return "ok";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += ';';
    out += v;
  }
  return out;
}

TheoryInputs theory_inputs(const FunctionalRecord& first, double chi) {
  TheoryInputs in;
  in.chi = chi;
  in.M = first.mass;
  in.I0 = first.p_moment;
  in.Ent0 = first.entropy;
  in.F0 = first.free_energy;
  return in;
}

std::vector<AnnotatedRow> annotate(const TimeSeries& series, double chi,
                                   const CheckTolerances& tol) {
  std::vector<AnnotatedRow> rows;
  if (series.records.empty()) return rows;
  const TheoryInputs in = theory_inputs(series.records.front(), chi);
  const double M = in.M;
  const bool subcritical = chi * M < 8.0 * kPi;
  rows.reserve(series.records.size());
  for (std::size_t k = 0; k < series.records.size(); ++k) {
    const FunctionalRecord& r = series.records[k];
    AnnotatedRow a;
    a.rec = r;
    a.dt = k < series.dt.size() ? series.dt[k] : 0.0;
    const double t = r.t;
    a.envelope_rhs = virial_envelope(in, t);
    a.p_bound = p_moment_bound(in, t);
    a.ent_lower = entropy_lower_bound(in, t);
    if (subcritical) a.ent_upper = entropy_upper_bound(in, t);
    const EntropyDecay dec = entropy_decay_bounds(in, t);
    if (dec.linear) a.ent_decay = dec.strong ? std::min(*dec.linear, *dec.strong) : *dec.linear;
    a.rho_jensen = rho_jensen_bound(M, r.p_moment);
    a.rho_bound = rho_moment_bound(in, t);

    auto& v = a.violations;
    const double lhs = (r.p_moment + M) * (r.p_moment + M);
    if (!(lhs <= a.envelope_rhs + tol.envelope * std::abs(a.envelope_rhs))) v.push_back("envelope");
    if (!(r.p_moment <= a.p_bound + tol.p_bound * std::max(std::abs(a.p_bound), M)))
      v.push_back("p_bound");
    if (!(r.entropy >= a.ent_lower - tol.entropy * std::max(std::abs(a.ent_lower), 1.0)))
      v.push_back("ent_lower");
    if (a.ent_upper && !(r.entropy <= *a.ent_upper + tol.entropy * std::max(std::abs(*a.ent_upper), 1.0)))
      v.push_back("ent_upper");
    if (!(r.rho_moment <= a.rho_jensen * (1.0 + tol.rho) + tol.rho)) v.push_back("rho_jensen");
    if (!(a.rho_jensen <= a.rho_bound * (1.0 + tol.rho) + tol.rho)) v.push_back("rho_bound");
    if (a.ent_decay && !(r.entropy <= *a.ent_decay + tol.ent_decay * std::abs(in.Ent0)))
      v.push_back("ent_decay");
    if (subcritical && k > 0) {
      const double prev = series.records[k - 1].free_energy;
      if (!(r.free_energy <= prev + tol.free_energy * std::abs(prev))) v.push_back("free_energy");
    }
    if (!(std::abs(r.mass - M) <= tol.mass * M)) v.push_back("mass");
    if (!(r.min_density >= 0.0)) v.push_back("positivity");
    rows.push_back(std::move(a));
  }
  return rows;
}

std::vector<std::pair<std::string, int>> violation_counts(const std::vector<AnnotatedRow>& rows) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& name : kCheckNames) {
    int c = 0;
    for (const auto& r : rows)
      c += static_cast<int>(std::count(r.violations.begin(), r.violations.end(), name));
    out.emplace_back(name, c);
  }
  return out;
}

bool is_hard_check(const std::string& name) { return name == "mass" || name == "positivity"; }

}  // namespace kslab

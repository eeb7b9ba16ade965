#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kslab/bounds.hpp"
#include "kslab/radial_solver.hpp"

namespace kslab {

/// Relative slack granted to each per-row check.
struct CheckTolerances {
  double envelope = 1e-3;
  double p_bound = 1e-3;
  double entropy = 1e-3;
  double rho = 1e-9;
  double ent_decay = 1e-3;   // times |Ent0|
  double free_energy = 1e-6;
  double mass = 1e-12;
};

/// One series row with the bounds evaluated at its time and the names of
/// the checks it violates (empty means "ok").
struct AnnotatedRow {
  FunctionalRecord rec;
  double dt = 0.0;
  double envelope_rhs = 0.0;
  double p_bound = 0.0;
  double ent_lower = 0.0;
  std::optional<double> ent_upper;
  std::optional<double> ent_decay;
  double rho_jensen = 0.0;
  double rho_bound = 0.0;
  std::vector<std::string> violations;

  std::string flags() const;
};

/// Theory inputs taken from the first record of a series.
TheoryInputs theory_inputs(const FunctionalRecord& first, double chi);

std::vector<AnnotatedRow> annotate(const TimeSeries& series, double chi,
                                   const CheckTolerances& tol = {});

/// Number of rows violating each named check, in a fixed name order.
std::vector<std::pair<std::string, int>> violation_counts(const std::vector<AnnotatedRow>& rows);

inline const std::vector<std::string> kCheckNames{
    "envelope", "p_bound",     "ent_lower", "ent_upper", "rho_jensen",
    "rho_bound", "ent_decay", "free_energy", "mass",     "positivity"};

/// Checks whose failure means the run itself is broken, not a bound.
bool is_hard_check(const std::string& name);

}  // namespace kslab

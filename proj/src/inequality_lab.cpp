#include "kslab/inequality_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kslab/errors.hpp"
#include "kslab/kernels.hpp"
#include "kslab/parallel.hpp"
#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kE = std::numbers::e;
constexpr int kRadialPanels = 512;
constexpr int kRadialOrder = 8;
// Points further than this from the origin are not representable under the
// boundary margin; the test densities are negligible there.
constexpr double kRhoCap = 20.0;

enum StreamId : std::uint64_t {
  kStreamLogHls = 1,
  kStreamSinh = 2,
  kStreamGap = 3,
  kStreamHls = 4,
  kStreamPilot = 5,
};

struct Welford {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  long resampled = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Welford& o) {
    if (o.n == 0) return;
    const long total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * o.n / total;
    n = total;
    resampled += o.resampled;
  }
  double stderr_mean() const { return n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0; }
};

// Runs draw(rng, acc) for every sample, chunked and seeded per chunk.
template <typename Draw>
Welford run_chunks(const McBudget& b, std::uint64_t stream, Draw&& draw) {
  if (b.samples < 2 || b.chunks < 1) throw ParameterError("Monte Carlo budget too small");
  const int chunks = static_cast<int>(std::min<long>(b.chunks, b.samples));
  std::vector<Welford> parts(chunks);
  parallel_for(static_cast<std::size_t>(chunks), b.jobs, [&](std::size_t c) {
    const long count = b.samples / chunks + (static_cast<long>(c) < b.samples % chunks ? 1 : 0);
    Rng rng(stream_seed(b.seed, {stream, b.key, static_cast<std::uint64_t>(c)}));
    Welford& acc = parts[c];
    for (long k = 0; k < count; ++k) draw(rng, acc);
  });
  Welford total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

// Mean of kernel(rho(X, Y)) over independent pairs drawn from f.
template <typename Kernel>
Welford pair_mean(const TestDensity& f, const McBudget& b, std::uint64_t stream,
                  Kernel&& kernel) {
  return run_chunks(b, stream, [&](Rng& rng, Welford& acc) {
    while (true) {
      const Point x = f.sample(rng);
      const Point y = f.sample(rng);
      const double rho = hyperbolic_distance(x, y);
      if (rho < kPairFloor) {
        ++acc.resampled;
        continue;
      }
      acc.add(kernel(rho));
      return;
    }
  });
}

double log_two_sinh_half(double rho) { return std::log(2.0 * std::sinh(0.5 * rho)); }

double log_cosh_half(double rho) {
  const double h = 0.5 * rho;
  return h + std::log1p(std::exp(-2.0 * h)) - std::log(2.0);
}

DeficitReport from_mc(double value, double scale, const Welford& w) {
  DeficitReport r;
  r.value = value;
  r.mc_error = std::abs(scale) * w.stderr_mean();
  r.nodes_or_samples = w.n;
  r.resampled = w.resampled;
  return r;
}

double radial_integral(const RadialProfile& u, const std::function<double(double)>& g) {
  return radial_measure_integral(g, 0.0, u.rho_max, kRadialPanels, kRadialOrder, u.breakpoints);
}

}  // namespace

double density_entropy(const TestDensity& f) {
  auto flogf = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
  if (f.is_radial()) {
    return radial_measure_integral([&](double rho) { return flogf(f.radial_value(rho)); }, 0.0,
                                   f.support_radius(), kRadialPanels, kRadialOrder,
                                   f.radial_breakpoints());
  }
  return f.integrate([&](const Point& x) {
    const double v = f(x);
    return v > 0.0 ? std::log(v) : 0.0;
  });
}

double density_moment(const TestDensity& f, const std::function<double(double)>& h) {
  if (f.is_radial()) {
    return radial_measure_integral([&](double rho) { return h(rho) * f.radial_value(rho); }, 0.0,
                                   f.support_radius(), kRadialPanels, kRadialOrder,
                                   f.radial_breakpoints());
  }
  return f.integrate([&](const Point& x) { return h(x.rho()); });
}

double lp_norm_pow(const TestDensity& f, double p) {
  if (f.is_radial()) {
    return radial_measure_integral([&](double rho) { return std::pow(f.radial_value(rho), p); },
                                   0.0, f.support_radius(), kRadialPanels, kRadialOrder,
                                   f.radial_breakpoints());
  }
  return f.integrate([&](const Point& x) { return std::pow(f(x), p - 1.0); });
}

DeficitReport log_hls_deficit(const TestDensity& f, const McBudget& b) {
  const double M = f.mass();
  const Welford w = pair_mean(f, b, kStreamLogHls, [](double rho) { return green_value(rho); });
  const double ent = density_entropy(f);
  const double rho_mom = density_moment(f, [](double r) { return r; });
  const double k2 = M * std::log(4.0 * kE * kPi * M);
  return from_mc(ent - 4.0 * kPi * M * w.mean + k2 + 2.0 * rho_mom, 4.0 * kPi * M, w);
}

DeficitReport sinh_log_hls_deficit(const TestDensity& f, const McBudget& b) {
  const double M = f.mass();
  const Welford w = pair_mean(f, b, kStreamSinh, log_two_sinh_half);
  const double ent = density_entropy(f);
  return from_mc(ent + 2.0 * M * w.mean + M * std::log(kE * kPi * M), 2.0 * M, w);
}

DeficitReport log_hls_form_gap(const TestDensity& f, const McBudget& b) {
  const double M = f.mass();
  const Welford w = pair_mean(f, b, kStreamGap, log_cosh_half);
  const double rho_mom = density_moment(f, [](double r) { return r; });
  return from_mc(2.0 * M * w.mean - 2.0 * rho_mom, 2.0 * M, w);
}

double hls_constant(int n, double lambda) {
  if (n < 1 || !(lambda > 0.0) || !(lambda < n))
    throw ParameterError("hls_constant: need n >= 1 and 0 < lambda < n");
  const double nn = n;
  return std::pow(kPi, 0.5 * lambda) * lanczos_gamma(0.5 * nn - 0.5 * lambda) /
         lanczos_gamma(nn - 0.5 * lambda) *
         std::pow(lanczos_gamma(0.5 * nn) / lanczos_gamma(nn), -1.0 + lambda / nn);
}

DeficitReport hls_double_integral(const TestDensity& f, const TestDensity& g, double lambda,
                                  const McBudget& b) {
  if (!(lambda >= 0.0 && lambda < 2.0)) throw ParameterError("hls: lambda must be in [0, 2)");
  // Proposal scale from the mean pair distance.
  double mean_dist = 0.0;
  {
    Rng rng(stream_seed(b.seed, {kStreamPilot, b.key}));
    const int pilot = 512;
    for (int k = 0; k < pilot; ++k) mean_dist += hyperbolic_distance(f.sample(rng), g.sample(rng));
    mean_dist /= pilot;
  }
  const double R = std::max(2.0 * mean_dist, 1e-2);
  const double w_near = 0.5;
  const double a = 2.0 - lambda;
  const double g_support = g.support_radius();
  auto proposal_density = [&](double rho) {
    if (rho <= R) return w_near * a * std::pow(rho, 1.0 - lambda) / std::pow(R, a);
    return (1.0 - w_near) / R * std::exp(-(rho - R) / R);
  };
  const double Mf = f.mass();
  const Welford w = run_chunks(b, kStreamHls, [&](Rng& rng, Welford& acc) {
    const Point x = f.sample(rng);
    double rho;
    while (true) {
      rho = rng.uniform() < w_near ? R * std::pow(rng.uniform_open_left(), 1.0 / a)
                                   : R + R * rng.exponential();
      if (rho >= kPairFloor) break;
      ++acc.resampled;
    }
    const double theta = kTwoPi * rng.uniform();
    if (rho > x.rho() + g_support || rho > kRhoCap) {
      acc.add(0.0);
      return;
    }
    double gy = 0.0;
    try {
      gy = g(mobius_translate(x, Point::polar(rho, theta)));
    } catch (const DomainError&) {
      gy = 0.0;
    }
    const double kernel = std::pow(2.0 * std::sinh(0.5 * rho), -lambda);
    acc.add(Mf * gy * kernel * std::sinh(rho) * kTwoPi / proposal_density(rho));
  });
  return from_mc(w.mean, 1.0, w);
}

DeficitReport hls_ratio(const TestDensity& f, const TestDensity& g, double lambda,
                        const McBudget& b) {
  const double p = 4.0 / (4.0 - lambda);
  const double rhs = hls_constant(2, lambda) * std::pow(lp_norm_pow(f, p), 1.0 / p) *
                     std::pow(lp_norm_pow(g, p), 1.0 / p);
  DeficitReport r = hls_double_integral(f, g, lambda, b);
  r.value = rhs - r.value;
  return r;
}

RadialProfile profile_of(const TestDensity& f) {
  if (!f.is_radial() || !f.is_smooth())
    throw ParameterError("profile needs a smooth radial density (" + f.describe() + ")");
  return {[f](double r) { return f.radial_value(r); },
          [f](double r) { return f.radial_derivative(r); }, f.support_radius(), {}};
}

RadialProfile sqrt_profile_of(const TestDensity& f) {
  if (!f.is_radial() || !f.is_smooth())
    throw ParameterError("profile needs a smooth radial density (" + f.describe() + ")");
  return {[f](double r) { return std::sqrt(f.radial_value(r)); },
          [f](double r) {
            const double v = f.radial_value(r);
            return v > 0.0 ? 0.5 * f.radial_derivative(r) / std::sqrt(v) : 0.0;
          },
          f.support_radius(),
          {}};
}

DeficitReport mugelli_talenti_deficit(const RadialProfile& u) {
  DeficitReport r;
  r.nodes_or_samples = static_cast<long>(kRadialPanels) * kRadialOrder;
  if (!(u.rho_max > 0.0)) return r;
  const double grad = radial_integral(u, [&](double x) { return std::abs(u.derivative(x)); });
  const double l1 = radial_integral(u, [&](double x) { return std::abs(u.value(x)); });
  const double l2 = radial_integral(u, [&](double x) { return u.value(x) * u.value(x); });
  r.value = grad * grad - l1 * l1 - 4.0 * kPi * l2;
  return r;
}

DeficitReport mugelli_talenti_deficit(const TestDensity& u) {
  return mugelli_talenti_deficit(profile_of(u));
}

DeficitReport beckner_deficit(const RadialProfile& u) {
  const double n2 =
      u.rho_max > 0.0 ? radial_integral(u, [&](double x) { return u.value(x) * u.value(x); }) : 0.0;
  if (!(n2 > 0.0)) throw ParameterError("beckner_deficit: zero function");
  const double ent = radial_integral(u, [&](double x) {
    const double v = std::abs(u.value(x));
    return v > 0.0 ? v * v * std::log(v) : 0.0;
  });
  const double grad = radial_integral(u, [&](double x) { return u.derivative(x) * u.derivative(x); });
  DeficitReport r;
  r.nodes_or_samples = static_cast<long>(kRadialPanels) * kRadialOrder;
  const double lhs = ent / n2 - 0.5 * std::log(n2);
  const double rhs = 0.5 * std::log(grad / n2 / (kPi * kE));
  r.value = rhs - lhs;
  return r;
}

DeficitReport beckner_deficit(const TestDensity& f) { return beckner_deficit(sqrt_profile_of(f)); }

double beckner_entropy_gap(double M, double entropy, double fisher) {
  return M * std::log(fisher / (4.0 * kPi * kE)) - entropy;
}

DeficitReport relative_entropy_check(const TestDensity& f, double s) {
  if (!(s > 0.0)) throw ParameterError("relative_entropy_check: s must be > 0");
  const double M = f.mass();
  const double ent = density_entropy(f);
  const double pm = density_moment(f, [](double r) { return weight_p(r); });
  DeficitReport r;
  r.value = ent + pm / s - M * std::log(M / (kTwoPi * s));
  r.nodes_or_samples = static_cast<long>(kRadialPanels) * kRadialOrder;
  return r;
}

bool deficit_passes(const DeficitReport& r, double tol) {
  return std::isfinite(r.value) && r.value >= -3.0 * r.mc_error - tol;
}

std::string to_string(LabOp op) {
  switch (op) {
    case LabOp::log_hls: return "log_hls";
    case LabOp::sinh_log_hls: return "sinh_log_hls";
    case LabOp::hls_ratio: return "hls_ratio";
    case LabOp::mugelli_talenti: return "mugelli_talenti";
    case LabOp::beckner: return "beckner";
    case LabOp::relative_entropy: return "relative_entropy";
  }
  return "unknown";
}

LabOp lab_op_from_string(const std::string& name) {
  for (LabOp op : {LabOp::log_hls, LabOp::sinh_log_hls, LabOp::hls_ratio,
                   LabOp::mugelli_talenti, LabOp::beckner, LabOp::relative_entropy}) {
    if (to_string(op) == name) return op;
  }
  throw ParameterError("unknown inequality op '" + name + "'");
}

std::vector<TestDensity> default_battery(LabOp op, int count, std::uint64_t seed) {
  if (count < 1) throw ParameterError("battery needs at least one density");
  const bool smooth_radial = op == LabOp::mugelli_talenti || op == LabOp::beckner;
  Rng rng(stream_seed(seed, {0xBA77E4, static_cast<std::uint64_t>(smooth_radial)}));
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
  };
  auto pick_mass = [&] {
    static constexpr double masses[] = {1.0, 2.0, 5.0};
    return masses[std::min(2, static_cast<int>(3.0 * rng.uniform()))];
  };
  auto random_center = [&](double lo, double hi) {
    return Point::polar(lo + (hi - lo) * rng.uniform(), kTwoPi * rng.uniform());
  };
  std::vector<TestDensity> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double M = pick_mass();
    if (smooth_radial) {
      if (k % 2 == 0) {
        out.push_back(TestDensity::hyperbolic_gaussian(log_uniform(0.05, 5.0), M));
      } else {
        const double w = 0.2 + 0.6 * rng.uniform();
        out.push_back(TestDensity::mixture(
            {TestDensity::hyperbolic_gaussian(log_uniform(0.05, 0.5), w * M),
             TestDensity::hyperbolic_gaussian(log_uniform(0.5, 5.0), (1.0 - w) * M)},
            {1.0, 1.0}));
      }
      continue;
    }
    switch (k % 4) {
      case 0:
        out.push_back(TestDensity::hyperbolic_gaussian(log_uniform(0.05, 2.0), M));
        break;
      case 1:
        out.push_back(TestDensity::mobius_translated(
            TestDensity::hyperbolic_gaussian(log_uniform(0.1, 1.0), M), random_center(0.2, 1.5)));
        break;
      case 2: {
        const double a = rng.uniform();
        out.push_back(TestDensity::annulus(a, a + 0.2 + 0.8 * rng.uniform(), M));
        break;
      }
      default: {
        const double w = 0.2 + 0.6 * rng.uniform();
        out.push_back(TestDensity::mixture(
            {TestDensity::mobius_translated(TestDensity::hyperbolic_gaussian(log_uniform(0.1, 1.0), w * M),
                                            random_center(0.0, 1.0)),
             TestDensity::mobius_translated(
                 TestDensity::hyperbolic_gaussian(log_uniform(0.1, 1.0), (1.0 - w) * M),
                 random_center(0.0, 1.0))},
            {1.0, 1.0}));
        break;
      }
    }
  }
  return out;
}

std::vector<BatteryRow> run_battery(const BatterySpec& spec, int jobs) {
  struct Task {
    LabOp op;
    int index;
    int param_index;
    double param;
  };
  std::vector<Task> tasks;
  std::vector<std::vector<TestDensity>> families;
  for (LabOp op : spec.ops) {
    families.push_back(default_battery(op, spec.densities, spec.seed));
    for (int k = 0; k < spec.densities; ++k) {
      if (op == LabOp::hls_ratio) {
        for (std::size_t j = 0; j < spec.lambdas.size(); ++j)
          tasks.push_back({op, k, static_cast<int>(j), spec.lambdas[j]});
      } else if (op == LabOp::relative_entropy) {
        for (std::size_t j = 0; j < spec.entropy_s.size(); ++j)
          tasks.push_back({op, k, static_cast<int>(j), spec.entropy_s[j]});
      } else {
        tasks.push_back({op, k, 0, 0.0});
      }
    }
  }
  auto family_of = [&](LabOp op) -> const std::vector<TestDensity>& {
    for (std::size_t i = 0; i < spec.ops.size(); ++i)
      if (spec.ops[i] == op) return families[i];
    throw std::logic_error("battery family missing");
  };

  std::vector<BatteryRow> rows(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const auto& fam = family_of(t.op);
    const TestDensity& f = fam[t.index];
    McBudget b;
    b.samples = spec.samples;
    b.chunks = spec.chunks;
    b.seed = spec.seed;
    b.key = static_cast<std::uint64_t>(t.index) * 64 + static_cast<std::uint64_t>(t.param_index);
    BatteryRow row;
    row.op = t.op;
    row.index = t.index;
    row.parameter = t.param;
    row.density = f.describe();
    switch (t.op) {
      case LabOp::log_hls: row.report = log_hls_deficit(f, b); break;
      case LabOp::sinh_log_hls: row.report = sinh_log_hls_deficit(f, b); break;
      case LabOp::hls_ratio: {
        const TestDensity& g = fam[(t.index + 1) % fam.size()];
        row.density += " x " + g.describe();
        row.report = hls_ratio(f, g, t.param, b);
        break;
      }
      case LabOp::mugelli_talenti: row.report = mugelli_talenti_deficit(f); break;
      case LabOp::beckner: row.report = beckner_deficit(f); break;
      case LabOp::relative_entropy: row.report = relative_entropy_check(f, t.param); break;
    }
    row.pass = deficit_passes(row.report, spec.tol);
    rows[i] = std::move(row);
  });
  return rows;
}

}  // namespace kslab

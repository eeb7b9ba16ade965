#include "kslab/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "kslab/errors.hpp"
#include "kslab/parallel.hpp"

namespace kslab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

std::string short_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json meta_json(const ExperimentConfig& cfg) {
  return {{"version", kCodeVersion}, {"config_hash", hash_hex(cfg.hash)},
          {"command", to_string(cfg.command)}};
}

int write_or_report(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files,
                    std::ostream& log) {
  try {
    write_files_atomically(dir, files);
  } catch (const IoError& e) {
    log << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_files_atomically(const fs::path& dir,
                            const std::vector<std::pair<std::string, std::string>>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());

  std::vector<fs::path> temps;
  auto cleanup = [&] {
    for (const auto& t : temps) fs::remove(t, ec);
  };
  for (const auto& [name, content] : files) {
    const fs::path tmp = dir / ("." + name + ".tmp");
    temps.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw IoError("cannot write " + tmp.string());
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    fs::rename(temps[i], dir / files[i].first, ec);
    if (ec) {
      cleanup();
      for (std::size_t k = 0; k < i; ++k) fs::remove(dir / files[k].first, ec);
      throw IoError("cannot rename into " + (dir / files[i].first).string());
    }
  }
}

std::string series_csv(const std::vector<AnnotatedRow>& rows, const SimConfig& sim) {
  std::ostringstream os;
  os << "t,mass,p_moment,rho_moment,entropy,fisher,interaction,free_energy";
  for (double q : sim.q_list) os << ",lq_" << short_double(q);
  os << ",linf,envelope_rhs,p_bound,ent_lower,ent_upper,flags";
  os << ",dt,min_density,rho_jensen,rho_bound,ent_decay";
  for (double k : sim.k_list) os << ",m_t_" << short_double(k);
  os << "\n";
  for (const auto& a : rows) {
    const FunctionalRecord& r = a.rec;
    os << format_double(r.t) << ',' << format_double(r.mass) << ',' << format_double(r.p_moment) << ','
       << format_double(r.rho_moment) << ',' << format_double(r.entropy) << ','
       << format_double(r.fisher) << ',' << format_double(r.interaction) << ','
       << format_double(r.free_energy);
    for (double q : sim.q_list) {
      auto it = r.lq_norms.find(q);
      os << ',' << (it == r.lq_norms.end() ? std::string{} : format_double(it->second));
    }
    os << ',' << format_double(r.linf) << ',' << format_double(a.envelope_rhs) << ','
       << format_double(a.p_bound) << ',' << format_double(a.ent_lower) << ','
       << (a.ent_upper ? format_double(*a.ent_upper) : std::string{}) << ',' << a.flags();
    os << ',' << format_double(a.dt) << ',' << format_double(r.min_density) << ','
       << format_double(a.rho_jensen) << ',' << format_double(a.rho_bound) << ','
       << (a.ent_decay ? format_double(*a.ent_decay) : std::string{});
    for (double k : sim.k_list) {
      auto it = r.m_t_K.find(k);
      os << ',' << (it == r.m_t_K.end() ? std::string{} : format_double(it->second));
    }
    os << "\n";
  }
  return os.str();
}

std::string regime_label(double chi, double M, double I0) {
  const double cm = chi * M;
  if (std::abs(cm - 8.0 * kPi) <= 1e-12 * 8.0 * kPi) return "critical";
  if (cm < 8.0 * kPi) return "subcritical";
  TheoryInputs in;
  in.chi = chi;
  in.M = M;
  in.I0 = I0;
  return blowup_condition(in) ? "blowup_condition" : "uncovered";
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const SimConfig& sim = cfg.sim;
  RunResult res;
  try {
    res = run_simulation(sim);
  } catch (const std::exception& e) {
    log << "error: simulation could not start: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto rows = annotate(res.series, sim.chi, cfg.tolerances);
  const auto counts = violation_counts(rows);

  const TheoryInputs in = theory_inputs(res.series.records.front(), sim.chi);
  const BoundsReport rep = make_report(in);
  double sup_linf = 0.0;
  for (const auto& a : rows) sup_linf = std::max(sup_linf, a.rec.linf);

  json j = meta_json(cfg);
  j["grid"] = {{"rho_max", sim.rho_max}, {"n_cells", sim.n_cells}};
  j["chi"] = sim.chi;
  j["M"] = sim.mass;
  const RunStatus& st = res.status;
  j["status"] = {{"outcome", to_string(st.outcome)},
                 {"t_final", st.t_final},
                 {"blowup_time", opt_json(st.blowup_time)},
                 {"steps", st.steps},
                 {"rejected_steps", st.rejected_steps},
                 {"message", st.message}};
  json th = {{"I0", in.I0},
             {"Ent0", in.Ent0},
             {"F0", in.F0},
             {"lambda_star", rep.lambda_star},
             {"supercritical", rep.supercritical},
             {"blowup_condition", rep.blowup_condition},
             {"regime", regime_label(sim.chi, in.M, in.I0)},
             {"t_bl", opt_json(rep.t_bl)}};
  if (rep.t_bl && st.blowup_time) {
    th["blowup_over_t_bl"] = *st.blowup_time / *rep.t_bl;
  } else {
    th["blowup_over_t_bl"] = nullptr;
  }
  j["theory"] = th;
  j["rows"] = rows.size();
  j["sup_linf"] = sup_linf;
  json v = json::object();
  int hard = 0, soft = 0;
  for (const auto& [name, c] : counts) {
    v[name] = c;
    (is_hard_check(name) ? hard : soft) += c;
  }
  j["violations"] = v;
  j["hard_violations"] = hard;
  j["soft_violations"] = soft;

  const int io = write_or_report(cfg.output, {{"series.csv", series_csv(rows, sim)}, {"summary.json", dump(j)}}, log);
  if (io != kExitOk) return io;
  log << "simulate: " << to_string(st.outcome) << " at t = " << format_double(st.t_final) << ", "
      << rows.size() << " rows, " << soft << " bound violations, " << hard << " hard violations\n";
  return hard > 0 ? kExitCheck : kExitOk;
}

int cmd_sweep(const ExperimentConfig& cfg, int jobs, std::ostream& log) {
  const std::vector<SimConfig> cells = cfg.resolved_sweep();
  struct Cell {
    std::string outcome = "error";
    double t_final = 0.0;
    std::optional<double> blowup_time;
    long steps = 0;
    int hard = 0, soft = 0;
    std::string error;
  };
  std::vector<Cell> out(cells.size());
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    Cell& c = out[i];
    try {
      const RunResult r = run_simulation(cells[i]);
      for (const auto& [name, n] : violation_counts(annotate(r.series, cells[i].chi, cfg.tolerances)))
        (is_hard_check(name) ? c.hard : c.soft) += n;
      c.outcome = to_string(r.status.outcome);
      c.t_final = r.status.t_final;
      c.blowup_time = r.status.blowup_time;
      c.steps = r.status.steps;
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  });

  std::ostringstream os;
  os << "chi,M,I0,chiM_over_8pi,lambda_star,regime,t_bl,outcome,t_final,blowup_time,steps,"
        "bound_violations,hard_violations,error\n";
  int failed = 0, detections = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const SimConfig& s = cells[i];
    const Cell& c = out[i];
    TheoryInputs in;
    in.chi = s.chi;
    in.M = s.mass;
    in.I0 = s.initial.p_moment;
    const auto tbl = blowup_time_bound(in);
    os << format_double(s.chi) << ',' << format_double(s.mass) << ',' << format_double(in.I0) << ','
       << format_double(s.chi * s.mass / (8.0 * kPi)) << ',' << format_double(lambda_star(s.chi, s.mass))
       << ',' << regime_label(s.chi, s.mass, in.I0) << ',' << (tbl ? format_double(*tbl) : "") << ','
       << c.outcome << ',' << (c.error.empty() ? format_double(c.t_final) : "") << ','
       << (c.blowup_time ? format_double(*c.blowup_time) : "") << ',' << c.steps << ',' << c.soft << ','
       << c.hard << ',' << csv_field(c.error) << "\n";
    if (!c.error.empty() || c.hard > 0) ++failed;
    if (c.blowup_time) ++detections;
  }
  const int io = write_or_report(cfg.output, {{"phase_diagram.csv", os.str()}}, log);
  if (io != kExitOk) return io;
  log << "sweep: " << cells.size() << " cells, " << detections << " blow-up detections, " << failed
      << " failed cells\n";
  return failed > 0 ? kExitCheck : kExitOk;
}

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& log) {
  json entries = json::array();
  for (const TheoryInputs& in : cfg.bounds.inputs) {
    const BoundsReport r = make_report(in);
    json e = {{"inputs", {{"chi", in.chi}, {"M", in.M}, {"I0", in.I0}, {"Ent0", in.Ent0}, {"F0", in.F0}}},
              {"lambda_star", r.lambda_star},
              {"supercritical", r.supercritical},
              {"blowup_condition", r.blowup_condition},
              {"regime", regime_label(in.chi, in.M, in.I0)},
              {"t_bl", opt_json(r.t_bl)},
              {"c_plus", r.c_plus},
              {"k_plus", r.k_plus},
              {"k2", r.k2},
              {"entropy_prefactor", r.entropy_prefactor}};
    json h = json::object(), thr = json::object();
    for (double q : cfg.bounds.q_list) {
      h[short_double(q)] = r.h_of_q(q);
      thr[short_double(q)] = lq_monotonicity_threshold(q);
    }
    e["h_of_q"] = h;
    e["lq_threshold"] = thr;
    if (cfg.bounds.T) {
      e["T"] = *cfg.bounds.T;
      e["entropy_upper_bound"] = r.supercritical || in.chi * in.M >= 8.0 * kPi
                                     ? json(nullptr)
                                     : json(entropy_upper_bound(in, *cfg.bounds.T));
    }
    entries.push_back(std::move(e));
  }
  json j = meta_json(cfg);
  j["entries"] = entries;
  const int io = write_or_report(cfg.output, {{"bounds.json", dump(j)}}, log);
  if (io != kExitOk) return io;
  log << "bounds: " << entries.size() << " entries\n";
  return kExitOk;
}

int cmd_inequalities(const ExperimentConfig& cfg, int jobs, std::ostream& log) {
  std::vector<BatteryRow> rows;
  try {
    rows = run_battery(cfg.inequalities, jobs);
  } catch (const std::exception& e) {
    log << "error: battery failed: " << e.what() << "\n";
    return kExitCheck;
  }
  std::ostringstream os;
  os << "op,index,density,parameter,seed,deficit,mc_error,samples,resampled,pass\n";
  std::map<std::string, std::pair<int, int>> per_op;
  int passed = 0;
  for (const auto& r : rows) {
    os << to_string(r.op) << ',' << r.index << ',' << csv_field(r.density) << ','
       << format_double(r.parameter) << ',' << cfg.inequalities.seed << ',' << format_double(r.report.value)
       << ',' << format_double(r.report.mc_error) << ',' << r.report.nodes_or_samples << ','
       << r.report.resampled << ',' << (r.pass ? "true" : "false") << "\n";
    auto& [tot, ok] = per_op[to_string(r.op)];
    ++tot;
    ok += r.pass;
    passed += r.pass;
  }
  json j = meta_json(cfg);
  j["total"] = rows.size();
  j["passed"] = passed;
  j["pass_rate"] = rows.empty() ? 1.0 : static_cast<double>(passed) / rows.size();
  json ops = json::object();
  for (const auto& [name, c] : per_op)
    ops[name] = {{"total", c.first}, {"passed", c.second}, {"pass_rate", static_cast<double>(c.second) / c.first}};
  j["per_op"] = ops;
  const int io = write_or_report(
      cfg.output, {{"inequalities.csv", os.str()}, {"inequalities_summary.json", dump(j)}}, log);
  if (io != kExitOk) return io;
  log << "inequalities: " << passed << "/" << rows.size() << " passed\n";
  return passed == static_cast<int>(rows.size()) ? kExitOk : kExitCheck;
}

int run_command(const ExperimentConfig& cfg, int jobs, std::ostream& log) {
  switch (cfg.command) {
    case Command::simulate: return cmd_simulate(cfg, log);
    case Command::sweep: return cmd_sweep(cfg, jobs, log);
    case Command::bounds: return cmd_bounds(cfg, log);
    case Command::inequalities: return cmd_inequalities(cfg, jobs, log);
  }
  return kExitConfig;
}

}  // namespace kslab

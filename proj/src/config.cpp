#include "kslab/config.hpp"

#include <json.hpp>

#include <cmath>
#include <initializer_list>
#include <numbers>
#include <regex>
#include <set>

#include "kslab/errors.hpp"

namespace kslab {

using nlohmann::json;

namespace {

std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Collects every problem instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void only(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!ok.count(it.key())) fail(join_path(path, it.key()), "unknown key");
  }

  // Writes into `out` when present and valid; reports when required and absent.
  bool number(const json& obj, const std::string& path, const char* key, double& out,
              bool required = false, bool pi_ok = false) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
      if (required) fail(p, "required field is missing");
      return false;
    }
    return number_value(obj.at(key), p, out, pi_ok);
  }

  bool number_value(const json& v, const std::string& p, double& out, bool pi_ok) {
    if (v.is_number()) {
      out = v.get<double>();
      if (!std::isfinite(out)) {
        fail(p, "must be finite");
        return false;
      }
      return true;
    }
    if (pi_ok && v.is_string()) {
      try {
        out = parse_pi_multiple(v.get<std::string>());
        return true;
      } catch (const std::exception& e) {
        fail(p, e.what());
        return false;
      }
    }
    fail(p, pi_ok ? "expected a number or a multiple of pi such as \"16pi\"" : "expected a number");
    return false;
  }

  template <class Int>
  bool integer(const json& obj, const std::string& path, const char* key, Int& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    const std::string p = join_path(path, key);
    if (!v.is_number_integer()) {
      fail(p, "expected an integer");
      return false;
    }
    if (v.is_number_unsigned()) {
      out = static_cast<Int>(v.get<std::uint64_t>());
    } else {
      const auto x = v.get<std::int64_t>();
      if (x < 0 && std::is_unsigned_v<Int>) {
        fail(p, "must be non-negative");
        return false;
      }
      out = static_cast<Int>(x);
    }
    return true;
  }

  bool numbers(const json& obj, const std::string& path, const char* key, std::vector<double>& out,
               bool required = false, bool pi_ok = false) {
    const std::string p = join_path(path, key);
    if (!obj.contains(key)) {
      if (required) fail(p, "required field is missing");
      return false;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
      fail(p, "expected an array");
      return false;
    }
    std::vector<double> vals;
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x = 0.0;
      if (number_value(v[i], p + "[" + std::to_string(i) + "]", x, pi_ok))
        vals.push_back(x);
      else
        ok = false;
    }
    if (ok) out = std::move(vals);
    return ok;
  }

  void check(bool cond, const std::string& path, const std::string& what) {
    if (!cond) fail(path, what);
  }
};

InitialSpec read_initial(Reader& r, const json& j, const std::string& path) {
  InitialSpec init;
  if (!r.object(j, path)) return init;
  r.only(j, path, {"kind", "s", "I0", "a", "b", "components", "weights"});
  if (j.contains("kind")) {
    if (j["kind"].is_string())
      init.kind = j["kind"].get<std::string>();
    else
      r.fail(join_path(path, "kind"), "expected a string");
  }
  if (init.kind == "gaussian") {
    const bool has_s = r.number(j, path, "s", init.s);
    const bool has_i = r.number(j, path, "I0", init.p_moment);
    if (!has_s && !has_i) r.fail(path, "gaussian needs either s or I0");
    if (has_s && has_i) r.fail(path, "gaussian takes s or I0, not both");
    if (has_s) r.check(init.s > 0.0, join_path(path, "s"), "must be > 0");
    if (has_i) r.check(init.p_moment > 0.0, join_path(path, "I0"), "must be > 0");
  } else if (init.kind == "annulus") {
    r.number(j, path, "a", init.a, true);
    r.number(j, path, "b", init.b, true);
    r.check(init.a >= 0.0 && init.b > init.a, path, "annulus needs 0 <= a < b");
  } else if (init.kind == "mixture") {
    const std::string cp = join_path(path, "components");
    if (!j.contains("components") || !j["components"].is_array() || j["components"].empty()) {
      r.fail(cp, "expected a non-empty array");
    } else {
      for (std::size_t i = 0; i < j["components"].size(); ++i)
        init.components.push_back(read_initial(r, j["components"][i], cp + "[" + std::to_string(i) + "]"));
    }
    if (r.numbers(j, path, "weights", init.weights)) {
      r.check(init.weights.size() == init.components.size(), join_path(path, "weights"),
              "needs one weight per component");
      for (double w : init.weights) r.check(w > 0.0, join_path(path, "weights"), "weights must be > 0");
    }
  } else {
    r.fail(join_path(path, "kind"), "unknown kind '" + init.kind + "' (gaussian, annulus, mixture)");
  }
  return init;
}

json initial_json(const InitialSpec& s) {
  json j;
  j["kind"] = s.kind;
  if (s.kind == "gaussian") {
    if (s.s > 0.0)
      j["s"] = s.s;
    else
      j["I0"] = s.p_moment;
  } else if (s.kind == "annulus") {
    j["a"] = s.a;
    j["b"] = s.b;
  } else {
    j["components"] = json::array();
    for (const auto& c : s.components) j["components"].push_back(initial_json(c));
    j["weights"] = s.weights;
  }
  return j;
}

void read_sim(Reader& r, const json& j, SimConfig& sim, bool need_physics) {
  const std::string path = "sim";
  if (!r.object(j, path)) return;
  r.only(j, path,
         {"chi", "M", "initial", "rho_max", "n_cells", "t_end", "dt", "blowup", "output_every",
          "max_steps", "seed", "q_list", "k_list"});
  if (r.number(j, path, "chi", sim.chi, need_physics)) r.check(sim.chi >= 0.0, "sim.chi", "must be >= 0");
  if (r.number(j, path, "M", sim.mass, need_physics, true)) r.check(sim.mass > 0.0, "sim.M", "must be > 0");
  if (j.contains("initial"))
    sim.initial = read_initial(r, j["initial"], "sim.initial");
  else if (need_physics)
    r.fail("sim.initial", "required field is missing");
  if (r.number(j, path, "rho_max", sim.rho_max)) r.check(sim.rho_max > 0.0, "sim.rho_max", "must be > 0");
  if (r.integer(j, path, "n_cells", sim.n_cells)) r.check(sim.n_cells >= 16, "sim.n_cells", "must be >= 16");
  if (r.number(j, path, "t_end", sim.t_end)) r.check(sim.t_end >= 0.0, "sim.t_end", "must be >= 0");
  if (j.contains("dt") && r.object(j["dt"], "sim.dt")) {
    const json& d = j["dt"];
    r.only(d, "sim.dt", {"init", "min", "max", "safety"});
    r.number(d, "sim.dt", "init", sim.policy.dt_init);
    r.number(d, "sim.dt", "min", sim.policy.dt_min);
    r.number(d, "sim.dt", "max", sim.policy.dt_max);
    r.number(d, "sim.dt", "safety", sim.policy.safety);
  }
  const StepPolicy& pol = sim.policy;
  r.check(pol.dt_init > 0.0 && pol.dt_min > 0.0 && pol.dt_max >= pol.dt_min, "sim.dt",
          "need init > 0 and 0 < min <= max");
  r.check(pol.safety > 0.0 && pol.safety <= 1.0, "sim.dt.safety", "must lie in (0, 1]");
  if (j.contains("blowup") && r.object(j["blowup"], "sim.blowup")) {
    const json& b = j["blowup"];
    r.only(b, "sim.blowup", {"density_factor", "dt_floor"});
    if (r.number(b, "sim.blowup", "density_factor", sim.blowup.density_factor))
      r.check(sim.blowup.density_factor > 1.0, "sim.blowup.density_factor", "must be > 1");
    if (r.number(b, "sim.blowup", "dt_floor", sim.blowup.dt_floor))
      r.check(sim.blowup.dt_floor > 0.0, "sim.blowup.dt_floor", "must be > 0");
  }
  if (r.number(j, path, "output_every", sim.output_every))
    r.check(sim.output_every >= 0.0, "sim.output_every", "must be >= 0");
  if (r.integer(j, path, "max_steps", sim.max_steps)) r.check(sim.max_steps > 0, "sim.max_steps", "must be > 0");
  r.integer(j, path, "seed", sim.seed);
  if (r.numbers(j, path, "q_list", sim.q_list))
    for (double q : sim.q_list) r.check(q >= 1.0, "sim.q_list", "entries must be >= 1");
  if (r.numbers(j, path, "k_list", sim.k_list))
    for (double k : sim.k_list) r.check(k > 1.0, "sim.k_list", "entries must be > 1");
}

json sim_json(const SimConfig& s, bool with_physics) {
  json j;
  if (with_physics) {
    j["chi"] = s.chi;
    j["M"] = s.mass;
    j["initial"] = initial_json(s.initial);
  }
  j["rho_max"] = s.rho_max;
  j["n_cells"] = s.n_cells;
  j["t_end"] = s.t_end;
  j["dt"] = {{"init", s.policy.dt_init}, {"min", s.policy.dt_min}, {"max", s.policy.dt_max},
             {"safety", s.policy.safety}};
  j["blowup"] = {{"density_factor", s.blowup.density_factor}, {"dt_floor", s.blowup.dt_floor}};
  j["output_every"] = s.output_every;
  j["max_steps"] = s.max_steps;
  j["seed"] = s.seed;
  j["q_list"] = s.q_list;
  j["k_list"] = s.k_list;
  return j;
}

void read_sweep(Reader& r, const json& j, SweepSpec& sw) {
  if (!r.object(j, "sweep")) return;
  r.only(j, "sweep", {"chi", "M", "I0"});
  if (r.numbers(j, "sweep", "chi", sw.chi, true))
    for (double c : sw.chi) r.check(c >= 0.0, "sweep.chi", "entries must be >= 0");
  if (r.numbers(j, "sweep", "M", sw.M, true, true))
    for (double m : sw.M) r.check(m > 0.0, "sweep.M", "entries must be > 0");
  if (r.numbers(j, "sweep", "I0", sw.I0, true))
    for (double i : sw.I0) r.check(i > 0.0, "sweep.I0", "entries must be > 0");
  r.check(!sw.chi.empty() && !sw.M.empty() && !sw.I0.empty(), "sweep", "every axis needs at least one value");
}

void read_bounds(Reader& r, const json& j, BoundsSpec& b) {
  if (!r.object(j, "bounds")) return;
  r.only(j, "bounds", {"inputs", "q_list", "T"});
  if (!j.contains("inputs") || !j["inputs"].is_array()) {
    r.fail("bounds.inputs", "expected an array of {chi, M, I0, Ent0, F0}");
  } else {
    for (std::size_t i = 0; i < j["inputs"].size(); ++i) {
      const json& e = j["inputs"][i];
      const std::string p = "bounds.inputs[" + std::to_string(i) + "]";
      if (!r.object(e, p)) continue;
      r.only(e, p, {"chi", "M", "I0", "Ent0", "F0"});
      TheoryInputs in;
      r.number(e, p, "chi", in.chi, true);
      r.number(e, p, "M", in.M, true, true);
      r.number(e, p, "I0", in.I0, true);
      r.number(e, p, "Ent0", in.Ent0);
      r.number(e, p, "F0", in.F0);
      r.check(in.chi >= 0.0 && in.M > 0.0 && in.I0 >= 0.0, p, "need chi >= 0, M > 0, I0 >= 0");
      b.inputs.push_back(in);
    }
  }
  if (r.numbers(j, "bounds", "q_list", b.q_list))
    for (double q : b.q_list) r.check(q >= 1.0, "bounds.q_list", "entries must be >= 1");
  double T = 0.0;
  if (r.number(j, "bounds", "T", T)) {
    r.check(T > 0.0, "bounds.T", "must be > 0");
    b.T = T;
  }
}

void read_inequalities(Reader& r, const json& j, BatterySpec& s) {
  if (!r.object(j, "inequalities")) return;
  const std::string p = "inequalities";
  r.only(j, p, {"ops", "densities", "seed", "samples", "chunks", "lambdas", "entropy_s", "tol"});
  if (j.contains("ops")) {
    if (!j["ops"].is_array()) {
      r.fail("inequalities.ops", "expected an array of names");
    } else {
      s.ops.clear();
      for (const auto& o : j["ops"]) {
        try {
          s.ops.push_back(lab_op_from_string(o.is_string() ? o.get<std::string>() : std::string{}));
        } catch (const std::exception& e) {
          r.fail("inequalities.ops", e.what());
        }
      }
    }
  }
  if (r.integer(j, p, "densities", s.densities)) r.check(s.densities >= 1, "inequalities.densities", "must be >= 1");
  r.integer(j, p, "seed", s.seed);
  if (r.integer(j, p, "samples", s.samples)) r.check(s.samples >= 2, "inequalities.samples", "must be >= 2");
  if (r.integer(j, p, "chunks", s.chunks)) r.check(s.chunks >= 1, "inequalities.chunks", "must be >= 1");
  r.check(s.samples >= s.chunks, "inequalities.samples", "must be at least the chunk count");
  if (r.numbers(j, p, "lambdas", s.lambdas))
    for (double l : s.lambdas) r.check(l > 0.0 && l < 2.0, "inequalities.lambdas", "entries must lie in (0, 2)");
  if (r.numbers(j, p, "entropy_s", s.entropy_s))
    for (double x : s.entropy_s) r.check(x > 0.0, "inequalities.entropy_s", "entries must be > 0");
  if (r.number(j, p, "tol", s.tol)) r.check(s.tol >= 0.0, "inequalities.tol", "must be >= 0");
}

void read_tolerances(Reader& r, const json& j, CheckTolerances& t) {
  if (!r.object(j, "tolerances")) return;
  r.only(j, "tolerances",
         {"envelope", "p_bound", "entropy", "rho", "ent_decay", "free_energy", "mass"});
  for (auto [key, slot] : {std::pair{"envelope", &t.envelope}, std::pair{"p_bound", &t.p_bound},
                           std::pair{"entropy", &t.entropy}, std::pair{"rho", &t.rho},
                           std::pair{"ent_decay", &t.ent_decay}, std::pair{"free_energy", &t.free_energy},
                           std::pair{"mass", &t.mass}}) {
    if (r.number(j, "tolerances", key, *slot))
      r.check(*slot >= 0.0, join_path("tolerances", key), "must be >= 0");
  }
}

json canonical_json(const ExperimentConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["version"] = kCodeVersion;
  switch (c.command) {
    case Command::simulate:
      j["sim"] = sim_json(c.sim, true);
      break;
    case Command::sweep:
      j["sim"] = sim_json(c.sim, false);
      j["sweep"] = {{"chi", c.sweep.chi}, {"M", c.sweep.M}, {"I0", c.sweep.I0}};
      break;
    case Command::bounds: {
      json in = json::array();
      for (const auto& t : c.bounds.inputs)
        in.push_back({{"chi", t.chi}, {"M", t.M}, {"I0", t.I0}, {"Ent0", t.Ent0}, {"F0", t.F0}});
      j["bounds"] = {{"inputs", in}, {"q_list", c.bounds.q_list}};
      if (c.bounds.T) j["bounds"]["T"] = *c.bounds.T;
      break;
    }
    case Command::inequalities: {
      const BatterySpec& s = c.inequalities;
      json ops = json::array();
      for (auto op : s.ops) ops.push_back(to_string(op));
      j["inequalities"] = {{"ops", ops},         {"densities", s.densities}, {"seed", s.seed},
                           {"samples", s.samples}, {"chunks", s.chunks},     {"lambdas", s.lambdas},
                           {"entropy_s", s.entropy_s}, {"tol", s.tol}};
      break;
    }
  }
  const CheckTolerances& t = c.tolerances;
  j["tolerances"] = {{"envelope", t.envelope}, {"p_bound", t.p_bound},     {"entropy", t.entropy},
                     {"rho", t.rho},           {"ent_decay", t.ent_decay}, {"free_energy", t.free_energy},
                     {"mass", t.mass}};
  return j;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::sweep: return "sweep";
    case Command::bounds: return "bounds";
    case Command::inequalities: return "inequalities";
  }
  return "unknown";
}

double parse_pi_multiple(const std::string& s) {
  static const std::regex re(
      R"(^\s*([0-9]*\.?[0-9]*(?:[eE][+-]?[0-9]+)?)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$)");
  std::smatch m;
  if (std::regex_match(s, m, re)) {
    const double a = m[1].length() ? std::stod(m[1].str()) : 1.0;
    const double b = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (!(b > 0.0)) throw ParameterError("bad pi multiple '" + s + "'");
    return a * std::numbers::pi / b;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
    throw ParameterError("cannot read '" + s + "' as a number or a multiple of pi");
  return v;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void refresh_hash(ExperimentConfig& cfg) {
  cfg.canonical = canonical_json(cfg).dump();
  cfg.hash = fnv1a64(cfg.canonical);
}

std::vector<SimConfig> ExperimentConfig::resolved_sweep() const {
  std::vector<SimConfig> out;
  for (double chi : sweep.chi) {
    for (double M : sweep.M) {
      for (double I0 : sweep.I0) {
        SimConfig c = sim;
        c.chi = chi;
        c.mass = M;
        c.initial = InitialSpec{};
        c.initial.kind = "gaussian";
        c.initial.p_moment = I0;
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError({"syntax error at line " + std::to_string(line) + ", column " +
                       std::to_string(col) + ": " + e.what()});
  }

  Reader r;
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError({"config: top level must be an object"});
  r.only(j, "", {"command", "sim", "sweep", "bounds", "inequalities", "output", "tolerances"});

  if (!j.contains("command")) {
    r.fail("command", "required field is missing");
  } else if (!j["command"].is_string()) {
    r.fail("command", "expected a string");
  } else {
    const std::string c = j["command"].get<std::string>();
    if (c == "simulate") cfg.command = Command::simulate;
    else if (c == "sweep") cfg.command = Command::sweep;
    else if (c == "bounds") cfg.command = Command::bounds;
    else if (c == "inequalities") cfg.command = Command::inequalities;
    else r.fail("command", "unknown command '" + c + "' (simulate, sweep, bounds, inequalities)");
  }

  const bool simulate = cfg.command == Command::simulate;
  if (j.contains("sim"))
    read_sim(r, j["sim"], cfg.sim, simulate);
  else if (simulate)
    r.fail("sim", "required field is missing");

  if (cfg.command == Command::sweep) {
    if (j.contains("sweep"))
      read_sweep(r, j["sweep"], cfg.sweep);
    else
      r.fail("sweep", "required field is missing");
  }
  if (cfg.command == Command::bounds) {
    if (j.contains("bounds"))
      read_bounds(r, j["bounds"], cfg.bounds);
    else
      r.fail("bounds", "required field is missing");
  }
  if (j.contains("inequalities")) read_inequalities(r, j["inequalities"], cfg.inequalities);
  if (j.contains("tolerances")) read_tolerances(r, j["tolerances"], cfg.tolerances);

  if (j.contains("output")) {
    if (j["output"].is_string() && !j["output"].get<std::string>().empty())
      cfg.output = j["output"].get<std::string>();
    else
      r.fail("output", "expected a non-empty path string");
  }

  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  refresh_hash(cfg);
  return cfg;
}

}  // namespace kslab

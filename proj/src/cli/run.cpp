#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "disloc/cli.hpp"
#include "disloc/dislocation1d.hpp"
#include "disloc/errors.hpp"
#include "disloc/floquet1d.hpp"
#include "disloc/muffintin.hpp"
#include "disloc/parallel.hpp"
#include "disloc/potential_io.hpp"
#include "disloc/strip2d.hpp"

namespace disloc::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Kind { number, integer, interval, int_list, choice, boolean, potential, potential2d, geometry };

struct Param {
  std::string key;
  Kind kind;
  bool required = false;
  double lo = -kInf, hi = kInf;
  bool lo_open = false, hi_open = false;
  json def = nullptr;
  std::vector<std::string> choices = {};
};

Param num(std::string key, double lo, double hi, json def, bool lo_open = false) {
  return {std::move(key), Kind::number, false, lo, hi, lo_open, false, std::move(def)};
}
Param integer(std::string key, double lo, double hi, json def) {
  return {std::move(key), Kind::integer, false, lo, hi, false, false, std::move(def)};
}

const std::vector<Param>& schema(Command c) {
  static const std::vector<Param> bands{
      {"potential", Kind::potential, true},
      num("emin", -1e6, 1e6, nullptr),
      num("emax", -1e6, 1e6, nullptr),
      num("tol", 0, 1e-3, 1e-10, true),
      integer("points", 2, 1e6, 2001)};
  static const std::vector<Param> branch{
      {"potential", Kind::potential, true},
      integer("k", 1, 50, 1),
      integer("subintervals", 1, 1e5, 100),
      {"energy_range", Kind::interval},
      num("t_step", 0, 0.1, 1e-3, true),
      num("root_tol", 0, 1e-3, 1e-10, true),
      num("residual_tol", 0, 1e-2, 1e-8, true)};
  static const std::vector<Param> flow{
      {"potential", Kind::potential, true},
      integer("k", 1, 50, 1),
      integer("n", 1, 500, 4),
      num("e_ref", -1e6, 1e6, nullptr),
      num("h", 0, kInf, nullptr, true)};
  static const std::vector<Param> strip{
      {"potential", Kind::potential2d, true},
      integer("n", 1, 64, 4),
      num("t", 0, 1, 0.0),
      {"window", Kind::interval, true},
      num("h", 0, 1.0 / 16, 1.0 / 64, true),
      integer("n_theta", 1, 256, 1),
      {"vectors", Kind::boolean, false, -kInf, kInf, false, false, true}};
  static const std::vector<Param> dos{
      {"potential", Kind::potential2d, true},
      {"kind", Kind::choice, false, -kInf, kInf, false, false, "surface", {"surface", "bulk"}},
      num("t", 0, 1, 0.0),
      {"interval", Kind::interval, true},
      {"n_list", Kind::int_list, false, 1, 64, false, false, json::array({3, 4, 5})},
      num("h", 0, 1.0 / 16, 1.0 / 32, true)};
  static const std::vector<Param> muffin{
      {"geometry", Kind::geometry, true},
      integer("count", 1, 200, 4),
      num("h", 0, 1.0 / 8, 1.0 / 64, true),
      integer("n_phases", 2, 256, 16),
      num("resolution", 0, 1.0 / 16, 1.0 / 512, true),
      num("mask_resolution", 0, 1.0 / 16, 1.0 / 128, true)};
  static const std::vector<Param> regularity{{"potential", Kind::potential, true}};
  switch (c) {
    case Command::bands: return bands;
    case Command::branch: return branch;
    case Command::flow: return flow;
    case Command::strip: return strip;
    case Command::dos: return dos;
    case Command::muffin: return muffin;
    case Command::regularity: return regularity;
  }
  return regularity;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string bounds_text(const Param& p) {
  return std::string(p.lo_open ? "(" : "[") + fmt(p.lo) + ", " + fmt(p.hi) + (p.hi_open ? ")" : "]");
}

bool in_bounds(const Param& p, double v) {
  const bool lo_ok = p.lo_open ? v > p.lo : v >= p.lo;
  const bool hi_ok = p.hi_open ? v < p.hi : v <= p.hi;
  return lo_ok && hi_ok;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

// Replaces file references of the input keys by their contents.
void inline_inputs(json& params, const std::string& base_dir) {
  for (const char* key : {"potential", "geometry"}) {
    if (!params.contains(key) || !params.at(key).is_string()) continue;
    fs::path p = params.at(key).get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    params[key] = read_json_file(p.string());
  }
}

void apply_override(json& params, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like KEY=VALUE: " + text);
  const std::string key = text.substr(0, eq), raw = text.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &params;
  std::string path = "$";
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("empty component in override key " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    path += "." + part;
    if (!node->contains(part) || !(*node)[part].is_object())
      throw ValidationError("override " + key + " needs " + path + " to be an object");
    node = &(*node)[part];
    start = dot + 1;
  }
}

void check_param(const Param& p, const json& v, std::vector<std::string>& out) {
  const std::string path = "$." + p.key;
  switch (p.kind) {
    case Kind::number:
    case Kind::integer: {
      if (!v.is_number() || (p.kind == Kind::integer && !v.is_number_integer())) {
        out.push_back(path + (p.kind == Kind::integer ? " must be an integer" : " must be a number"));
        return;
      }
      const double x = v.get<double>();
      if (!in_bounds(p, x)) out.push_back(path + " = " + v.dump() + " out of range: " + p.key + " in " + bounds_text(p));
      return;
    }
    case Kind::interval: {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        out.push_back(path + " must be a pair [lo, hi]");
        return;
      }
      if (!(v[0].get<double>() < v[1].get<double>())) out.push_back(path + " must satisfy lo < hi");
      return;
    }
    case Kind::int_list: {
      if (!v.is_array() || v.empty()) {
        out.push_back(path + " must be a non-empty list of integers");
        return;
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) out.push_back(path + "[" + std::to_string(i) + "] must be an integer");
        else if (!in_bounds(p, v[i].get<double>()))
          out.push_back(path + "[" + std::to_string(i) + "] = " + v[i].dump() + " must lie in " + bounds_text(p));
      }
      return;
    }
    case Kind::choice: {
      if (!v.is_string() || std::find(p.choices.begin(), p.choices.end(), v.get<std::string>()) == p.choices.end()) {
        std::string list;
        for (const auto& c : p.choices) list += (list.empty() ? "" : ", ") + c;
        out.push_back(path + " must be one of: " + list);
      }
      return;
    }
    case Kind::boolean:
      if (!v.is_boolean()) out.push_back(path + " must be true or false");
      return;
    case Kind::potential: {
      auto d = check_potential_json(v, path);
      out.insert(out.end(), d.begin(), d.end());
      return;
    }
    case Kind::potential2d:
      try {
        potential2d_from_json(v, path);
      } catch (const std::exception& e) {
        out.push_back(e.what());
      }
      return;
    case Kind::geometry: {
      auto d = check_geometry_json(v, path);
      out.insert(out.end(), d.begin(), d.end());
      return;
    }
  }
}

// Parameter lookup with schema defaults.
class Params {
 public:
  explicit Params(const RunConfig& cfg) : cfg_(cfg) {}
  bool has(const std::string& key) const { return cfg_.params.contains(key) || !def(key).is_null(); }
  const json& get(const std::string& key) const {
    if (cfg_.params.contains(key)) return cfg_.params.at(key);
    return def(key);
  }
  double number(const std::string& key) const { return get(key).get<double>(); }
  int integer(const std::string& key) const { return get(key).get<int>(); }
  std::pair<double, double> interval(const std::string& key) const {
    const auto& v = get(key);
    return {v[0].get<double>(), v[1].get<double>()};
  }

 private:
  const json& def(const std::string& key) const {
    static const json null = nullptr;
    for (const auto& p : schema(cfg_.command))
      if (p.key == key) return p.def;
    return null;
  }
  const RunConfig& cfg_;
};

Tolerances tolerances_of(const RunConfig& cfg) {
  Tolerances t;
  const Params p(cfg);
  if (cfg.command == Command::bands) t.discriminant_bisection = p.number("tol");
  if (cfg.command == Command::branch) {
    t.mismatch_bisection = p.number("root_tol");
    t.mismatch_acceptance = p.number("residual_tol");
  }
  return t;
}

std::string csv_header(const RunConfig& cfg, const std::string& units) {
  const Tolerances t = tolerances_of(cfg);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# tolerances: discriminant_bisection=%g mismatch_bisection=%g mismatch_acceptance=%g "
                "eigen_residual=%g\n",
                t.discriminant_bisection, t.mismatch_bisection, t.mismatch_acceptance, t.eigen_residual);
  return "# dislocate " + to_string(cfg.command) + "\n" + buf + "# units: " + units + "\n";
}

json artifact(const RunConfig& cfg) {
  json meta = {{"tool", "dislocate"},
               {"command", to_string(cfg.command)},
               {"tolerances", to_json(tolerances_of(cfg))},
               {"config", cfg.params}};
  if (cfg.seed) meta["seed"] = *cfg.seed;
  return {{"artifact", to_string(cfg.command)}, {"meta", meta}};
}

class Writer {
 public:
  explicit Writer(const RunConfig& cfg) : dir_(cfg.out_dir) { fs::create_directories(dir_); }
  void put(const std::string& name, const std::string& content) {
    const std::string path = (fs::path(dir_) / name).string();
    write_atomic(path, content);
    files.push_back(path);
  }
  void put(const std::string& name, const json& j) { put(name, j.dump(2) + "\n"); }
  std::vector<std::string> files;

 private:
  std::string dir_;
};

std::string range_text(double lo, double hi) { return "(" + fmt(lo) + ", " + fmt(hi) + ")"; }

// ---------------------------------------------------------------------------
// Commands.

std::string run_bands(const RunConfig& cfg, Writer& w) {
  const Params p(cfg);
  const auto V = potential_from_json(p.get("potential"), "$.potential");
  const double emin = p.has("emin") ? p.number("emin") : V.min_value() - 1.0;
  const double emax = p.has("emax") ? p.number("emax") : V.max_value() + 50.0;
  if (!(emin < emax)) throw ValidationError("$.emin must be below $.emax");
  const auto bs = band_structure(V, emin, emax, p.number("tol"));
  json j = artifact(cfg);
  j["emin"] = emin, j["emax"] = emax;
  j["bands"] = json::array();
  for (const auto& b : bs.bands)
    j["bands"].push_back({{"index", b.index}, {"lo", b.lo}, {"hi", b.hi}, {"truncated", b.truncated}});
  j["gaps"] = json::array();
  int open = 0;
  for (const auto& g : bs.gaps) {
    j["gaps"].push_back({{"k", g.k}, {"lo", g.lo}, {"hi", g.hi}, {"open", g.open()}});
    open += g.open();
  }
  w.put("bands.json", j);
  w.put("discriminant.csv", csv_header(cfg, "E energy, D dimensionless") +
                                discriminant_csv(V, emin, emax, p.integer("points")));
  return std::to_string(bs.bands.size()) + " bands, " + std::to_string(open) + " open gaps in [" + fmt(emin) +
         ", " + fmt(emax) + "]";
}

std::string run_branch(const RunConfig& cfg, Writer& w) {
  const Params p(cfg);
  const auto V = potential_from_json(p.get("potential"), "$.potential");
  TraceOptions opt;
  if (p.has("energy_range")) opt.energy_range = p.interval("energy_range");
  opt.t_step = p.number("t_step");
  opt.root_tol = p.number("root_tol");
  opt.residual_tol = p.number("residual_tol");
  const int k = p.integer("k");
  const auto tr = trace_branch(V, k, p.integer("subintervals"), opt);
  const auto& primary = tr.primary();

  // Rows on the energy grid only; refinement samples stay in the JSON count.
  std::string csv = csv_header(cfg, "t period fraction, E energy") + "t,E,residual\n";
  int rows = 0;
  char buf[128];
  for (const auto& s : primary.samples) {
    const bool on_grid = std::any_of(tr.energies.begin(), tr.energies.end(), [&](double e) {
      return std::abs(e - s.E) <= 1e-14 * std::max(1.0, std::abs(e));
    });
    if (!on_grid) continue;
    std::snprintf(buf, sizeof buf, "%.12f,%.12f,%.3e\n", s.t, s.E, s.residual);
    csv += buf;
    ++rows;
  }
  w.put("branch.csv", csv);

  json j = artifact(cfg);
  j["gap"] = {{"k", tr.gap.k}, {"lo", tr.gap.lo}, {"hi", tr.gap.hi}};
  j["energies"] = tr.energies.size();
  j["roots_per_energy"] = tr.roots_per_energy;
  j["uncovered"] = tr.uncovered;
  j["continuity_budget"] = tr.continuity_budget;
  j["primary_samples"] = primary.samples.size();
  j["rows"] = rows;
  j["branches"] = json::array();
  for (const auto& b : tr.branches)
    j["branches"].push_back({{"samples", b.samples.size()},
                             {"t_range", {b.t_min(), b.t_max()}},
                             {"E_range", {b.e_min(), b.e_max()}}});
  w.put("branch.json", j);
  return std::to_string(rows) + " branch rows on gap " + std::to_string(k) + " " + range_text(tr.gap.lo, tr.gap.hi) +
         ", " + std::to_string(tr.uncovered.size()) + " energies without a root";
}

std::string run_flow(const RunConfig& cfg, Writer& w) {
  const Params p(cfg);
  const auto V = potential_from_json(p.get("potential"), "$.potential");
  const int k = p.integer("k");
  const Gap gap = find_gap(V, k);
  if (!gap.open()) throw PreconditionError("gap " + std::to_string(k) + " is closed");
  const double e_ref = p.has("e_ref") ? p.number("e_ref") : gap.mid();
  const double h = p.has("h") ? p.number("h") : default_spacing(V);
  const auto r = spectral_flow(V, k, p.integer("n"), e_ref, h);
  json j = artifact(cfg);
  j.update(to_json(r));
  j["gap"] = {{"k", gap.k}, {"lo", gap.lo}, {"hi", gap.hi}};
  j["h"] = h;
  w.put("flow.json", j);
  return "flow = " + std::to_string(r.flow) + " through gap " + std::to_string(k) + " at E_ref = " + fmt(e_ref) +
         ", n = " + std::to_string(r.n);
}

std::string run_strip(const RunConfig& cfg, Writer& w) {
  const Params p(cfg);
  const auto V = potential2d_from_json(p.get("potential"), "$.potential");
  if (auto warn = lipschitz_warning(V)) std::fprintf(stderr, "warning: %s\n", warn->c_str());
  const int n = p.integer("n"), n_theta = p.integer("n_theta");
  const double t = p.number("t"), h = p.number("h");
  const auto window = p.interval("window");
  std::vector<StripSpectrum> spectra;
  if (n_theta == 1) {
    StripOptions opt;
    opt.with_vectors = p.get("vectors").get<bool>();
    if (cfg.seed) opt.eig.seed = *cfg.seed;
    spectra.push_back(gap_eigenvalues_strip(V, n, t, window, h, opt));
  } else {
    spectra = theta_sweep(V, n, t, window, h, n_theta, cfg.jobs);
  }
  json j = artifact(cfg);
  j["spectra"] = json::array();
  std::size_t total = 0;
  for (const auto& s : spectra) {
    j["spectra"].push_back(to_json(s));
    total += s.eigenvalues.size();
  }
  w.put("strip.json", j);
  const auto& first = spectra.front();
  if (n_theta == 1 && p.get("vectors").get<bool>())
    for (std::size_t i = 0; i < first.eigenvalues.size(); ++i)
      w.put("eigenvector_" + std::to_string(i) + ".csv",
            csv_header(cfg, "x, y period units; value real amplitude") + eigenvector_csv(first, static_cast<int>(i)));
  return std::to_string(total) + " eigenvalues in " + range_text(window.first, window.second) + " at t = " + fmt(t) +
         ", n = " + std::to_string(n) + " over " + std::to_string(n_theta) + " phase(s)";
}

std::string run_dos(const RunConfig& cfg, Writer& w) {
  const Params p(cfg);
  const auto V = potential2d_from_json(p.get("potential"), "$.potential");
  const bool surface = p.get("kind").get<std::string>() == "surface";
  const double t = p.number("t"), h = p.number("h");
  const auto interval = p.interval("interval");
  const auto n_list = p.get("n_list").get<std::vector<int>>();
  auto estimate = [&](double tt) {
    return surface ? surface_dos(V, tt, interval, n_list, h) : bulk_dos(V, tt, interval, n_list, h);
  };
  DosEstimate est, base;
  parallel_for(2, cfg.jobs, [&](int i) { (i == 0 ? est : base) = estimate(i == 0 ? t : 0.0); });
  json j = artifact(cfg);
  j.update(to_json(est));
  j["baseline"] = to_json(base);
  w.put("dos.json", j);
  std::string vals;
  for (double v : est.normalized) vals += (vals.empty() ? "" : ", ") + fmt(v);
  return std::string(surface ? "surface" : "bulk") + " DOS at t = " + fmt(t) + ": [" + vals + "]";
}

std::string run_muffin(const RunConfig& cfg, Writer& w) {
  const Params p(cfg);
  const auto g = geometry_from_json(p.get("geometry"), "$.geometry");
  const int count = p.integer("count");
  const double h = p.number("h");
  json j = artifact(cfg);
  j["geometry"] = to_json(g);
  j["disc_eigenvalues"] = disc_eigenvalues(g.r, count);
  std::string summary;
  if (g.direction == Direction::x) {
    if (std::abs(g.x0 - 0.5) > 1e-12)
      throw ValidationError("$.geometry.x0: cut-disc spectra are implemented for x0 = 1/2 only");
    if (g.t <= 0.5 - g.r) {
      j["cut"] = {{"empty", true}, {"note", "t <= 1/2 - r: the cut region is empty"}};
      summary = "cut region empty at t = " + fmt(g.t);
    } else {
      j["cut"] = to_json(cut_disc_eigenvalues(g.r, g.t, count, h));
      j["cut"]["empty"] = false;
      summary = "cut-disc lambda_1 = " + fmt(j["cut"]["eigenvalues"][0].get<double>());
    }
  } else if (y_dislocation_is_inert(g)) {
    j["surface"] = {{"classification", "inert"},
                    {"note", "no disc meets the interface; the spectrum is mu_k(r) for every t"}};
    summary = "interface inert";
  } else {
    if (g.x0 != 0.0 || g.y0 != 0.0)
      throw ValidationError("$.geometry: y-dislocation spectra are implemented for x0 = y0 = 0 only");
    const auto s = surface_spectrum(g.r, g.t, count, h, p.integer("n_phases"), cfg.jobs);
    j["surface"] = to_json(s);
    j["connectivity"] = to_json(interface_connectivity(g.r, g.t, p.number("resolution")));
    const auto mask = interface_mask(g.r, g.t, p.number("mask_resolution"), -1.0, 2.0);
    w.put("raster.csv", csv_header(cfg, "x, y period units; inside 0 or 1") + raster_csv(mask));
    summary = to_string(s.region.connectivity) + " interface, " +
              (s.kind == SpectrumKind::point ? std::to_string(s.points.size()) + " point eigenvalues"
                                             : std::to_string(s.bands.size()) + " bands");
  }
  w.put("muffin.json", j);
  return summary;
}

std::string run_regularity(const RunConfig& cfg, Writer& w) {
  const Params p(cfg);
  const auto V = potential_from_json(p.get("potential"), "$.potential");
  const auto r = regularity_class(V);
  json j = artifact(cfg);
  j["alpha_estimate"] = r.alpha_estimate;
  j["alpha_raw"] = r.alpha_raw;
  j["holder_constant"] = r.holder_constant;
  j["total_variation_per_period"] = r.total_variation_per_period;
  j["is_bv"] = r.is_bv;
  j["fit_tolerance"] = r.fit_tolerance;
  j["s_grid"] = r.s_grid;
  j["theta_values"] = r.theta_values;
  w.put("regularity.json", j);
  return "alpha = " + fmt(r.alpha_estimate) + ", C = " + fmt(r.holder_constant) + ", TV = " +
         fmt(r.total_variation_per_period);
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::bands: return "bands";
    case Command::branch: return "branch";
    case Command::flow: return "flow";
    case Command::strip: return "strip";
    case Command::dos: return "dos";
    case Command::muffin: return "muffin";
    case Command::regularity: return "regularity";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  for (Command c : {Command::bands, Command::branch, Command::flow, Command::strip, Command::dos, Command::muffin,
                    Command::regularity})
    if (to_string(c) == s) return c;
  throw ValidationError("unknown command " + s);
}

json to_json(const Tolerances& t) {
  return {{"discriminant_bisection", t.discriminant_bisection},
          {"mismatch_bisection", t.mismatch_bisection},
          {"mismatch_acceptance", t.mismatch_acceptance},
          {"eigen_residual", t.eigen_residual}};
}

RunConfig load_config(Command command, const std::string& config_path, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  cfg.command = command;
  if (!config_path.empty()) {
    cfg.params = read_json_file(config_path);
    if (!cfg.params.is_object()) throw ValidationError("config " + config_path + " must hold a JSON object");
    cfg.base_dir = fs::path(config_path).parent_path().string();
    if (cfg.base_dir.empty()) cfg.base_dir = ".";
  }
  inline_inputs(cfg.params, cfg.base_dir);
  for (const auto& o : overrides) apply_override(cfg.params, o);
  inline_inputs(cfg.params, ".");
  return cfg;
}

std::vector<std::string> validate(const RunConfig& cfg) {
  std::vector<std::string> out;
  if (!cfg.params.is_object()) return {"$ must be an object"};
  const auto& sch = schema(cfg.command);
  for (auto it = cfg.params.begin(); it != cfg.params.end(); ++it) {
    if (it.key() == "command") {
      if (it.value() != to_string(cfg.command)) out.push_back("$.command does not match " + to_string(cfg.command));
      continue;
    }
    if (std::none_of(sch.begin(), sch.end(), [&](const Param& p) { return p.key == it.key(); }))
      out.push_back("unknown key $." + it.key());
  }
  for (const auto& p : sch) {
    if (!cfg.params.contains(p.key)) {
      if (p.required) out.push_back("missing required key $." + p.key);
      continue;
    }
    check_param(p, cfg.params.at(p.key), out);
  }
  if (cfg.jobs < 1) out.push_back("--jobs must be at least 1");
  return out;
}

Outcome run(const RunConfig& cfg) {
  Outcome o;
  const auto diags = validate(cfg);
  if (!diags.empty()) {
    o.exit_code = 1;
    o.summary = "invalid config: " + diags.front();
    return o;
  }
  try {
    Writer w(cfg);
    std::string s;
    switch (cfg.command) {
      case Command::bands: s = run_bands(cfg, w); break;
      case Command::branch: s = run_branch(cfg, w); break;
      case Command::flow: s = run_flow(cfg, w); break;
      case Command::strip: s = run_strip(cfg, w); break;
      case Command::dos: s = run_dos(cfg, w); break;
      case Command::muffin: s = run_muffin(cfg, w); break;
      case Command::regularity: s = run_regularity(cfg, w); break;
    }
    o.files = w.files;
    o.summary = to_string(cfg.command) + ": " + s;
  } catch (const ValidationError& e) {
    o.exit_code = 1;
    o.summary = std::string("validation error: ") + e.what();
  } catch (const PreconditionError& e) {
    o.exit_code = 1;
    o.summary = std::string("precondition failed: ") + e.what();
  } catch (const std::exception& e) {
    o.exit_code = 2;
    o.summary = std::string("numerical failure: ") + e.what();
  }
  return o;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw ValidationError("cannot write " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ValidationError("cannot move " + tmp + " into place: " + ec.message());
  }
}

}  // namespace disloc::cli

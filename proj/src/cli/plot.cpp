#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "disloc/cli.hpp"
#include "disloc/errors.hpp"

namespace disloc::cli {

using json = nlohmann::json;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read artifact " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Csv {
  std::string command;  // from the "# dislocate <command>" line
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  return out;
}

Csv parse_csv(const std::string& text) {
  Csv c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# dislocate ";
      if (line.rfind(tag, 0) == 0) c.command = line.substr(tag.size());
      continue;
    }
    if (c.columns.empty()) c.columns = split(line, ',');
    else c.rows.push_back(split(line, ','));
  }
  return c;
}

std::string header(const std::string& kind, const std::string& source, const std::string& command,
                   const std::string& columns) {
  return "# dislocate plot --kind " + kind + "\n# source: " + source + " (command " +
         (command.empty() ? "unknown" : command) + ")\n# columns: " + columns + "\n";
}

// Picks named CSV columns, whitespace separated; a blank line whenever the
// value in `block_col` changes (gnuplot scan lines).
std::string columns_of(const Csv& c, const std::vector<std::string>& names, int block_col = -1) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    const auto it = std::find(c.columns.begin(), c.columns.end(), n);
    if (it == c.columns.end()) throw ValidationError("artifact has no column " + n);
    idx.push_back(static_cast<std::size_t>(it - c.columns.begin()));
  }
  std::string out, last;
  for (const auto& row : c.rows) {
    if (block_col >= 0) {
      const std::string key = row.at(idx[block_col]);
      if (!last.empty() && key != last) out += "\n";
      last = key;
    }
    for (std::size_t i = 0; i < idx.size(); ++i) out += (i ? " " : "") + row.at(idx[i]);
    out += "\n";
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string dos_columns(const json& j, std::string& columns) {
  std::string out;
  if (j.contains("normalized")) {
    columns = "n [periods]  count  normalized [states per period or per cell]";
    const auto& n = j.at("n_list");
    for (std::size_t i = 0; i < n.size(); ++i)
      out += std::to_string(n[i].get<int>()) + " " + std::to_string(j.at("counts")[i].get<int>()) + " " +
             num(j.at("normalized")[i].get<double>()) + "\n";
    return out;
  }
  columns = "theta [radians]  index  E [energy]";
  if (j.contains("spectra")) {
    for (const auto& s : j.at("spectra")) {
      const auto& ev = s.at("eigenvalues");
      for (std::size_t i = 0; i < ev.size(); ++i)
        out += num(s.at("theta").get<double>()) + " " + std::to_string(i) + " " + num(ev[i].get<double>()) + "\n";
    }
    return out;
  }
  if (j.contains("eigenvalues")) {
    const auto& ev = j.at("eigenvalues");
    for (std::size_t i = 0; i < ev.size(); ++i) out += "0 " + std::to_string(i) + " " + num(ev[i].get<double>()) + "\n";
    return out;
  }
  throw ValidationError("artifact carries neither a density of states nor an eigenvalue list");
}

}  // namespace

Outcome emit_plot_data(const std::string& artifact_path, const std::string& kind, const std::string& out_path) {
  Outcome o;
  static const std::set<std::string> kinds{"discriminant", "branch", "dos", "raster"};
  if (!kinds.count(kind)) {
    o.exit_code = 1;
    o.summary = "unknown plot kind " + kind + " (expected discriminant, branch, dos or raster)";
    return o;
  }
  try {
    const std::string text = read_text(artifact_path);
    std::string body;
    if (kind == "dos") {
      json j;
      try {
        j = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ValidationError("artifact " + artifact_path + " is not JSON: " + e.what());
      }
      std::string columns;
      const std::string rows = dos_columns(j, columns);
      const std::string command = j.contains("meta") ? j.at("meta").value("command", "") : "";
      body = header(kind, artifact_path, command, columns) + rows;
    } else {
      const Csv c = parse_csv(text);
      if (kind == "discriminant")
        body = header(kind, artifact_path, c.command, "E [energy]  D(E) [dimensionless]") + columns_of(c, {"E", "D"});
      else if (kind == "branch")
        body = header(kind, artifact_path, c.command, "t [period fraction]  E [energy]") + columns_of(c, {"t", "E"});
      else
        body = header(kind, artifact_path, c.command, "x [period units]  y [period units]  inside [0/1]") +
               columns_of(c, {"x", "y", "inside"}, 1);
    }
    write_atomic(out_path, body);
    o.files.push_back(out_path);
    o.summary = "plot " + kind + ": wrote " + out_path;
  } catch (const std::exception& e) {
    o.exit_code = 1;
    o.summary = std::string("plot failed: ") + e.what();
  }
  return o;
}

// ---------------------------------------------------------------------------
// Artifact schema.

namespace {

void need(const json& j, const std::string& key, bool (json::*is)() const noexcept, const std::string& what,
          std::vector<std::string>& out, const std::string& path = "$") {
  if (!j.contains(key)) out.push_back("missing " + path + "." + key);
  else if (!(j.at(key).*is)()) out.push_back(path + "." + key + " must be " + what);
}

}  // namespace

std::vector<std::string> validate_artifact(const json& j) {
  std::vector<std::string> out;
  if (!j.is_object()) return {"artifact must be a JSON object"};
  need(j, "artifact", &json::is_string, "a string", out);
  need(j, "meta", &json::is_object, "an object", out);
  if (!out.empty()) return out;
  const std::string a = j.at("artifact");
  const auto& meta = j.at("meta");
  if (meta.value("tool", "") != "dislocate") out.push_back("$.meta.tool must be \"dislocate\"");
  if (meta.value("command", "") != a) out.push_back("$.meta.command must equal $.artifact");
  need(meta, "config", &json::is_object, "an object", out, "$.meta");
  need(meta, "tolerances", &json::is_object, "an object", out, "$.meta");
  if (meta.contains("tolerances") && meta.at("tolerances").is_object())
    for (const char* k : {"discriminant_bisection", "mismatch_bisection", "mismatch_acceptance", "eigen_residual"})
      need(meta.at("tolerances"), k, &json::is_number, "a number", out, "$.meta.tolerances");

  const auto arr = &json::is_array;
  const auto number = &json::is_number;
  const auto integer = &json::is_number_integer;
  const auto object = &json::is_object;
  if (a == "bands") {
    need(j, "bands", arr, "an array", out);
    need(j, "gaps", arr, "an array", out);
  } else if (a == "branch") {
    need(j, "gap", object, "an object", out);
    need(j, "branches", arr, "an array", out);
    need(j, "energies", integer, "an integer", out);
    need(j, "rows", integer, "an integer", out);
  } else if (a == "flow") {
    for (const char* k : {"flow", "k", "n", "count_t0", "count_t1"}) need(j, k, integer, "an integer", out);
    need(j, "E_ref", number, "a number", out);
  } else if (a == "strip") {
    need(j, "spectra", arr, "an array", out);
    if (j.contains("spectra") && j.at("spectra").is_array())
      for (std::size_t i = 0; i < j.at("spectra").size(); ++i) {
        const auto& s = j.at("spectra")[i];
        const std::string p = "$.spectra[" + std::to_string(i) + "]";
        if (!s.is_object()) {
          out.push_back(p + " must be an object");
          continue;
        }
        for (const char* k : {"n", "t", "theta"}) need(s, k, number, "a number", out, p);
        need(s, "window", arr, "an array", out, p);
        need(s, "eigenvalues", arr, "an array", out, p);
      }
  } else if (a == "dos") {
    need(j, "kind", &json::is_string, "a string", out);
    for (const char* k : {"n_list", "counts", "normalized"}) need(j, k, arr, "an array", out);
    need(j, "baseline", object, "an object", out);
  } else if (a == "muffin") {
    need(j, "geometry", object, "an object", out);
    need(j, "disc_eigenvalues", arr, "an array", out);
    if (!j.contains("cut") && !j.contains("surface")) out.push_back("missing $.cut or $.surface");
  } else if (a == "regularity") {
    for (const char* k : {"alpha_estimate", "holder_constant", "total_variation_per_period"})
      need(j, k, number, "a number", out);
    need(j, "is_bv", &json::is_boolean, "a boolean", out);
  } else {
    out.push_back("unknown artifact kind " + a);
  }
  return out;
}

}  // namespace disloc::cli

#include "disloc/potential_io.hpp"

#include <algorithm>

#include "disloc/errors.hpp"

namespace disloc {

namespace jsonutil {

double number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ValidationError("missing required key " + path + "." + key);
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(path + "." + key + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) throw ValidationError("missing required key " + path + "." + key);
  const auto& v = j.at(key);
  if (!v.is_array()) throw ValidationError(path + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw ValidationError(path + "." + key + "[" + std::to_string(i) + "] must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ValidationError("unknown key " + path + "." + it.key());
}

}  // namespace jsonutil

PotentialSpec potential_from_json(const json& j, const std::string& path) {
  using namespace jsonutil;
  reject_unknown(j, {"period", "form", "breakpoints", "values", "cos", "sin", "samples"}, path);
  const double period = number(j, "period", path);
  if (!j.contains("form")) throw ValidationError("missing required key " + path + ".form");
  if (!j.at("form").is_string()) throw ValidationError(path + ".form must be a string");
  const std::string form = j.at("form").get<std::string>();
  auto forbid = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys)
      if (j.contains(k))
        throw ValidationError("key " + path + "." + k + " is not used by form '" + form + "'");
  };
  try {
    if (form == "piecewise") {
      forbid({"cos", "sin", "samples"});
      return PotentialSpec::piecewise(period, numbers(j, "breakpoints", path),
                                      numbers(j, "values", path));
    }
    if (form == "fourier") {
      forbid({"breakpoints", "values", "samples"});
      std::vector<double> c = j.contains("cos") ? numbers(j, "cos", path) : std::vector<double>{};
      std::vector<double> s = j.contains("sin") ? numbers(j, "sin", path) : std::vector<double>{};
      return PotentialSpec::fourier(period, c, s);
    }
    if (form == "sampled") {
      forbid({"breakpoints", "values", "cos", "sin"});
      return PotentialSpec::sampled(period, numbers(j, "samples", path));
    }
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.find(path) != std::string::npos) throw;
    throw ValidationError(path + ": " + msg);
  }
  throw ValidationError(path + ".form must be one of piecewise, fourier, sampled");
}

json potential_to_json(const PotentialSpec& V) {
  json j;
  j["period"] = V.period();
  j["form"] = V.kind();
  if (auto* pc = std::get_if<PiecewiseConstant>(&V.form())) {
    j["breakpoints"] = pc->breakpoints;
    j["values"] = pc->values;
  } else if (auto* f = std::get_if<Fourier>(&V.form())) {
    j["cos"] = f->cos;
    j["sin"] = f->sin;
  } else {
    j["samples"] = std::get<Sampled>(V.form()).samples;
  }
  return j;
}

std::vector<std::string> check_potential_json(const json& j, const std::string& path) {
  try {
    potential_from_json(j, path);
  } catch (const std::exception& e) {
    return {e.what()};
  }
  return {};
}

}  // namespace disloc

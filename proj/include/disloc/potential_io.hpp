#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "disloc/potential.hpp"

namespace disloc {

using json = nlohmann::json;

// Schema: {"period", "form": "piecewise"|"fourier"|"sampled", "breakpoints",
// "values", "cos", "sin", "samples"}. "period" and "form" are required and
// keys foreign to the chosen form are rejected. Errors name the key path.
PotentialSpec potential_from_json(const json& j, const std::string& path = "$");
json potential_to_json(const PotentialSpec& V);

// Same checks as potential_from_json, reported instead of thrown.
std::vector<std::string> check_potential_json(const json& j, const std::string& path = "$");

// Small helpers shared by the other JSON readers.
namespace jsonutil {
double number(const json& j, const std::string& key, const std::string& path);
std::vector<double> numbers(const json& j, const std::string& key, const std::string& path);
void reject_unknown(const json& j, const std::vector<std::string>& allowed, const std::string& path);
}  // namespace jsonutil

}  // namespace disloc

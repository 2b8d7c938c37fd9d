#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace disloc::cli {

enum class Command { bands, branch, flow, strip, dos, muffin, regularity };

std::string to_string(Command c);
// Throws ValidationError for an unknown name.
Command command_from_string(const std::string& s);

// Tolerances recorded in every artifact header.
struct Tolerances {
  double discriminant_bisection = 1e-10;
  double mismatch_bisection = 1e-10;
  double mismatch_acceptance = 1e-8;
  double eigen_residual = 1e-6;
};

nlohmann::json to_json(const Tolerances& t);

struct RunConfig {
  Command command = Command::bands;
  nlohmann::json params = nlohmann::json::object();  // config file with overrides applied
  std::string base_dir = ".";                         // relative input paths resolve here
  std::string out_dir = ".";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

// Reads the config file (a JSON object) and applies KEY=VALUE overrides.
// VALUE is parsed as JSON when possible and kept as a string otherwise;
// dotted keys address nested objects. Throws ValidationError on unreadable
// or malformed input.
RunConfig load_config(Command command, const std::string& config_path, const std::vector<std::string>& overrides);

// Schema and range checks without running anything. Each diagnostic names
// the offending key path.
std::vector<std::string> validate(const RunConfig& cfg);

struct Outcome {
  int exit_code = 0;     // 0 success, 1 validation error, 2 numerical failure
  std::string summary;   // one line
  std::vector<std::string> files;
};

// Validates, dispatches and writes the artifacts into cfg.out_dir.
Outcome run(const RunConfig& cfg);

// Gnuplot-ready columns from an artifact written by run. kind is one of
// discriminant, branch, dos, raster.
Outcome emit_plot_data(const std::string& artifact_path, const std::string& kind, const std::string& out_path);

// Checks a JSON artifact against the artifact schema.
std::vector<std::string> validate_artifact(const nlohmann::json& j);

// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace disloc::cli

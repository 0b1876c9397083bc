#pragma once
// JSON run configuration for the command-line driver: schema with defaults,
// validation with field-path diagnostics, and the deterministic serializers
// every artifact is written through.
//
// Config layout (all blocks except model/grid optional, defaults filled in):
//   {
//     "schema_version": 1,
//     "model":  { "builtin": "logistic" | "saturating", ... },
//     "grid":   { "L": 1.0, "N": 256 },
//     "solver": { "newton_tol": 1e-11, "newton_max_iter": 50 },
//     "task":   { command-specific keys },
//     "output": { "dir": "." }
//   }
// Spatial profiles are arrays of closed-form terms
//   { "coeff": 1.0, "pow": 0, "cos": [1], "sin": [] }
// (a bare number is shorthand for a constant), matching the Expr term set.

#include <string>
#include <vector>

#include "json.hpp"
#include "memdiff/model.hpp"

namespace memdiff::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::string command;
  json resolved;  // full config with defaults filled in
  double L = 1.0;
  int N = 256;
  double newton_tol = 1e-11;
  int newton_max_iter = 50;
  ModelSpec model;
  std::string out_dir = ".";
  int threads = 1;
};

// Parse + validate the config file; throws InvalidConfig with the offending
// field path in the message.  `out_override` (when nonempty) replaces
// output.dir; the override is reflected in the resolved config.
RunConfig load_config(const std::string& command,
                      const std::string& config_path,
                      const std::string& out_override, int threads);

// Typed access to the task block that writes defaults back, so the summary
// embeds the fully resolved task parameters.
class TaskReader {
 public:
  explicit TaskReader(json& task) : t_(task) {}
  double number(const std::string& key, double def);
  double required(const std::string& key);
  int integer(const std::string& key, int def);
  std::string text(const std::string& key, const std::string& def);
  bool flag(const std::string& key, bool def);
  bool has(const std::string& key) const { return t_.contains(key); }

 private:
  json& t_;
};

// FNV-1a 64-bit content hash, lower-case hex with "fnv1a64:" prefix.
std::string fnv1a_hex(const std::string& bytes);

// Every floating-point value written to CSV goes through this one formatter
// (%.17g: round-trips doubles, keeps reruns byte-identical).
std::string format_number(double v);

// Tabular artifact writer; the single serializer for CSV outputs.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& content);

// summary.json: schema_version, command, resolved config, its content hash,
// result payload, and the artifact paths written by the run.
void write_summary(const RunConfig& cfg, const json& results,
                   const std::vector<std::string>& outputs);

}  // namespace memdiff::cli

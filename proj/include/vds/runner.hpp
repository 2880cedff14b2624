#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "vds/hamiltonian.hpp"

namespace vds::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "vdsim 1.0.0";

/// Invalid configuration; the message names the line or the field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SweepAxis {
  std::string parameter;  // model.<field>, atom.<field>, atoms.<k>.<field> or options.<key>
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;

  double value(int k) const;
};

struct ScenarioConfig {
  std::string scenario;
  json model = json::object();
  json atoms = json::array();
  json options = json::object();
  std::vector<SweepAxis> sweep;
  std::string output = "out";
  unsigned workers = 1;
  std::size_t grid_cap = 10000;
  json raw;  // the document as read

  std::size_t grid_size() const;
};

const std::vector<std::string>& scenario_names();

/// Parse and validate. Throws ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

struct Artifact {
  std::string name;
  std::string content;
};

struct ScenarioOutput {
  json payload = json::object();
  json summary = json::object();  // flat headline numbers
  std::vector<Artifact> files;
  bool failed = false;
};

/// Run one scenario point. Numerical failures come back as failed outputs
/// with an "error" entry instead of throwing.
ScenarioOutput run_scenario(const ScenarioConfig& cfg, unsigned workers = 1);

/// Copy of cfg with the sweep values of grid point k applied and the sweep
/// removed.
ScenarioConfig grid_point(const ScenarioConfig& cfg, std::size_t k);

struct RunOptions {
  unsigned workers = 1;
  std::string out_dir;  // overrides cfg.output when non-empty
  bool seedless = false;
};

struct RunRecord {
  std::string out_dir;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> checksums;  // file name -> sha256
  bool ok = true;
};

/// Execute the scenario (or its sweep grid when axes are present) and
/// write results.json, summary.csv, scenario CSVs and record.json.
RunRecord execute(const ScenarioConfig& cfg, const RunOptions& opt);

std::string sha256_hex(const std::string& data);

/// Deterministic JSON text with doubles rounded to 15 significant digits.
std::string dump_results(const json& j);

}  // namespace vds::cli

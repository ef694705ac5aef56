#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kerrpdc/entanglement.hpp"
#include "kerrpdc/fock.hpp"
#include "kerrpdc/integrator.hpp"

namespace kerrpdc {

enum class ScenarioKind { Closed, AnalyticCompare, Open, GammaSweep, NbarSweep };

[[nodiscard]] std::string to_string(ScenarioKind kind);
/// "closed", "analytic-compare", "open", "gamma-sweep", "nbar-sweep".
[[nodiscard]] ScenarioKind parse_scenario_kind(const std::string& text);

/// Configuration problem tied to one field (and a line, when parsed from text).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0);
  [[nodiscard]] const std::string& field() const { return field_; }
  [[nodiscard]] int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Damping point of one open run inside a sweep.
struct RunPoint {
  double gamma = 0.0;
  double nbar = 0.0;
  friend bool operator==(const RunPoint&, const RunPoint&) = default;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Closed;
  std::string name = "run";  ///< output file stem
  SystemParams params;
  IntegratorConfig integ;
  std::vector<QubitPair> pairs{{0, 1}, {0, 2}, {1, 2}};
  std::vector<double> gamma_grid;  ///< gamma-sweep: gamma_a = gamma_b = value
  std::vector<double> nbar_grid;   ///< nbar-sweep: nbar_a = nbar_b = value
  std::vector<RunPoint> extra_runs;  ///< appended to a sweep, e.g. a reference run
  bool with_csi = false;
  bool with_border = false;
  EventOptions events;
  double refine_to = 1e-3;
  double asymptote_window = 10.0;  ///< averaging window for long-time values
  int positivity_check_every = 20;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Damping points of a sweep in output order (grid first, then extra runs).
  [[nodiscard]] std::vector<RunPoint> runs() const;
};

/// Parses key = value lines; '#' starts a comment. Unknown or repeated keys
/// and malformed values raise ConfigError with the line number. The result
/// is validated.
[[nodiscard]] ScenarioConfig parse_config(std::istream& in);
[[nodiscard]] ScenarioConfig parse_config_text(const std::string& text);
[[nodiscard]] ScenarioConfig load_config_file(const std::filesystem::path& path);

/// Built-in reproduction recipes fig1 ... fig8.
[[nodiscard]] std::vector<std::string> preset_names();
[[nodiscard]] const std::string& preset_text(const std::string& name);
[[nodiscard]] ScenarioConfig load_preset(const std::string& name);

/// Canonical text form of a configuration (parse_config_text round-trips it).
[[nodiscard]] std::string format_config(const ScenarioConfig& cfg);

struct ScenarioResult {
  std::vector<std::filesystem::path> files;  ///< written artifacts, sidecar last
  nlohmann::json sidecar;
};

/// Runs the scenario and writes `<name>*.csv` plus `<name>.json` into out_dir.
/// Sweeps fan out over `workers` threads; outputs do not depend on it.
/// `log`, if given, receives one progress line per finished run.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                            int workers = 1, std::ostream* log = nullptr);

}  // namespace kerrpdc

#include "kerrpdc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "kerrpdc/closed_dynamics.hpp"
#include "kerrpdc/correlations.hpp"
#include "kerrpdc/open_dynamics.hpp"
#include "kerrpdc/sweep.hpp"
#include "kerrpdc/three_state.hpp"
#include "presets_data.hpp"

namespace kerrpdc {

using nlohmann::json;

namespace {

const std::map<std::string, ScenarioKind>& kind_table() {
  static const std::map<std::string, ScenarioKind> table{
      {"closed", ScenarioKind::Closed},
      {"analytic-compare", ScenarioKind::AnalyticCompare},
      {"open", ScenarioKind::Open},
      {"gamma-sweep", ScenarioKind::GammaSweep},
      {"nbar-sweep", ScenarioKind::NbarSweep},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (seps.find(c) != std::string::npos) {
      if (!trim(cur).empty()) out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

// Shortest representation that parses back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& text, int line) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) {
    throw ConfigError(field, "'" + text + "' is not a finite number", line);
  }
  return v;
}

int parse_int(const std::string& field, const std::string& text, int line) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError(field, "'" + text + "' is not an integer", line);
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& text, int line) {
  std::string t;
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(field, "'" + text + "' is not a boolean", line);
}

std::vector<double> parse_grid(const std::string& field, const std::string& text, int line) {
  std::vector<double> out;
  for (const auto& item : split(text, ", ")) out.push_back(parse_double(field, item, line));
  return out;
}

void require_sorted_grid(const std::string& field, const std::vector<double>& grid, bool required) {
  if (grid.empty()) {
    if (required) throw ConfigError(field, "must not be empty");
    return;
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError(field, "must be strictly increasing");
    }
  }
  for (double v : grid) {
    if (v < 0.0) throw ConfigError(field, "values must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Output helpers

std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw std::logic_error("CsvTable: row width mismatch");
    rows_.push_back(std::move(row));
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
      }
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string optional_cell(const std::optional<double>& v) { return v ? csv_number(*v) : ""; }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json params_json(const SystemParams& p) {
  return {{"chi_a", p.chi_a},         {"chi_b", p.chi_b},     {"g_real", p.g.real()},
          {"g_imag", p.g.imag()},     {"gamma_a", p.gamma_a}, {"gamma_b", p.gamma_b},
          {"nbar_a", p.nbar_a},       {"nbar_b", p.nbar_b},   {"n_max", p.n_max}};
}

json integrator_json(const IntegratorConfig& c) {
  return {{"method", "rk4-fixed-step"},
          {"dt", c.dt},
          {"t_end", c.t_end},
          {"sample_every", c.sample_every},
          {"sample_interval", c.sample_interval()},
          {"steps", c.steps()}};
}

json tolerances_json(const ScenarioConfig& cfg) {
  return {{"norm", kNormTolerance},
          {"positivity", kPositivityTolerance},
          {"positivity_failure", kPositivityFailure},
          {"step_norm_drift", kStepNormTolerance},
          {"boundary_warn", kBoundaryWarn},
          {"three_state_branch", kBranchTolerance},
          {"zero_threshold", cfg.events.zero_threshold},
          {"min_dead_samples", cfg.events.min_dead_samples},
          {"sustained_duration", cfg.events.sustained_duration},
          {"refine_to", cfg.refine_to},
          {"asymptote_window", cfg.asymptote_window}};
}

json closed_report_json(const ClosedRunReport& r) {
  return {{"steps", r.steps},
          {"max_norm_drift", r.max_norm_drift},
          {"max_step_norm_drift", r.max_step_norm_drift},
          {"max_boundary_population", r.max_boundary_population},
          {"boundary_warning", r.boundary_warning}};
}

json open_report_json(const OpenRunReport& r) {
  return {{"steps", r.steps},
          {"pair_balanced", r.pair_balanced},
          {"max_trace_drift", r.max_trace_drift},
          {"max_hermiticity_drift", r.max_hermiticity_drift},
          {"min_eigenvalue", r.min_eigenvalue},
          {"max_boundary_population", r.max_boundary_population},
          {"boundary_warning", r.boundary_warning}};
}

json events_json(const TimeSeries& series, const ScenarioConfig& cfg) {
  json out = json::object();
  for (const auto& pair : cfg.pairs) {
    json list = json::array();
    for (const auto& e : detect_events(series, pair, cfg.events)) {
      list.push_back({{"kind", to_string(e.kind)},
                      {"t", e.t},
                      {"t_lo", e.t_lo},
                      {"t_hi", e.t_hi},
                      {"dead_duration", e.dead_duration},
                      {"reaches_end", e.reaches_end},
                      {"sustained", e.sustained}});
    }
    out[pair.label()] = list;
  }
  return out;
}

json series_summary_json(const TimeSeries& series, const ScenarioConfig& cfg) {
  json out = json::object();
  for (const auto& pair : cfg.pairs) {
    const auto& n = series.track(pair).negativity;
    out["N_" + pair.label()] = {
        {"max", *std::max_element(n.begin(), n.end())},
        {"min", *std::min_element(n.begin(), n.end())},
        {"tail_mean", tail_mean(series.t, n, cfg.asymptote_window)}};
  }
  if (cfg.with_csi) {
    const auto range = csi_range(series);
    out["R"] = {{"min", optional_json(range.min)},
                {"max", optional_json(range.max)},
                {"undefined_samples", range.undefined},
                {"first_below_1", optional_json(first_csi_below(series))}};
  }
  return out;
}

// Columns for one recorded run; `tag` is appended to every name.
struct SeriesColumns {
  std::vector<std::string> names;
  std::vector<std::function<std::string(std::size_t)>> cells;
};

SeriesColumns series_columns(const TimeSeries& series, const ScenarioConfig& cfg,
                             const std::string& tag) {
  SeriesColumns c;
  for (const auto& pair : cfg.pairs) {
    const PairTrack* track = &series.track(pair);
    c.names.push_back("N_" + pair.label() + tag);
    c.cells.push_back([track](std::size_t i) { return csv_number(track->negativity[i]); });
  }
  if (cfg.with_border) {
    for (const auto& pair : cfg.pairs) {
      const PairTrack* track = &series.track(pair);
      c.names.push_back("pop_" + pair.label() + tag);
      c.cells.push_back([track](std::size_t i) { return csv_number(track->population_product[i]); });
      c.names.push_back("coh_" + pair.label() + tag);
      c.cells.push_back([track](std::size_t i) { return csv_number(track->coherence_product[i]); });
    }
  }
  if (cfg.with_csi) {
    c.names.push_back("R" + tag);
    c.cells.push_back([&series](std::size_t i) { return optional_cell(series.csi[i]); });
  }
  return c;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<const TimeSeries*>& runs,
                      const std::vector<std::string>& tags, const ScenarioConfig& cfg) {
  std::vector<std::string> header{"t"};
  std::vector<SeriesColumns> cols;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    cols.push_back(series_columns(*runs[r], cfg, tags[r]));
    header.insert(header.end(), cols.back().names.begin(), cols.back().names.end());
  }
  CsvTable table(header);
  const std::size_t n = runs.front()->size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row{csv_number(runs.front()->t[i])};
    for (const auto& c : cols)
      for (const auto& cell : c.cells) row.push_back(cell(i));
    table.add_row(std::move(row));
  }
  table.write(path);
}

std::string run_tag(const RunPoint& p) {
  return "@gamma=" + shortest(p.gamma) + ";nbar=" + shortest(p.nbar);
}

RecorderOptions recorder_for(const ScenarioConfig& cfg) {
  RecorderOptions r;
  r.record_csi = cfg.with_csi;
  r.refine_to = cfg.refine_to;
  return r;
}

OpenOptions open_options_for(const ScenarioConfig& cfg) {
  OpenOptions o;
  o.positivity_check_every = cfg.positivity_check_every;
  return o;
}

// ---------------------------------------------------------------------------
// Scenario bodies

void run_closed(const ScenarioConfig& cfg, const std::filesystem::path& dir, ScenarioResult& out) {
  const auto run = run_closed_series(cfg.params, cfg.integ, cfg.pairs, recorder_for(cfg));
  const auto path = dir / (cfg.name + ".csv");
  write_series_csv(path, {&run.series}, {""}, cfg);
  out.files.push_back(path);
  out.sidecar["report"] = closed_report_json(run.report);
  out.sidecar["events"] = events_json(run.series, cfg);
  out.sidecar["summary"] = series_summary_json(run.series, cfg);
}

void run_open(const ScenarioConfig& cfg, const std::filesystem::path& dir, ScenarioResult& out) {
  const auto run =
      run_open_series(cfg.params, cfg.integ, cfg.pairs, recorder_for(cfg), open_options_for(cfg));
  const auto path = dir / (cfg.name + ".csv");
  write_series_csv(path, {&run.series}, {""}, cfg);
  out.files.push_back(path);
  out.sidecar["report"] = open_report_json(run.report);
  out.sidecar["events"] = events_json(run.series, cfg);
  out.sidecar["summary"] = series_summary_json(run.series, cfg);
}

void run_analytic_compare(const ScenarioConfig& cfg, const std::filesystem::path& dir,
                          ScenarioResult& out) {
  SystemParams three = cfg.params;
  three.n_max = 2;
  const ThreeStateSolution sol = solve_three_state(three);

  CsvTable table({"t", "one_minus_F", "one_minus_sqrt_F", "abs_c00_full", "abs_c00_three",
                  "abs_c11_full", "abs_c11_three", "abs_c22_full", "abs_c22_three"});
  double worst = 0.0, worst_t = 0.0, worst_amp = 0.0;
  const ClosedRunReport report = evolve_closed(
      make_vacuum_state(cfg.params), cfg.params, cfg.integ,
      [&](const SampleContext<TwoModeAmplitudes>& ctx) {
        const auto& full = ctx.state;
        const auto c = eval_three_state(sol, ctx.t);
        const double f = fidelity(three_state_amplitudes(sol, ctx.t, full.n_max()), full);
        if (1.0 - f > worst) {
          worst = 1.0 - f;
          worst_t = ctx.t;
        }
        for (int i = 0; i < 3; ++i)
          worst_amp = std::max(worst_amp, std::abs(c[static_cast<std::size_t>(i)] - full(i, i)));
        table.add_row({csv_number(ctx.t), csv_number(1.0 - f), csv_number(1.0 - std::sqrt(f)),
                       csv_number(std::abs(full(0, 0))), csv_number(std::abs(c[0])),
                       csv_number(std::abs(full(1, 1))), csv_number(std::abs(c[1])),
                       csv_number(std::abs(full(2, 2))), csv_number(std::abs(c[2]))});
      });
  const auto path = dir / (cfg.name + ".csv");
  table.write(path);
  out.files.push_back(path);

  json s = json::array();
  json r = json::array();
  for (std::size_t j = 0; j < 3; ++j) {
    s.push_back({sol.s[j].real(), sol.s[j].imag()});
    json row = json::array();
    for (std::size_t i = 0; i < 3; ++i) row.push_back({sol.r[i][j].real(), sol.r[i][j].imag()});
    r.push_back(row);
  }
  out.sidecar["report"] = closed_report_json(report);
  out.sidecar["three_state"] = {{"branch", sol.branch},
                                {"x", sol.x},
                                {"K", sol.K},
                                {"M", {sol.M.real(), sol.M.imag()}},
                                {"s", s},
                                {"r_by_exponent", r},
                                {"initial_condition_defect", sol.initial_condition_defect()},
                                {"exponent_real_part_ratio", sol.exponent_real_part_ratio()}};
  out.sidecar["summary"] = {{"max_one_minus_F", worst},
                            {"t_at_max", worst_t},
                            {"max_one_minus_sqrt_F", 1.0 - std::sqrt(1.0 - worst)},
                            {"max_amplitude_gap", worst_amp}};
}

void run_sweep(const ScenarioConfig& cfg, const std::filesystem::path& dir, int workers,
               std::ostream* log, ScenarioResult& out) {
  const std::vector<RunPoint> points = cfg.runs();
  std::vector<SystemParams> params;
  for (const auto& pt : points) {
    SystemParams p = cfg.params;
    p.gamma_a = p.gamma_b = pt.gamma;
    p.nbar_a = p.nbar_b = pt.nbar;
    params.push_back(p);
  }
  const auto results = run_open_batch(
      params, cfg.integ, cfg.pairs, recorder_for(cfg), open_options_for(cfg), workers,
      [&](std::size_t i, const OpenSeriesResult& r) {
        if (log) {
          *log << "  run " << (i + 1) << "/" << points.size() << " gamma=" << shortest(points[i].gamma)
               << " nbar=" << shortest(points[i].nbar) << " steps=" << r.report.steps
               << " trace drift=" << r.report.max_trace_drift << "\n";
        }
      });

  std::vector<const TimeSeries*> series;
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < points.size(); ++i) {
    series.push_back(&results[i].series);
    tags.push_back(run_tag(points[i]));
  }
  const auto series_path = dir / (cfg.name + "_series.csv");
  write_series_csv(series_path, series, tags, cfg);
  out.files.push_back(series_path);

  // Per-run summary table.
  std::vector<std::string> header{"gamma", "nbar"};
  for (const auto& pair : cfg.pairs) {
    header.push_back("N_" + pair.label() + "_tail_mean");
    header.push_back("deaths_" + pair.label());
    header.push_back("births_" + pair.label());
  }
  if (cfg.with_csi) {
    header.push_back("R_min");
    header.push_back("R_first_below_1");
  }
  CsvTable summary(header);

  // Boundary table (first sustained death and the sustained birth after it).
  std::vector<std::string> bheader{"gamma", "nbar"};
  for (const auto& pair : cfg.pairs) {
    bheader.push_back("t_death_" + pair.label());
    bheader.push_back("t_birth_" + pair.label());
  }
  CsvTable boundaries(bheader);

  json runs = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& s = results[i].series;
    std::vector<std::string> row{csv_number(points[i].gamma), csv_number(points[i].nbar)};
    std::vector<std::string> brow = row;
    for (const auto& pair : cfg.pairs) {
      const auto events = detect_events(s, pair, cfg.events);
      const auto count = [&](EventKind k) {
        return std::count_if(events.begin(), events.end(),
                             [k](const EntanglementEvent& e) { return e.kind == k; });
      };
      row.push_back(csv_number(tail_mean(s.t, s.track(pair).negativity, cfg.asymptote_window)));
      row.push_back(std::to_string(count(EventKind::SuddenDeath)));
      row.push_back(std::to_string(count(EventKind::SuddenBirth)));

      std::optional<double> death, birth;
      for (const auto& e : sustained_only(events)) {
        if (!death && e.kind == EventKind::SuddenDeath) death = e.t;
        else if (death && !birth && e.kind == EventKind::SuddenBirth) birth = e.t;
      }
      brow.push_back(optional_cell(death));
      brow.push_back(optional_cell(birth));
    }
    if (cfg.with_csi) {
      row.push_back(optional_cell(csi_range(s).min));
      row.push_back(optional_cell(first_csi_below(s)));
    }
    summary.add_row(std::move(row));
    boundaries.add_row(std::move(brow));
    runs.push_back({{"gamma", points[i].gamma},
                    {"nbar", points[i].nbar},
                    {"report", open_report_json(results[i].report)},
                    {"events", events_json(s, cfg)},
                    {"summary", series_summary_json(s, cfg)}});
  }
  const auto summary_path = dir / (cfg.name + "_summary.csv");
  summary.write(summary_path);
  out.files.push_back(summary_path);
  if (cfg.kind == ScenarioKind::GammaSweep) {
    const auto bpath = dir / (cfg.name + "_boundaries.csv");
    boundaries.write(bpath);
    out.files.push_back(bpath);
  }
  out.sidecar["runs"] = runs;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ScenarioKind kind) {
  for (const auto& [name, k] : kind_table()) {
    if (k == kind) return name;
  }
  throw std::logic_error("unknown ScenarioKind");
}

ScenarioKind parse_scenario_kind(const std::string& text) {
  const auto it = kind_table().find(trim(text));
  if (it == kind_table().end()) {
    throw ConfigError("scenario",
                      "'" + text + "' is not one of closed, analytic-compare, open, gamma-sweep, "
                      "nbar-sweep");
  }
  return it->second;
}

ConfigError::ConfigError(std::string field, const std::string& message, int line)
    : std::invalid_argument((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                            "field '" + field + "': " + message),
      field_(std::move(field)),
      line_(line) {}

void ScenarioConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("name", "must be a non-empty file stem without path separators");
  }
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params", e.what());
  }
  try {
    integ.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("integrator", e.what());
  }
  if (pairs.empty()) throw ConfigError("pairs", "at least one qubit pair is required");
  std::set<std::pair<int, int>> seen;
  for (const auto& p : pairs) {
    try {
      p.validate(params.n_max);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("pairs", e.what());
    }
    if (!seen.insert({p.low, p.high}).second) {
      throw ConfigError("pairs", "pair " + p.label() + " listed twice");
    }
  }
  if (!(events.zero_threshold > 0.0)) throw ConfigError("zero_threshold", "must be > 0");
  if (events.min_dead_samples < 1) throw ConfigError("min_dead_samples", "must be >= 1");
  if (!(events.sustained_duration >= 0.0)) throw ConfigError("sustained_duration", "must be >= 0");
  if (!(refine_to >= 0.0)) throw ConfigError("refine_to", "must be >= 0");
  if (!(asymptote_window > 0.0)) throw ConfigError("asymptote_window", "must be > 0");
  if (positivity_check_every < 1) throw ConfigError("positivity_check_every", "must be >= 1");

  switch (kind) {
    case ScenarioKind::GammaSweep:
      require_sorted_grid("gamma_grid", gamma_grid, true);
      if (gamma_grid.size() < 2) throw ConfigError("gamma_grid", "needs at least 2 points");
      if (!nbar_grid.empty()) throw ConfigError("nbar_grid", "not used by gamma-sweep");
      break;
    case ScenarioKind::NbarSweep:
      require_sorted_grid("nbar_grid", nbar_grid, true);
      if (!gamma_grid.empty()) throw ConfigError("gamma_grid", "not used by nbar-sweep");
      break;
    default:
      if (!gamma_grid.empty() || !nbar_grid.empty()) {
        throw ConfigError(gamma_grid.empty() ? "nbar_grid" : "gamma_grid",
                          "grids are only used by sweep scenarios");
      }
      if (!extra_runs.empty()) throw ConfigError("extra_runs", "only used by sweep scenarios");
      break;
  }
  for (const auto& r : extra_runs) {
    if (!(r.gamma >= 0.0) || !(r.nbar >= 0.0)) {
      throw ConfigError("extra_runs", "gamma and nbar must be >= 0");
    }
  }
  if (kind == ScenarioKind::AnalyticCompare) {
    if (params.g.imag() != 0.0 || !(params.g.real() > 0.0)) {
      throw ConfigError("g", "analytic-compare needs real g > 0");
    }
    if (params.gamma_a != 0.0 || params.gamma_b != 0.0) {
      throw ConfigError("gamma", "analytic-compare is undamped");
    }
  }
  if ((kind == ScenarioKind::Closed) &&
      (params.gamma_a != 0.0 || params.gamma_b != 0.0 || params.nbar_a != 0.0 ||
       params.nbar_b != 0.0)) {
    throw ConfigError("gamma", "closed scenarios take no damping; use 'open'");
  }
}

std::vector<RunPoint> ScenarioConfig::runs() const {
  std::vector<RunPoint> out;
  if (kind == ScenarioKind::GammaSweep) {
    for (double g : gamma_grid) out.push_back({g, params.nbar_a});
  } else if (kind == ScenarioKind::NbarSweep) {
    for (double n : nbar_grid) out.push_back({params.gamma_a, n});
  }
  out.insert(out.end(), extra_runs.begin(), extra_runs.end());
  return out;
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  using Setter = std::function<void(ScenarioConfig&, const std::string&, int)>;
  const std::map<std::string, Setter> setters{
      {"scenario", [](auto& c, const auto& v, int) { c.kind = parse_scenario_kind(v); }},
      {"name", [](auto& c, const auto& v, int) { c.name = v; }},
      {"chi_a", [](auto& c, const auto& v, int l) { c.params.chi_a = parse_double("chi_a", v, l); }},
      {"chi_b", [](auto& c, const auto& v, int l) { c.params.chi_b = parse_double("chi_b", v, l); }},
      {"g", [](auto& c, const auto& v, int l) {
         c.params.g = Complex(parse_double("g", v, l), c.params.g.imag());
       }},
      {"g_imag", [](auto& c, const auto& v, int l) {
         c.params.g = Complex(c.params.g.real(), parse_double("g_imag", v, l));
       }},
      {"gamma", [](auto& c, const auto& v, int l) {
         c.params.gamma_a = c.params.gamma_b = parse_double("gamma", v, l);
       }},
      {"gamma_a", [](auto& c, const auto& v, int l) { c.params.gamma_a = parse_double("gamma_a", v, l); }},
      {"gamma_b", [](auto& c, const auto& v, int l) { c.params.gamma_b = parse_double("gamma_b", v, l); }},
      {"nbar", [](auto& c, const auto& v, int l) {
         c.params.nbar_a = c.params.nbar_b = parse_double("nbar", v, l);
       }},
      {"nbar_a", [](auto& c, const auto& v, int l) { c.params.nbar_a = parse_double("nbar_a", v, l); }},
      {"nbar_b", [](auto& c, const auto& v, int l) { c.params.nbar_b = parse_double("nbar_b", v, l); }},
      {"n_max", [](auto& c, const auto& v, int l) { c.params.n_max = parse_int("n_max", v, l); }},
      {"dt", [](auto& c, const auto& v, int l) { c.integ.dt = parse_double("dt", v, l); }},
      {"t_end", [](auto& c, const auto& v, int l) { c.integ.t_end = parse_double("t_end", v, l); }},
      {"sample_every", [](auto& c, const auto& v, int l) {
         c.integ.sample_every = parse_int("sample_every", v, l);
       }},
      {"pairs", [](auto& c, const auto& v, int l) {
         c.pairs.clear();
         for (const auto& item : split(v, ", ")) {
           try {
             c.pairs.push_back(parse_qubit_pair(item));
           } catch (const std::invalid_argument& e) {
             throw ConfigError("pairs", e.what(), l);
           }
         }
       }},
      {"gamma_grid", [](auto& c, const auto& v, int l) { c.gamma_grid = parse_grid("gamma_grid", v, l); }},
      {"nbar_grid", [](auto& c, const auto& v, int l) { c.nbar_grid = parse_grid("nbar_grid", v, l); }},
      {"extra_runs", [](auto& c, const auto& v, int l) {
         c.extra_runs.clear();
         for (const auto& item : split(v, ", ;")) {
           const auto parts = split(item, ":");
           if (parts.size() != 2) {
             throw ConfigError("extra_runs", "'" + item + "' is not gamma:nbar", l);
           }
           c.extra_runs.push_back({parse_double("extra_runs", parts[0], l),
                                   parse_double("extra_runs", parts[1], l)});
         }
       }},
      {"with_R", [](auto& c, const auto& v, int l) { c.with_csi = parse_bool("with_R", v, l); }},
      {"with_border", [](auto& c, const auto& v, int l) { c.with_border = parse_bool("with_border", v, l); }},
      {"zero_threshold", [](auto& c, const auto& v, int l) {
         c.events.zero_threshold = parse_double("zero_threshold", v, l);
       }},
      {"min_dead_samples", [](auto& c, const auto& v, int l) {
         c.events.min_dead_samples = parse_int("min_dead_samples", v, l);
       }},
      {"sustained_duration", [](auto& c, const auto& v, int l) {
         c.events.sustained_duration = parse_double("sustained_duration", v, l);
       }},
      {"refine_to", [](auto& c, const auto& v, int l) { c.refine_to = parse_double("refine_to", v, l); }},
      {"asymptote_window", [](auto& c, const auto& v, int l) {
         c.asymptote_window = parse_double("asymptote_window", v, l);
       }},
      {"positivity_check_every", [](auto& c, const auto& v, int l) {
         c.positivity_check_every = parse_int("positivity_check_every", v, l);
       }},
  };

  std::map<std::string, int> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line, "expected 'key = value'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(key, "unknown key", line_no);
    if (seen.count(key)) {
      throw ConfigError(key, "repeated (first set on line " + std::to_string(seen[key]) + ")",
                        line_no);
    }
    if (value.empty()) throw ConfigError(key, "missing value", line_no);
    seen[key] = line_no;
    try {
      it->second(cfg, value, line_no);
    } catch (const ConfigError& e) {
      if (e.line() == 0) throw ConfigError(e.field(), e.what(), line_no);
      throw;
    }
  }
  for (const auto& [shared, a, b] : {std::tuple{"gamma", "gamma_a", "gamma_b"},
                                     std::tuple{"nbar", "nbar_a", "nbar_b"}}) {
    if (seen.count(shared) && (seen.count(a) || seen.count(b))) {
      throw ConfigError(shared, std::string("conflicts with ") + (seen.count(a) ? a : b),
                        seen[shared]);
    }
  }
  if (!seen.count("scenario")) throw ConfigError("scenario", "missing");
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  return parse_config(in);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::embedded_presets()) out.push_back(name);
  return out;
}

const std::string& preset_text(const std::string& name) {
  for (const auto& [n, text] : detail::embedded_presets()) {
    if (n == name) return text;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("preset", "unknown preset '" + name + "' (known: " + known + ")");
}

ScenarioConfig load_preset(const std::string& name) { return parse_config_text(preset_text(name)); }

std::string format_config(const ScenarioConfig& cfg) {
  std::ostringstream s;
  auto grid = [](const std::vector<double>& g) {
    std::string out;
    for (double v : g) out += (out.empty() ? "" : ", ") + shortest(v);
    return out;
  };
  s << "scenario = " << to_string(cfg.kind) << "\n";
  s << "name = " << cfg.name << "\n";
  s << "chi_a = " << shortest(cfg.params.chi_a) << "\n";
  s << "chi_b = " << shortest(cfg.params.chi_b) << "\n";
  s << "g = " << shortest(cfg.params.g.real()) << "\n";
  s << "g_imag = " << shortest(cfg.params.g.imag()) << "\n";
  s << "gamma_a = " << shortest(cfg.params.gamma_a) << "\n";
  s << "gamma_b = " << shortest(cfg.params.gamma_b) << "\n";
  s << "nbar_a = " << shortest(cfg.params.nbar_a) << "\n";
  s << "nbar_b = " << shortest(cfg.params.nbar_b) << "\n";
  s << "n_max = " << cfg.params.n_max << "\n";
  s << "dt = " << shortest(cfg.integ.dt) << "\n";
  s << "t_end = " << shortest(cfg.integ.t_end) << "\n";
  s << "sample_every = " << cfg.integ.sample_every << "\n";
  std::string pairs;
  for (const auto& p : cfg.pairs) pairs += (pairs.empty() ? "" : ", ") + p.label();
  s << "pairs = " << pairs << "\n";
  if (!cfg.gamma_grid.empty()) s << "gamma_grid = " << grid(cfg.gamma_grid) << "\n";
  if (!cfg.nbar_grid.empty()) s << "nbar_grid = " << grid(cfg.nbar_grid) << "\n";
  if (!cfg.extra_runs.empty()) {
    std::string runs;
    for (const auto& r : cfg.extra_runs)
      runs += (runs.empty() ? "" : "; ") + shortest(r.gamma) + ":" + shortest(r.nbar);
    s << "extra_runs = " << runs << "\n";
  }
  s << "with_R = " << (cfg.with_csi ? "true" : "false") << "\n";
  s << "with_border = " << (cfg.with_border ? "true" : "false") << "\n";
  s << "zero_threshold = " << shortest(cfg.events.zero_threshold) << "\n";
  s << "min_dead_samples = " << cfg.events.min_dead_samples << "\n";
  s << "sustained_duration = " << shortest(cfg.events.sustained_duration) << "\n";
  s << "refine_to = " << shortest(cfg.refine_to) << "\n";
  s << "asymptote_window = " << shortest(cfg.asymptote_window) << "\n";
  s << "positivity_check_every = " << cfg.positivity_check_every << "\n";
  return s.str();
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir,
                            int workers, std::ostream* log) {
  cfg.validate();
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  std::filesystem::create_directories(out_dir);

  ScenarioResult out;
  out.sidecar["scenario"] = to_string(cfg.kind);
  out.sidecar["name"] = cfg.name;
  out.sidecar["config"] = format_config(cfg);
  out.sidecar["params"] = params_json(cfg.params);
  out.sidecar["integrator"] = integrator_json(cfg.integ);
  out.sidecar["tolerances"] = tolerances_json(cfg);
  json pairs = json::array();
  for (const auto& p : cfg.pairs) pairs.push_back(p.label());
  out.sidecar["pairs"] = pairs;

  switch (cfg.kind) {
    case ScenarioKind::Closed:
      run_closed(cfg, out_dir, out);
      break;
    case ScenarioKind::AnalyticCompare:
      run_analytic_compare(cfg, out_dir, out);
      break;
    case ScenarioKind::Open:
      run_open(cfg, out_dir, out);
      break;
    case ScenarioKind::GammaSweep:
    case ScenarioKind::NbarSweep:
      run_sweep(cfg, out_dir, workers, log, out);
      break;
  }

  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.filename().string());
  out.sidecar["outputs"] = files;

  const auto sidecar_path = out_dir / (cfg.name + ".json");
  std::ofstream js(sidecar_path, std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + sidecar_path.string());
  js << out.sidecar.dump(2) << "\n";
  out.files.push_back(sidecar_path);
  return out;
}

}  // namespace kerrpdc

// Figure-regression and invariant acceptance suite. Prints one PASS/FAIL line
// per criterion followed by the measured values behind it.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kerrpdc/closed_dynamics.hpp"
#include "kerrpdc/entanglement.hpp"
#include "kerrpdc/open_dynamics.hpp"
#include "kerrpdc/scenario.hpp"
#include "kerrpdc/sweep.hpp"
#include "kerrpdc/three_state.hpp"
#include "oracles.hpp"

using namespace kerrpdc;

namespace tol {
// 1: three-level approximation
constexpr double kFidelityDeficit = 5e-4;
constexpr double kAmplitudeAgreement = 1e-3;
// 2: Bell-state generation
constexpr double kBellNegativity = 0.99;
constexpr double kBellFidelity = 0.99;
constexpr double kN0220Lo = 0.10, kN0220Hi = 0.25;
constexpr double kN1221Lo = 0.20, kN1221Hi = 0.40;
// 3: zero-temperature asymptotics
constexpr double kN1221Target = 0.054, kN1221Tol = 0.011;
constexpr double kN0220Target = 0.035, kN0220Tol = 0.007;
constexpr double kAcrossGammaRel = 0.05;
constexpr double kTailWindow = 50.0;
constexpr double kStepHalvingRel = 1e-3;
// 4: sudden death / birth
constexpr double kDeathRatioLo = 1.6, kDeathRatioHi = 2.4;
constexpr double kCrossingSteps = 2.0;
constexpr std::size_t kMinGridPoints = 8;
// 5: thermal degradation
constexpr int kMinCycles = 2;
// 7: invariants
constexpr double kNormDrift = 1e-6;
constexpr double kTraceDrift = 1e-6;
constexpr double kHermiticityPerStep = 1e-10;
constexpr double kXFormAgreement = 1e-10;
constexpr double kExponentAgreement = 1e-10;
constexpr double kThermalRatio = 1e-4;
constexpr double kOrderLo = 3.6, kOrderHi = 4.4;
}  // namespace tol

namespace {

struct Check {
  std::string what;
  bool pass = true;
  std::string detail;
  bool info = false;  ///< reported only, does not decide the criterion
};

class Criterion {
 public:
  void check(std::string what, bool pass, std::string detail) {
    checks_.push_back({std::move(what), pass, std::move(detail), false});
  }
  void note(std::string what, std::string detail) {
    checks_.push_back({std::move(what), true, std::move(detail), true});
  }
  [[nodiscard]] bool pass() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }
  [[nodiscard]] const std::vector<Check>& checks() const { return checks_; }

 private:
  std::vector<Check> checks_;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "none"; }

IntegratorConfig integ(double dt, double t_end, int sample_every) {
  IntegratorConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.sample_every = sample_every;
  return c;
}

SystemParams pumped(double g, double gamma = 0.0, double nbar = 0.0, int n_max = 10) {
  SystemParams p;
  p.g = g;
  p.gamma_a = p.gamma_b = gamma;
  p.nbar_a = p.nbar_b = nbar;
  p.n_max = n_max;
  return p;
}

constexpr QubitPair k01{0, 1}, k02{0, 2}, k12{1, 2};

// ---------------------------------------------------------------------------

struct FidelityScan {
  double max_deficit = 0.0;
  double t_at_max = 0.0;
  double max_amplitude_gap = 0.0;
};

FidelityScan scan_three_level(double g, int n_max, double dt, double t_end) {
  const SystemParams p = pumped(g, 0.0, 0.0, n_max);
  SystemParams three = p;
  three.n_max = 2;
  const auto sol = solve_three_state(three);
  FidelityScan out;
  const int every = static_cast<int>(std::lround(0.05 / dt));
  (void)evolve_closed(make_vacuum_state(p), p, integ(dt, t_end, every),
                      [&](const SampleContext<TwoModeAmplitudes>& ctx) {
                        const double f =
                            fidelity(three_state_amplitudes(sol, ctx.t, n_max), ctx.state);
                        if (1.0 - f > out.max_deficit) {
                          out.max_deficit = 1.0 - f;
                          out.t_at_max = ctx.t;
                        }
                        const auto c = eval_three_state(sol, ctx.t);
                        for (int i = 0; i < 3; ++i)
                          out.max_amplitude_gap = std::max(
                              out.max_amplitude_gap,
                              std::abs(c[static_cast<std::size_t>(i)] - ctx.state(i, i)));
                      });
  return out;
}

Criterion criterion1() {
  Criterion c;
  const auto base = scan_three_level(0.15, 10, 1e-3, 50.0);
  c.check("max_t 1-F over [0,50] (n_max=10, dt=1e-3)", base.max_deficit <= tol::kFidelityDeficit,
          fmt(base.max_deficit) + " at t=" + fmt(base.t_at_max) + " (bound " +
              fmt(tol::kFidelityDeficit) + ")");
  c.note("max_t 1-sqrt(F)", fmt(1.0 - std::sqrt(1.0 - base.max_deficit)));
  c.check("max_t |c_ii(three-level) - c_ii(full)|",
          base.max_amplitude_gap <= tol::kAmplitudeAgreement,
          fmt(base.max_amplitude_gap) + " (bound " + fmt(tol::kAmplitudeAgreement) + ")");
  const auto fine = scan_three_level(0.15, 10, 5e-4, 50.0);
  c.note("same scan at dt=5e-4", fmt(fine.max_deficit));
  const auto wide = scan_three_level(0.15, 14, 1e-3, 50.0);
  c.note("same scan at n_max=14", fmt(wide.max_deficit));
  return c;
}

// ---------------------------------------------------------------------------

Criterion criterion2() {
  Criterion c;
  const auto cfg = load_preset("fig2");
  double best = -1.0, best_t = 0.0;
  TwoModeAmplitudes at_best(cfg.params.n_max);
  double max02 = 0.0, max12 = 0.0;
  (void)evolve_closed(make_vacuum_state(cfg.params), cfg.params, cfg.integ,
                      [&](const SampleContext<TwoModeAmplitudes>& ctx) {
                        const auto rho = amplitudes_to_density(ctx.state);
                        const double n01 = negativity(project_qubit_pair(rho, k01));
                        max02 = std::max(max02, negativity(project_qubit_pair(rho, k02)));
                        max12 = std::max(max12, negativity(project_qubit_pair(rho, k12)));
                        if (n01 > best) {
                          best = n01;
                          best_t = ctx.t;
                          at_best = ctx.state;
                        }
                      });
  c.check("max_t N_0110", best >= tol::kBellNegativity, fmt(best) + " at t=" + fmt(best_t));

  double bell = 0.0;
  std::string which;
  for (const double sign : {1.0, -1.0}) {
    TwoModeAmplitudes b(cfg.params.n_max);
    b(0, 0) = 1.0 / std::sqrt(2.0);
    b(1, 1) = Complex(0.0, sign / std::sqrt(2.0));
    const double f = fidelity(b, at_best);
    if (f > bell) {
      bell = f;
      which = sign > 0 ? "(|00>+i|11>)/sqrt2" : "(|00>-i|11>)/sqrt2";
    }
  }
  c.check("fidelity with Bell state at that instant", bell >= tol::kBellFidelity,
          fmt(bell) + " with " + which);
  const double a0 = std::abs(at_best(0, 0)), a1 = std::abs(at_best(1, 1));
  c.note("relative phase arg(c11/c00) / pi",
         fmt(std::arg(at_best(1, 1) / at_best(0, 0)) / M_PI, 4) +
             "; overlap with the best-phased (|00> + e^{i phi}|11>)/sqrt2: " +
             fmt(0.5 * (a0 + a1) * (a0 + a1)));
  c.check("N_0220 oscillation amplitude", max02 >= tol::kN0220Lo && max02 <= tol::kN0220Hi,
          fmt(max02) + " in [" + fmt(tol::kN0220Lo) + ", " + fmt(tol::kN0220Hi) + "]");
  c.check("N_1221 oscillation amplitude", max12 >= tol::kN1221Lo && max12 <= tol::kN1221Hi,
          fmt(max12) + " in [" + fmt(tol::kN1221Lo) + ", " + fmt(tol::kN1221Hi) + "]");
  return c;
}

// ---------------------------------------------------------------------------

struct LongTime {
  double raw12 = 0.0, raw02 = 0.0;
  double ren12 = 0.0, ren02 = 0.0;
  std::vector<EntanglementEvent> events02;
  OpenRunReport report;
};

LongTime long_time_values(double gamma, double dt) {
  const SystemParams p = pumped(0.6, gamma);
  const double t_end = 7.5 / gamma;
  const int every = static_cast<int>(std::lround(0.05 / dt));
  SeriesRecorder rec({k02, k12}, RecorderOptions{false, 1e-3});
  LongTime out;
  int tail = 0;
  out.report = evolve_open(amplitudes_to_density(make_vacuum_state(p)), p, integ(dt, t_end, every),
                           [&](const SampleContext<TwoModeDensityMatrix>& ctx) {
                             rec(ctx);
                             if (ctx.t < t_end - tol::kTailWindow) return;
                             ++tail;
                             out.raw12 += negativity(project_qubit_pair(ctx.state, k12));
                             out.raw02 += negativity(project_qubit_pair(ctx.state, k02));
                             out.ren12 += negativity(
                                 project_qubit_pair(ctx.state, k12, ProjectionNorm::Renormalized));
                             out.ren02 += negativity(
                                 project_qubit_pair(ctx.state, k02, ProjectionNorm::Renormalized));
                           });
  out.raw12 /= tail;
  out.raw02 /= tail;
  out.ren12 /= tail;
  out.ren02 /= tail;
  out.events02 = sustained_only(detect_events(rec.series(), k02));
  return out;
}

Criterion criterion3() {
  Criterion c;
  const std::vector<double> gammas{0.0025, 0.005, 0.01};
  std::vector<LongTime> runs;
  for (double g : gammas) runs.push_back(long_time_values(g, 0.01));

  auto within = [](double v, double target, double tol) { return std::abs(v - target) <= tol; };
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    return (*hi - *lo) / mean;
  };

  struct Convention {
    const char* name;
    std::vector<double> n12, n02;
  };
  Convention raw{"raw projection", {}, {}}, ren{"renormalized projection", {}, {}};
  for (const auto& r : runs) {
    raw.n12.push_back(r.raw12);
    raw.n02.push_back(r.raw02);
    ren.n12.push_back(r.ren12);
    ren.n02.push_back(r.ren02);
  }
  auto hits = [&](const Convention& conv) {
    bool ok = spread(conv.n12) <= tol::kAcrossGammaRel;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      ok = ok && within(conv.n12[i], tol::kN1221Target, tol::kN1221Tol) &&
           within(conv.n02[i], tol::kN0220Target, tol::kN0220Tol);
    }
    return ok;
  };
  for (const Convention* conv : {&raw, &ren}) {
    std::string d12, d02;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      d12 += (i ? ", " : "") + fmt(conv->n12[i], 4);
      d02 += (i ? ", " : "") + fmt(conv->n02[i], 4);
    }
    c.note(std::string(conv->name) + " N_1221 / N_0220 at t=7.5/gamma for gamma=0.0025,0.005,0.01",
           d12 + " / " + d02 + (hits(*conv) ? "  -> on target" : "  -> off target"));
  }

  // The library default (raw) is what the rest of the pipeline reports.
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    c.check("N_1221 long-time, gamma=" + fmt(gammas[i]),
            within(raw.n12[i], tol::kN1221Target, tol::kN1221Tol),
            fmt(raw.n12[i]) + " vs " + fmt(tol::kN1221Target) + " +- " + fmt(tol::kN1221Tol));
    bool reborn = false;
    for (const auto& e : runs[i].events02)
      reborn = reborn || (e.kind == EventKind::SuddenBirth && e.t < 7.5 / gammas[i] - tol::kTailWindow);
    c.check("N_0220 post-rebirth, gamma=" + fmt(gammas[i]),
            reborn && within(raw.n02[i], tol::kN0220Target, tol::kN0220Tol),
            fmt(raw.n02[i]) + " vs " + fmt(tol::kN0220Target) + " +- " + fmt(tol::kN0220Tol) +
                (reborn ? " (after a sustained birth)" : " (no sustained birth seen)"));
  }
  c.check("N_1221 identical across gamma", spread(raw.n12) <= tol::kAcrossGammaRel,
          "relative spread " + fmt(spread(raw.n12)) + " (bound " + fmt(tol::kAcrossGammaRel) + ")");

  const auto halved = long_time_values(0.01, 0.005);
  const double rel = std::abs(halved.raw12 - runs.back().raw12) / runs.back().raw12;
  c.check("gamma=0.01 value stable under dt 0.01 -> 0.005", rel <= tol::kStepHalvingRel, fmt(rel));
  double drift = 0.0;
  for (const auto& r : runs) drift = std::max(drift, r.report.max_trace_drift);
  c.note("max trace drift", fmt(drift));
  return c;
}

// ---------------------------------------------------------------------------

struct Crossing {
  double t;
  bool to_separable;
};

// Sign changes of coherence - population, linearly interpolated.
std::vector<Crossing> border_crossings(const TimeSeries& s, QubitPair pair) {
  const auto& tr = s.track(pair);
  std::vector<Crossing> out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double d0 = tr.coherence_product[i - 1] - tr.population_product[i - 1];
    const double d1 = tr.coherence_product[i] - tr.population_product[i];
    if ((d0 > 0.0) == (d1 > 0.0)) continue;
    const double f = d0 / (d0 - d1);
    out.push_back({s.t[i - 1] + f * (s.t[i] - s.t[i - 1]), d0 > 0.0});
  }
  return out;
}

// Sample brackets where the negativity leaves or reaches zero.
std::vector<Crossing> negativity_crossings(const TimeSeries& s, QubitPair pair) {
  const auto& n = s.track(pair).negativity;
  std::vector<Crossing> out;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if ((n[i - 1] > 0.0) == (n[i] > 0.0)) continue;
    out.push_back({0.5 * (s.t[i - 1] + s.t[i]), n[i - 1] > 0.0});
  }
  return out;
}

// Largest distance from any crossing in `a` to the nearest same-direction crossing in `b`.
double worst_match(const std::vector<Crossing>& a, const std::vector<Crossing>& b) {
  double worst = 0.0;
  for (const auto& x : a) {
    double best = 1e300;
    for (const auto& y : b)
      if (y.to_separable == x.to_separable) best = std::min(best, std::abs(x.t - y.t));
    worst = std::max(worst, best);
  }
  return worst;
}

Criterion criterion4() {
  Criterion c;
  const auto fig6 = load_preset("fig6");
  RecorderOptions rec;
  rec.record_csi = false;
  const auto run = run_open_series(fig6.params, fig6.integ, {k01, k02}, rec);
  const auto ev01 = sustained_only(detect_events(run.series, k01, fig6.events));
  const auto ev02 = sustained_only(detect_events(run.series, k02, fig6.events));
  auto count = [](const std::vector<EntanglementEvent>& ev, EventKind k) {
    return std::count_if(ev.begin(), ev.end(), [k](const auto& e) { return e.kind == k; });
  };
  auto first = [](const std::vector<EntanglementEvent>& ev, EventKind k) -> std::optional<double> {
    for (const auto& e : ev)
      if (e.kind == k) return e.t;
    return std::nullopt;
  };
  const auto d01 = first(ev01, EventKind::SuddenDeath);
  const auto d02 = first(ev02, EventKind::SuddenDeath);
  const auto b02 = first(ev02, EventKind::SuddenBirth);
  c.check("pair 01: one sustained death, no rebirth (gamma=0.01, t<=500)",
          count(ev01, EventKind::SuddenDeath) == 1 && count(ev01, EventKind::SuddenBirth) == 0 &&
              ev01.front().reaches_end,
          std::to_string(count(ev01, EventKind::SuddenDeath)) + " death at t=" + fmt(d01) + ", " +
              std::to_string(count(ev01, EventKind::SuddenBirth)) + " births");
  c.check("pair 02: one sustained death and one birth",
          count(ev02, EventKind::SuddenDeath) == 1 && count(ev02, EventKind::SuddenBirth) == 1,
          "death t=" + fmt(d02) + ", birth t=" + fmt(b02));
  const double ratio = (d01 && d02) ? *d02 / *d01 : 0.0;
  c.check("t_death(02) / t_death(01)", ratio >= tol::kDeathRatioLo && ratio <= tol::kDeathRatioHi,
          fmt(ratio) + " in [" + fmt(tol::kDeathRatioLo) + ", " + fmt(tol::kDeathRatioHi) + "]");

  const double step = fig6.integ.sample_interval();
  for (const QubitPair pair : {k01, k02}) {
    const auto fg = border_crossings(run.series, pair);
    const auto nz = negativity_crossings(run.series, pair);
    const double w = std::max(worst_match(fg, nz), worst_match(nz, fg));
    const auto ev = pair == k01 ? ev01 : ev02;
    std::vector<Crossing> evc;
    for (const auto& e : ev) evc.push_back({e.t, e.kind == EventKind::SuddenDeath});
    const double we = worst_match(evc, fg);
    c.check("pair " + pair.label() + ": F/G crossings vs negativity zero-crossings",
            !fg.empty() && fg.size() == nz.size() && w <= tol::kCrossingSteps * step &&
                we <= tol::kCrossingSteps * step,
            std::to_string(fg.size()) + " F/G and " + std::to_string(nz.size()) +
                " negativity crossings, worst offset " + fmt(w / step) +
                " steps; sustained events within " + fmt(we / step) + " steps");
  }

  const auto fig5 = load_preset("fig5");
  const auto sweep =
      sweep_gamma_boundaries(fig5.params, fig5.gamma_grid, fig5.pairs, fig5.integ, fig5.events);
  bool monotone01 = true, monotone02 = true, complete = true;
  std::string table;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& b01 = sweep[i].boundary(k01);
    const auto& b02 = sweep[i].boundary(k02);
    complete = complete && !b01.deaths.empty() && !b02.deaths.empty() && !b02.births.empty();
    table += (i ? "; " : "") + fmt(sweep[i].gamma) + ":" +
             (b01.deaths.empty() ? "-" : fmt(b01.deaths.front(), 5)) + "/" +
             (b02.deaths.empty() ? "-" : fmt(b02.deaths.front(), 5)) + "/" +
             (b02.births.empty() ? "-" : fmt(b02.births.front(), 5));
    if (i == 0 || !complete) continue;
    const auto& p01 = sweep[i - 1].boundary(k01);
    const auto& p02 = sweep[i - 1].boundary(k02);
    monotone01 = monotone01 && b01.deaths.front() < p01.deaths.front();
    monotone02 = monotone02 && b02.deaths.front() < p02.deaths.front();
  }
  c.check("death times strictly decrease over " + std::to_string(sweep.size()) + " gammas",
          sweep.size() >= tol::kMinGridPoints && complete && monotone01 && monotone02,
          "gamma:t_death01/t_death02/t_birth02 = " + table);
  return c;
}

// ---------------------------------------------------------------------------

Criterion criterion5() {
  Criterion c;
  const auto fig7 = load_preset("fig7");
  std::vector<SystemParams> params;
  for (const auto& pt : fig7.runs()) params.push_back(pumped(0.6, pt.gamma, pt.nbar));
  RecorderOptions rec;
  rec.record_csi = false;
  const auto runs = run_open_batch(params, fig7.integ, {k12}, rec);
  std::vector<double> asym;
  std::string detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    asym.push_back(tail_mean(runs[i].series.t, runs[i].series.track(k12).negativity,
                             fig7.asymptote_window));
    detail += (i ? ", " : "") + fmt(params[i].nbar_a) + ":" + fmt(asym.back(), 4);
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < asym.size(); ++i) decreasing = decreasing && asym[i] < asym[i - 1];
  c.check("asymptotic N_1221 strictly decreases with nbar (mean of last " +
              fmt(fig7.asymptote_window) + ")",
          decreasing, detail);
  const auto events = detect_events(runs.back().series, k12, fig7.events);
  const auto births = std::count_if(events.begin(), events.end(),
                                    [](const auto& e) { return e.kind == EventKind::SuddenBirth; });
  c.check("nbar=0.3 death-birth cycles of N_1221 (dead >= " +
              std::to_string(fig7.events.min_dead_samples) + " samples)",
          births >= tol::kMinCycles, std::to_string(births) + " cycles");
  return c;
}

// ---------------------------------------------------------------------------

Criterion criterion6() {
  Criterion c;
  const auto fig3 = load_preset("fig3");
  const auto closed = run_closed_series(fig3.params, fig3.integ, {k12});
  const auto range = csi_range(closed.series);
  c.check("undamped g=0.6: R > 1 at every defined sample", range.min && *range.min > 1.0,
          "min R " + fmt(range.min) + ", " + std::to_string(range.undefined) + " undefined of " +
              std::to_string(closed.series.size()));

  const auto fig8 = load_preset("fig8");
  std::vector<SystemParams> params;
  const auto points = fig8.runs();
  for (const auto& pt : points) params.push_back(pumped(0.6, pt.gamma, pt.nbar));
  const auto runs = run_open_batch(params, fig8.integ, {k12});
  std::vector<std::optional<double>> crossing;
  std::string detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto t = first_csi_below(runs[i].series);
    if (points[i].nbar > 0.0) {
      crossing.push_back(t);
      detail += (detail.empty() ? "" : ", ") + fmt(points[i].gamma) + ":" + fmt(t);
    } else {
      c.note("nbar=0, gamma=" + fmt(points[i].gamma) + " reference",
             "min R " + fmt(csi_range(runs[i].series).min) + ", first R<1 at " + fmt(t));
    }
  }
  bool all = std::all_of(crossing.begin(), crossing.end(), [](const auto& t) { return t.has_value(); });
  c.check("nbar=0.4: R drops below 1 in finite time", all, "gamma:t = " + detail);
  bool monotone = all;
  for (std::size_t i = 1; all && i < crossing.size(); ++i)
    monotone = monotone && *crossing[i] < *crossing[i - 1];
  c.check("crossing time decreases with gamma", monotone, detail);
  return c;
}

// ---------------------------------------------------------------------------

Criterion criterion7() {
  Criterion c;
  {
    const auto p = pumped(0.6);
    const auto r = evolve_closed(make_vacuum_state(p), p, integ(1e-3, 100.0, 1000), nullptr);
    c.check("closed norm drift, g=0.6, t<=100, dt=1e-3", r.max_norm_drift <= tol::kNormDrift,
            fmt(r.max_norm_drift));
  }
  {
    const auto p = pumped(0.6, 0.01, 0.2);
    const auto r = evolve_open(amplitudes_to_density(make_vacuum_state(p)), p,
                               integ(1e-3, 200.0, 1000), nullptr);
    c.check("open trace drift over [0,200], dt=1e-3", r.max_trace_drift <= tol::kTraceDrift,
            fmt(r.max_trace_drift));
    c.check("open Hermiticity drift per step", r.max_hermiticity_drift <= tol::kHermiticityPerStep,
            fmt(r.max_hermiticity_drift));
  }
  {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      QubitPairReduced red;
      red.m = oracle::random_x_state(rng);
      red.weight = red.m.trace().real();
      worst = std::max(worst, std::abs(negativity(red) - xstate_negativity(red)));
    }
    c.check("dense vs closed-form negativity, 1000 random X matrices",
            worst <= tol::kXFormAgreement, fmt(worst));
  }
  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> G(0.01, 2.0), Chi(0.1, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      SystemParams p = pumped(G(rng), 0.0, 0.0, 2);
      p.chi_a = Chi(rng);
      p.chi_b = Chi(rng);
      const auto sol = solve_three_state(p);
      const auto ref = oracle::three_level_energies(p.g.real(), p.kerr_sum());
      std::array<double, 3> e{};
      for (std::size_t j = 0; j < 3; ++j) e[j] = (Complex(0.0, 1.0) * sol.s[j]).real();
      std::sort(e.begin(), e.end());
      for (std::size_t j = 0; j < 3; ++j) worst = std::max(worst, std::abs(e[j] - ref[j]));
      worst = std::max(worst, sol.exponent_real_part_ratio());
    }
    c.check("three-level exponents vs 3x3 eigensolver, 100 random (g, A)",
            worst <= tol::kExponentAgreement, fmt(worst));
  }
  {
    double worst = 0.0;
    for (double nbar : {0.1, 0.4}) {
      SystemParams p = pumped(0.0, 0.5, nbar, 6);
      p.nbar_b = 2.0 * nbar;
      IntegratorConfig cfg = integ(0.01, 80.0, 8000);
      const auto run = evolve_open(amplitudes_to_density(make_vacuum_state(p)), p, cfg);
      const auto& rho = run.samples.back();
      const double qa = p.nbar_a / (p.nbar_a + 1.0), qb = p.nbar_b / (p.nbar_b + 1.0);
      for (int n = 0; n < p.n_max; ++n) {
        worst = std::max({worst, std::abs(rho.population(n + 1, 0) / rho.population(n, 0) - qa),
                          std::abs(rho.population(0, n + 1) / rho.population(0, n) - qb)});
      }
    }
    c.check("thermal fixed point population ratios", worst <= tol::kThermalRatio, fmt(worst));
  }
  {
    const auto p = pumped(0.6);
    const oracle::Vec exact = oracle::propagate(p, oracle::to_vector(make_vacuum_state(p)), 10.0);
    auto err = [&](double dt) {
      const auto run = evolve_closed(make_vacuum_state(p), p,
                                     integ(dt, 10.0, static_cast<int>(std::lround(10.0 / dt))));
      return (oracle::to_vector(run.samples.back()) - exact).cwiseAbs().maxCoeff();
    };
    const double e1 = err(0.02), e2 = err(0.01), e3 = err(0.005);
    const double o1 = std::log2(e1 / e2), o2 = std::log2(e2 / e3);
    c.check("RK4 order on step halving", o1 >= tol::kOrderLo && o1 <= tol::kOrderHi &&
                                             o2 >= tol::kOrderLo && o2 <= tol::kOrderHi,
            fmt(o1, 4) + ", " + fmt(o2, 4));
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--criterion", only, "run only these criteria (1-7)")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<std::string, std::function<Criterion()>>> all{
      {1, {"three-level approximation, g=0.15", criterion1}},
      {2, {"Bell-state generation, g=0.15", criterion2}},
      {3, {"zero-temperature asymptotics, g=0.6", criterion3}},
      {4, {"sudden death and birth structure, g=0.6", criterion4}},
      {5, {"thermal degradation of N_1221", criterion5}},
      {6, {"Cauchy-Schwarz violation R", criterion6}},
      {7, {"invariant property suite", criterion7}},
  };
  bool ok = true;
  for (const auto& [id, entry] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Criterion result;
    std::string error;
    try {
      result = entry.second();
    } catch (const std::exception& e) {
      result.check("completed without error", false, e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (result.pass() ? "PASS" : "FAIL") << "  criterion " << id << ": " << entry.first
              << " (" << fmt(secs, 3) << " s)\n";
    for (const auto& chk : result.checks()) {
      std::cout << "      " << (chk.info ? "info" : chk.pass ? "ok  " : "FAIL") << "  " << chk.what
                << ": " << chk.detail << "\n";
    }
    std::cout.flush();
    ok = ok && result.pass();
  }
  return ok ? 0 : 1;
}

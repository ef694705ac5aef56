#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kerrpdc/closed_dynamics.hpp"
#include "kerrpdc/entanglement.hpp"
#include "kerrpdc/open_dynamics.hpp"

namespace kerrpdc {

struct ClosedSeriesResult {
  TimeSeries series;
  ClosedRunReport report;
};

struct OpenSeriesResult {
  TimeSeries series;
  OpenRunReport report;
};

/// Vacuum-seeded pure-state run recorded into a TimeSeries.
[[nodiscard]] ClosedSeriesResult run_closed_series(const SystemParams& params,
                                                   const IntegratorConfig& integ,
                                                   const std::vector<QubitPair>& pairs,
                                                   const RecorderOptions& recorder = {});

/// Vacuum-seeded master-equation run recorded into a TimeSeries.
[[nodiscard]] OpenSeriesResult run_open_series(const SystemParams& params,
                                               const IntegratorConfig& integ,
                                               const std::vector<QubitPair>& pairs,
                                               const RecorderOptions& recorder = {},
                                               const OpenOptions& options = {});

/// Runs body(i) for i in [0, count) on up to `workers` threads. Exceptions
/// from any task are rethrown (the first by index) after all tasks finish.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

/// Independent open runs from vacuum, one per parameter set, results in input order.
[[nodiscard]] std::vector<OpenSeriesResult> run_open_batch(
    const std::vector<SystemParams>& params, const IntegratorConfig& integ,
    const std::vector<QubitPair>& pairs, const RecorderOptions& recorder = {},
    const OpenOptions& options = {}, int workers = 1,
    const std::function<void(std::size_t, const OpenSeriesResult&)>& on_run = {});

/// Mean of v over the samples with t >= t.back() - window.
[[nodiscard]] double tail_mean(const std::vector<double>& t, const std::vector<double>& v,
                               double window);

/// First downward crossing of R through `threshold`, linearly interpolated
/// between the two bracketing defined samples. Gaps (undefined R) are skipped.
[[nodiscard]] std::optional<double> first_csi_below(const TimeSeries& series,
                                                    double threshold = 1.0);

struct CsiRange {
  std::optional<double> min;
  std::optional<double> max;
  std::size_t undefined = 0;  ///< samples where R is undefined
};
[[nodiscard]] CsiRange csi_range(const TimeSeries& series);

struct PairBoundary {
  QubitPair pair;
  std::vector<double> deaths;  ///< sustained sudden-death instants
  std::vector<double> births;  ///< sustained sudden-birth instants
};

struct BoundarySample {
  double gamma = 0.0;
  std::vector<PairBoundary> pairs;
  OpenRunReport report;

  [[nodiscard]] const PairBoundary& boundary(QubitPair pair) const;
};

/// For each gamma (gamma_a = gamma_b = gamma) integrates from vacuum and
/// collects the sustained death/birth instants per pair. Results are ordered
/// like `gamma_grid` regardless of worker scheduling. `on_run`, if set, sees
/// every finished run (called from worker threads, serialized).
[[nodiscard]] std::vector<BoundarySample> sweep_gamma_boundaries(
    const SystemParams& base, const std::vector<double>& gamma_grid,
    const std::vector<QubitPair>& pairs, const IntegratorConfig& integ,
    const EventOptions& events = {}, int workers = 1,
    const std::function<void(std::size_t, const OpenSeriesResult&)>& on_run = {});

}  // namespace kerrpdc

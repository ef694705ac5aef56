#include "kerrpdc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace kerrpdc {

ClosedSeriesResult run_closed_series(const SystemParams& params, const IntegratorConfig& integ,
                                     const std::vector<QubitPair>& pairs,
                                     const RecorderOptions& recorder) {
  for (const auto& p : pairs) p.validate(params.n_max);
  SeriesRecorder rec(pairs, recorder);
  ClosedSeriesResult out;
  out.report = evolve_closed(make_vacuum_state(params), params, integ,
                             [&](const SampleContext<TwoModeAmplitudes>& ctx) { rec(ctx); });
  out.series = rec.take();
  return out;
}

OpenSeriesResult run_open_series(const SystemParams& params, const IntegratorConfig& integ,
                                 const std::vector<QubitPair>& pairs,
                                 const RecorderOptions& recorder, const OpenOptions& options) {
  for (const auto& p : pairs) p.validate(params.n_max);
  SeriesRecorder rec(pairs, recorder);
  OpenSeriesResult out;
  const auto rho0 = amplitudes_to_density(make_vacuum_state(params));
  out.report = evolve_open(
      rho0, params, integ, [&](const SampleContext<TwoModeDensityMatrix>& ctx) { rec(ctx); },
      options);
  out.series = rec.take();
  return out;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const auto n_threads = static_cast<std::size_t>(std::clamp<long>(workers, 1, static_cast<long>(count)));
  std::vector<std::exception_ptr> errors(count);
  if (n_threads == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<OpenSeriesResult> run_open_batch(
    const std::vector<SystemParams>& params, const IntegratorConfig& integ,
    const std::vector<QubitPair>& pairs, const RecorderOptions& recorder,
    const OpenOptions& options, int workers,
    const std::function<void(std::size_t, const OpenSeriesResult&)>& on_run) {
  std::vector<OpenSeriesResult> out(params.size());
  std::mutex callback_mutex;
  parallel_for(params.size(), workers, [&](std::size_t i) {
    out[i] = run_open_series(params[i], integ, pairs, recorder, options);
    if (on_run) {
      const std::lock_guard lock(callback_mutex);
      on_run(i, out[i]);
    }
  });
  return out;
}

double tail_mean(const std::vector<double>& t, const std::vector<double>& v, double window) {
  if (t.empty() || t.size() != v.size()) {
    throw std::invalid_argument("tail_mean: empty or mismatched series");
  }
  const double from = t.back() - window;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= from) {
      sum += v[i];
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

std::optional<double> first_csi_below(const TimeSeries& series, double threshold) {
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < series.csi.size(); ++i) {
    if (!series.csi[i]) continue;
    const double r = *series.csi[i];
    if (prev && *series.csi[*prev] >= threshold && r < threshold) {
      const double r0 = *series.csi[*prev];
      const double t0 = series.t[*prev];
      const double t1 = series.t[i];
      return t0 + (t1 - t0) * (r0 - threshold) / (r0 - r);
    }
    prev = i;
  }
  return std::nullopt;
}

CsiRange csi_range(const TimeSeries& series) {
  CsiRange out;
  for (const auto& r : series.csi) {
    if (!r) {
      ++out.undefined;
      continue;
    }
    out.min = out.min ? std::min(*out.min, *r) : *r;
    out.max = out.max ? std::max(*out.max, *r) : *r;
  }
  return out;
}

const PairBoundary& BoundarySample::boundary(QubitPair pair) const {
  for (const auto& b : pairs) {
    if (b.pair == pair) return b;
  }
  throw std::out_of_range("BoundarySample: pair " + pair.label() + " not in sweep");
}

std::vector<BoundarySample> sweep_gamma_boundaries(
    const SystemParams& base, const std::vector<double>& gamma_grid,
    const std::vector<QubitPair>& pairs, const IntegratorConfig& integ, const EventOptions& events,
    int workers, const std::function<void(std::size_t, const OpenSeriesResult&)>& on_run) {
  if (gamma_grid.size() < 2) {
    throw std::invalid_argument("sweep_gamma_boundaries: gamma grid needs at least 2 points");
  }
  if (!std::is_sorted(gamma_grid.begin(), gamma_grid.end())) {
    throw std::invalid_argument("sweep_gamma_boundaries: gamma grid must be sorted");
  }
  std::vector<BoundarySample> out(gamma_grid.size());
  std::mutex callback_mutex;
  RecorderOptions recorder;
  recorder.record_csi = false;

  parallel_for(gamma_grid.size(), workers, [&](std::size_t i) {
    SystemParams p = base;
    p.gamma_a = gamma_grid[i];
    p.gamma_b = gamma_grid[i];
    const OpenSeriesResult run = run_open_series(p, integ, pairs, recorder);
    BoundarySample sample;
    sample.gamma = gamma_grid[i];
    sample.report = run.report;
    for (const auto& pair : pairs) {
      PairBoundary b{pair, {}, {}};
      for (const auto& e : sustained_only(detect_events(run.series, pair, events))) {
        (e.kind == EventKind::SuddenDeath ? b.deaths : b.births).push_back(e.t);
      }
      sample.pairs.push_back(std::move(b));
    }
    out[i] = std::move(sample);
    if (on_run) {
      const std::lock_guard lock(callback_mutex);
      on_run(i, run);
    }
  });
  return out;
}

}  // namespace kerrpdc

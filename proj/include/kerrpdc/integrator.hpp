#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "kerrpdc/fock.hpp"

namespace kerrpdc {

/// Fixed-step fourth-order Runge-Kutta settings. Samples are emitted at
/// t = 0 and every `sample_every` steps; sample times are step * dt, so the
/// sampling grid is exactly reproducible.
struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 50.0;
  int sample_every = 50;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw std::invalid_argument("IntegratorConfig.dt: must be > 0");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
      throw std::invalid_argument("IntegratorConfig.t_end: must be > 0");
    }
    if (sample_every < 1) {
      throw std::invalid_argument("IntegratorConfig.sample_every: must be >= 1");
    }
  }

  [[nodiscard]] long steps() const { return std::lround(t_end / dt); }
  [[nodiscard]] double sample_interval() const { return dt * sample_every; }
};

/// Thrown when a closed evolution loses norm faster than the step tolerance.
class StepSizeError : public std::runtime_error {
 public:
  StepSizeError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  [[nodiscard]] double time() const { return t_; }

 private:
  double t_;
};

/// What an observer sees at each sample point.
///
/// `revisit(tau)` re-integrates from the previous sample (at t_prev) up to any
/// tau in [t_prev, t], which lets observers bisect events between samples
/// without the driver storing the whole trajectory. Empty at the first sample.
template <class State>
struct SampleContext {
  double t;
  const State& state;
  double t_prev;
  std::function<State(double)> revisit;
};

template <class State>
using SampleObserver = std::function<void(const SampleContext<State>&)>;

/// One classical RK4 step, y <- y + dt/6 (k1 + 2k2 + 2k3 + k4).
///
/// `State` exposes data() as a contiguous span of Complex; `rhs(y, dydt)`
/// overwrites dydt. `active` restricts the update to a subset of indices when
/// the generator is known to leave the rest identically zero (empty = all).
template <class State, class Rhs>
class Rk4Stepper {
 public:
  Rk4Stepper(Rhs rhs, const State& shape) : rhs_(std::move(rhs)), k1_(shape), k2_(shape), k3_(shape), k4_(shape), tmp_(shape) {}

  void step(State& y, double dt, std::span<const std::size_t> active = {}) {
    rhs_(y, k1_);
    combine(tmp_, y, k1_, 0.5 * dt, active);
    rhs_(tmp_, k2_);
    combine(tmp_, y, k2_, 0.5 * dt, active);
    rhs_(tmp_, k3_);
    combine(tmp_, y, k3_, dt, active);
    rhs_(tmp_, k4_);

    auto yd = y.data();
    const auto a = k1_.data();
    const auto b = k2_.data();
    const auto c = k3_.data();
    const auto e = k4_.data();
    const double w = dt / 6.0;
    auto update = [&](std::size_t i) { yd[i] += w * (a[i] + 2.0 * (b[i] + c[i]) + e[i]); };
    if (active.empty()) {
      for (std::size_t i = 0; i < yd.size(); ++i) update(i);
    } else {
      for (auto i : active) update(i);
    }
  }

 private:
  static void combine(State& out, const State& y, const State& k, double h,
                      std::span<const std::size_t> active) {
    auto o = out.data();
    const auto yd = y.data();
    const auto kd = k.data();
    if (active.empty()) {
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = yd[i] + h * kd[i];
    } else {
      for (auto i : active) o[i] = yd[i] + h * kd[i];
    }
  }

  Rhs rhs_;
  State k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace kerrpdc

#include "kerrpdc/closed_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kerrpdc {

namespace {

const Complex kI{0.0, 1.0};

struct AmplitudeGenerator {
  SystemParams params;
  std::vector<double> sqrt_table;  // sqrt(j) for j = 0 .. (n_max+1)^2

  explicit AmplitudeGenerator(const SystemParams& p) : params(p) {
    const int d = p.dim();
    sqrt_table.resize(static_cast<std::size_t>(d * d + 1));
    for (std::size_t j = 0; j < sqrt_table.size(); ++j) {
      sqrt_table[j] = std::sqrt(static_cast<double>(j));
    }
  }

  void operator()(const TwoModeAmplitudes& psi, TwoModeAmplitudes& out) const {
    const int d = psi.dim();
    const Complex g = params.g;
    const Complex gc = std::conj(g);
    for (int n = 0; n < d; ++n) {
      for (int m = 0; m < d; ++m) {
        Complex acc = 0.5 * (n * (n - 1) * params.chi_a + m * (m - 1) * params.chi_b) * psi(n, m);
        if (n > 0 && m > 0) {
          acc += g * sqrt_table[static_cast<std::size_t>(n * m)] * psi(n - 1, m - 1);
        }
        if (n + 1 < d && m + 1 < d) {
          acc += gc * sqrt_table[static_cast<std::size_t>((n + 1) * (m + 1))] * psi(n + 1, m + 1);
        }
        out(n, m) = -kI * acc;
      }
    }
  }
};

}  // namespace

void amplitude_rhs(const TwoModeAmplitudes& psi, const SystemParams& params,
                   TwoModeAmplitudes& dpsi) {
  if (dpsi.n_max() != psi.n_max()) {
    dpsi = TwoModeAmplitudes(psi.n_max());
  }
  SystemParams p = params;
  p.n_max = psi.n_max();
  AmplitudeGenerator{p}(psi, dpsi);
}

TwoModeAmplitudes amplitude_rhs(const TwoModeAmplitudes& psi, const SystemParams& params) {
  TwoModeAmplitudes out(psi.n_max());
  amplitude_rhs(psi, params, out);
  return out;
}

ClosedRunReport evolve_closed(const TwoModeAmplitudes& psi0, const SystemParams& params,
                              const IntegratorConfig& integ,
                              const SampleObserver<TwoModeAmplitudes>& observer) {
  params.validate();
  integ.validate();
  if (psi0.n_max() != params.n_max) {
    throw std::invalid_argument("evolve_closed: state truncation differs from params.n_max");
  }
  const double norm0 = psi0.norm_squared();
  if (std::abs(norm0 - 1.0) > kNormTolerance) {
    throw std::invalid_argument("evolve_closed: initial state not normalized");
  }

  const AmplitudeGenerator gen(params);
  Rk4Stepper<TwoModeAmplitudes, const AmplitudeGenerator&> stepper(gen, psi0);

  ClosedRunReport report;
  TwoModeAmplitudes psi = psi0;
  psi.t = 0.0;
  TwoModeAmplitudes prev = psi;
  const long steps = integ.steps();
  const double dt = integ.dt;

  auto note_boundary = [&](const TwoModeAmplitudes& s) {
    const double b = boundary_population(s);
    report.max_boundary_population = std::max(report.max_boundary_population, b);
    report.boundary_warning = report.max_boundary_population > kBoundaryWarn;
  };

  note_boundary(psi);
  if (observer) {
    observer(SampleContext<TwoModeAmplitudes>{0.0, psi, 0.0, {}});
  }

  double norm = norm0;
  for (long s = 1; s <= steps; ++s) {
    stepper.step(psi, dt);
    psi.t = static_cast<double>(s) * dt;
    const double next_norm = psi.norm_squared();
    const double step_drift = std::abs(next_norm - norm);
    report.max_step_norm_drift = std::max(report.max_step_norm_drift, step_drift);
    if (step_drift > kStepNormTolerance) {
      std::ostringstream msg;
      msg << "evolve_closed: norm drift " << step_drift << " in one step at t=" << psi.t
          << " exceeds " << kStepNormTolerance << "; reduce dt";
      throw StepSizeError(msg.str(), psi.t);
    }
    norm = next_norm;
    report.max_norm_drift = std::max(report.max_norm_drift, std::abs(norm - norm0));
    report.steps = s;

    if (s % integ.sample_every == 0) {
      note_boundary(psi);
      if (observer) {
        const double t_prev = prev.t;
        auto revisit = [&, t_prev](double tau) {
          TwoModeAmplitudes y = prev;
          const double span = tau - t_prev;
          if (span <= 0.0) {
            return y;
          }
          const long n = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
          const double h = span / static_cast<double>(n);
          Rk4Stepper<TwoModeAmplitudes, const AmplitudeGenerator&> sub(gen, y);
          for (long i = 0; i < n; ++i) {
            sub.step(y, h);
          }
          y.t = tau;
          return y;
        };
        observer(SampleContext<TwoModeAmplitudes>{psi.t, psi, t_prev, revisit});
      }
      prev = psi;
    }
  }
  return report;
}

ClosedTrajectory evolve_closed(const TwoModeAmplitudes& psi0, const SystemParams& params,
                               const IntegratorConfig& integ) {
  ClosedTrajectory out;
  out.report = evolve_closed(psi0, params, integ,
                             [&](const SampleContext<TwoModeAmplitudes>& ctx) {
                               out.samples.push_back(ctx.state);
                             });
  return out;
}

}  // namespace kerrpdc

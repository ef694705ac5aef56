#pragma once

#include <vector>

#include "kerrpdc/fock.hpp"
#include "kerrpdc/integrator.hpp"

namespace kerrpdc {

/// Schroedinger right-hand side for the pumped Kerr pair:
///   dc_nm/dt = -i [ (n(n-1) chi_a + m(m-1) chi_b)/2 c_nm
///                   + g sqrt(nm) c_{n-1,m-1} + g* sqrt((n+1)(m+1)) c_{n+1,m+1} ]
/// Neighbours outside the truncation are treated as zero.
void amplitude_rhs(const TwoModeAmplitudes& psi, const SystemParams& params,
                   TwoModeAmplitudes& dpsi);
[[nodiscard]] TwoModeAmplitudes amplitude_rhs(const TwoModeAmplitudes& psi,
                                              const SystemParams& params);

/// Drift diagnostics of a closed run. Renormalization is never applied.
struct ClosedRunReport {
  long steps = 0;
  double max_norm_drift = 0.0;          ///< max_t | |c|^2 - |c(0)|^2 |
  double max_step_norm_drift = 0.0;     ///< worst single-step change of |c|^2
  double max_boundary_population = 0.0;
  bool boundary_warning = false;        ///< boundary population exceeded kBoundaryWarn
};

inline constexpr double kStepNormTolerance = 1e-6;
inline constexpr double kBoundaryWarn = 1e-6;

/// Integrates from psi0 and calls `observer` at every sample (including t = 0).
/// Throws StepSizeError if |c|^2 changes by more than kStepNormTolerance in a step.
ClosedRunReport evolve_closed(const TwoModeAmplitudes& psi0, const SystemParams& params,
                              const IntegratorConfig& integ,
                              const SampleObserver<TwoModeAmplitudes>& observer);

/// Convenience overload collecting the sampled trajectory.
struct ClosedTrajectory {
  std::vector<TwoModeAmplitudes> samples;
  ClosedRunReport report;
};
[[nodiscard]] ClosedTrajectory evolve_closed(const TwoModeAmplitudes& psi0,
                                             const SystemParams& params,
                                             const IntegratorConfig& integ);

}  // namespace kerrpdc

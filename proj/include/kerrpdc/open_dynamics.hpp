#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kerrpdc/fock.hpp"
#include "kerrpdc/integrator.hpp"

namespace kerrpdc {

/// Which element-wise generator to evaluate.
enum class DissipatorForm {
  /// -i[H, rho] + sum over modes of gamma (nbar+1) D[a] rho + gamma nbar D[a^dagger] rho,
  /// D[L] rho = L rho L^dagger - {L^dagger L, rho}/2, with truncated ladder operators.
  Standard,
  /// Term-by-term transcription of the printed element equations. Not trace
  /// preserving for nbar > 0; available for comparison only.
  Printed,
};

/// Smallest eigenvalue of rho fell below -kPositivityFailure during a run.
class PositivityError : public std::runtime_error {
 public:
  PositivityError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  [[nodiscard]] double time() const { return t_; }

 private:
  double t_;
};

inline constexpr double kPositivityFailure = 1e-6;

void lindblad_rhs(const TwoModeDensityMatrix& rho, const SystemParams& params,
                  TwoModeDensityMatrix& drho, DissipatorForm form = DissipatorForm::Standard);
[[nodiscard]] TwoModeDensityMatrix lindblad_rhs(const TwoModeDensityMatrix& rho,
                                                const SystemParams& params,
                                                DissipatorForm form = DissipatorForm::Standard);

/// True when every element with n - m != k - l vanishes exactly. Both the
/// Hamiltonian and the dissipators conserve (n - m) - (k - l), so a state in
/// this sector never leaves it (vacuum-seeded runs always qualify).
[[nodiscard]] bool is_pair_balanced(const TwoModeDensityMatrix& rho);

/// Flat indices of the pair-balanced sector for truncation n_max.
[[nodiscard]] std::vector<std::size_t> pair_balanced_indices(int n_max);

struct OpenOptions {
  DissipatorForm form = DissipatorForm::Standard;
  bool enforce_hermiticity = true;
  /// Positivity is checked every this many samples and at the final sample.
  int positivity_check_every = 20;
};

struct OpenRunReport {
  long steps = 0;
  bool pair_balanced = false;          ///< sector-restricted evaluation was used
  double max_trace_drift = 0.0;        ///< max_t |tr rho(t) - tr rho(0)|
  double max_hermiticity_drift = 0.0;  ///< per step, before symmetrization
  double min_eigenvalue = 0.0;         ///< lowest eigenvalue seen at checked samples
  double max_boundary_population = 0.0;
  bool boundary_warning = false;
};

/// Integrates the master equation from rho0, calling `observer` at each sample.
/// Throws PositivityError (with the failing time) if rho loses positivity.
OpenRunReport evolve_open(const TwoModeDensityMatrix& rho0, const SystemParams& params,
                          const IntegratorConfig& integ,
                          const SampleObserver<TwoModeDensityMatrix>& observer,
                          const OpenOptions& options = {});

struct OpenTrajectory {
  std::vector<TwoModeDensityMatrix> samples;
  OpenRunReport report;
};
[[nodiscard]] OpenTrajectory evolve_open(const TwoModeDensityMatrix& rho0,
                                         const SystemParams& params,
                                         const IntegratorConfig& integ,
                                         const OpenOptions& options = {});

}  // namespace kerrpdc

#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "kerrpdc/fock.hpp"

namespace kerrpdc {

/// No cube-root branch of M reproduces the vacuum initial condition.
class BranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-form solution of the three-level truncation {|00>, |11>, |22>}
/// started from vacuum:
///   c_ii(t) = sum_j r(i, j) exp(s_j t).
///
/// The exponents come from the Cardano form with
///   M = (-1 - 9x^2 + 3 i x K)^(1/3),  K = sqrt(3 + 66x^2 + 375x^4),  x = g / A.
struct ThreeStateSolution {
  std::array<Complex, 3> s{};
  std::array<std::array<Complex, 3>, 3> r{};  ///< r[i][j]: level i, exponent j

  double x = 0.0;   ///< g / (chi_a + chi_b)
  double A = 0.0;   ///< chi_a + chi_b
  double g = 0.0;
  double K = 0.0;
  Complex M{};
  Complex X1{}, X2{};
  double m1 = 0.0;
  Complex m2{}, m3{};
  int branch = 0;   ///< M = principal root * exp(2 pi i branch / 3)

  /// Largest deviation of the r-row sums from (1, 0, 0).
  [[nodiscard]] double initial_condition_defect() const;
  /// Largest |Re s_j| / |s_j|.
  [[nodiscard]] double exponent_real_part_ratio() const;
};

inline constexpr double kBranchTolerance = 1e-9;

/// Computes the closed form, trying the principal cube-root branch first.
/// Requires real g > 0. Throws BranchError if no branch validates.
[[nodiscard]] ThreeStateSolution solve_three_state(const SystemParams& params);

/// The coefficient set exactly as typeset in the source derivation
/// (including its s_3 and r_ij expressions) for one branch. Kept for
/// comparison only; it does not satisfy the initial conditions.
[[nodiscard]] ThreeStateSolution printed_three_state(const SystemParams& params, int branch);

/// Validating front end for the printed coefficients; throws BranchError
/// when none of the three branches reproduces the initial conditions.
[[nodiscard]] ThreeStateSolution solve_three_state_printed(const SystemParams& params);

/// (c_00, c_11, c_22) at time t.
[[nodiscard]] std::array<Complex, 3> eval_three_state(const ThreeStateSolution& sol, double t);

/// The three-level state embedded in a full lattice of truncation n_max.
[[nodiscard]] TwoModeAmplitudes three_state_amplitudes(const ThreeStateSolution& sol, double t,
                                                       int n_max);

}  // namespace kerrpdc

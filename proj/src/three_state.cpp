#include "kerrpdc/three_state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kerrpdc {

namespace {

const Complex kI{0.0, 1.0};
const double kSqrt3 = std::numbers::sqrt3;

struct Common {
  double g, A, x, P, K;
  Complex M, X1, X2;
  double m1;
  Complex m2, m3;
};

Common common_terms(const SystemParams& params, int branch) {
  params.validate();
  if (params.g.imag() != 0.0 || !(params.g.real() > 0.0)) {
    throw std::invalid_argument("three-state closed form requires real g > 0");
  }
  Common c{};
  c.g = params.g.real();
  c.A = params.kerr_sum();
  c.x = c.g / c.A;
  const double x2 = c.x * c.x;
  c.P = 1.0 + 15.0 * x2;
  c.K = std::sqrt(3.0 + 66.0 * x2 + 375.0 * x2 * x2);
  const Complex radicand{-1.0 - 9.0 * x2, 3.0 * c.x * c.K};
  const Complex rotation = std::polar(1.0, 2.0 * std::numbers::pi * branch / 3.0);
  c.M = std::pow(radicand, 1.0 / 3.0) * rotation;
  const Complex M2 = c.M * c.M;
  c.X1 = Complex{-kSqrt3, 3.0} * c.P + Complex{kSqrt3, 3.0} * M2;
  c.X2 = Complex{-kSqrt3, 1.0} * c.P + Complex{kSqrt3, 1.0} * M2;
  c.m1 = std::norm(c.X1);
  c.m2 = (-c.P + M2) * c.X1;
  c.m3 = std::conj(c.m2);
  return c;
}

void copy_common(const Common& c, int branch, ThreeStateSolution& sol) {
  sol.g = c.g;
  sol.A = c.A;
  sol.x = c.x;
  sol.K = c.K;
  sol.M = c.M;
  sol.X1 = c.X1;
  sol.X2 = c.X2;
  sol.m1 = c.m1;
  sol.m2 = c.m2;
  sol.m3 = c.m3;
  sol.branch = branch;
}

// Cardano roots. s_1 and s_2 follow the standard form directly; s_3 is the
// remaining conjugate-rotated root, (i g / 3x)(-1 + w P/M + conj(w) M).
std::array<Complex, 3> exponents(const Common& c) {
  const Complex X3 = Complex{kSqrt3, 1.0} * c.P + Complex{-kSqrt3, 1.0} * c.M * c.M;
  const double pre = c.g / (6.0 * c.x);
  return {kI * c.g / (3.0 * c.x) * (-1.0 + c.P / c.M + c.M),
          pre * (-2.0 * kI - c.X2 / c.M),
          pre * (-2.0 * kI - X3 / c.M)};
}

ThreeStateSolution build(const SystemParams& params, int branch) {
  const Common c = common_terms(params, branch);
  ThreeStateSolution sol;
  copy_common(c, branch, sol);
  sol.s = exponents(c);

  // Vacuum start: c(t) = sum_j v_j (v_j . e_0) exp(s_j t) with v_j the
  // eigenvector for energy E_j = i s_j. Its components are proportional to
  // (1, E_j / g, -2 E_j / (A - E_j)).
  for (std::size_t j = 0; j < 3; ++j) {
    const Complex E = kI * sol.s[j];
    const Complex v1 = E / c.g;
    const Complex v2 = -2.0 * E / (c.A - E);
    const Complex norm = 1.0 + v1 * v1 + v2 * v2;  // real E: plain squares
    sol.r[0][j] = 1.0 / norm;
    sol.r[1][j] = v1 / norm;
    sol.r[2][j] = v2 / norm;
  }
  return sol;
}

}  // namespace

double ThreeStateSolution::initial_condition_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const Complex sum = r[i][0] + r[i][1] + r[i][2];
    const Complex target = (i == 0) ? Complex{1.0, 0.0} : Complex{};
    worst = std::max(worst, std::abs(sum - target));
  }
  return worst;
}

double ThreeStateSolution::exponent_real_part_ratio() const {
  double worst = 0.0;
  for (const auto& sj : s) {
    const double mag = std::abs(sj);
    if (mag > 0.0) {
      worst = std::max(worst, std::abs(sj.real()) / mag);
    }
  }
  return worst;
}

ThreeStateSolution solve_three_state(const SystemParams& params) {
  std::ostringstream failures;
  for (int branch = 0; branch < 3; ++branch) {
    ThreeStateSolution sol = build(params, branch);
    const double defect = sol.initial_condition_defect();
    const double re_ratio = sol.exponent_real_part_ratio();
    if (defect <= kBranchTolerance && re_ratio <= 1e-10) {
      return sol;
    }
    failures << " branch " << branch << ": ic defect " << defect << ", Re/|s| " << re_ratio << ";";
  }
  throw BranchError("solve_three_state: no cube-root branch validates:" + failures.str());
}

ThreeStateSolution printed_three_state(const SystemParams& params, int branch) {
  const Common c = common_terms(params, branch);
  ThreeStateSolution sol;
  copy_common(c, branch, sol);

  const double x = c.x;
  const double x2 = x * x;
  const double K = c.K;
  const Complex M = c.M;
  const Complex M2 = M * M;
  const double pre = c.g / (6.0 * x);
  sol.s = {kI * c.g / (3.0 * x) * (-1.0 + c.P / M + M),
           pre * (-2.0 * kI - c.X2 / M),
           pre * (-2.0 * kI + std::conj(c.X2) / M)};

  const double q = 7.0 + 75.0 * x2;
  sol.r[0][0] = 12.0 * x / c.m1 * (-kI * x * q + K + M * (-2.0 * kI * x + K) + 2.0 * kI * x * M2);
  sol.r[0][1] = x / c.m2 *
                (Complex{-3.0, -kSqrt3} * q * x + Complex{kSqrt3, -3.0} * K +
                 2.0 * Complex{3.0, -kSqrt3} * x * M + Complex{kSqrt3, 3.0} * K * M -
                 4.0 * kSqrt3 * kI * x * M2);
  sol.r[0][2] = x / c.m3 *
                (Complex{3.0, -kSqrt3} * q * x + Complex{kSqrt3, 3.0} * K -
                 2.0 * Complex{3.0, kSqrt3} * x * M + Complex{kSqrt3, -3.0} * K * M -
                 4.0 * kSqrt3 * kI * x * M2);
  sol.r[1][0] = 12.0 * kI * x * M / c.m1 * (15.0 * x2 + (1.0 + M) * (1.0 + M));
  sol.r[1][1] = kSqrt3 * x * M / c.m2 * (c.X2 - 4.0 * kI * M);
  sol.r[1][2] = -std::conj(sol.r[1][1]);
  sol.r[2][0] = -72.0 * kI * x2 * M2 / c.m1;
  sol.r[2][1] = 12.0 * kI * kSqrt3 * x2 * M2 / c.m2;
  sol.r[2][2] = sol.r[2][1] * c.m2 / c.m3;
  return sol;
}

ThreeStateSolution solve_three_state_printed(const SystemParams& params) {
  std::ostringstream failures;
  for (int branch = 0; branch < 3; ++branch) {
    ThreeStateSolution sol = printed_three_state(params, branch);
    const double defect = sol.initial_condition_defect();
    if (defect <= kBranchTolerance) {
      return sol;
    }
    failures << " branch " << branch << ": ic defect " << defect << ";";
  }
  throw BranchError("printed three-state coefficients fail the vacuum initial condition:" +
                    failures.str());
}

std::array<Complex, 3> eval_three_state(const ThreeStateSolution& sol, double t) {
  std::array<Complex, 3> c{};
  for (std::size_t j = 0; j < 3; ++j) {
    const Complex e = std::exp(sol.s[j] * t);
    for (std::size_t i = 0; i < 3; ++i) {
      c[i] += sol.r[i][j] * e;
    }
  }
  return c;
}

TwoModeAmplitudes three_state_amplitudes(const ThreeStateSolution& sol, double t, int n_max) {
  if (n_max < 2) {
    throw std::invalid_argument("three_state_amplitudes: n_max must be >= 2");
  }
  const auto c = eval_three_state(sol, t);
  TwoModeAmplitudes psi(n_max);
  psi(0, 0) = c[0];
  psi(1, 1) = c[1];
  psi(2, 2) = c[2];
  psi.t = t;
  return psi;
}

}  // namespace kerrpdc

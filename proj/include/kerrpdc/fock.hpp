#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kerrpdc {

using Complex = std::complex<double>;

inline constexpr double kNormTolerance = 1e-8;
inline constexpr double kPositivityTolerance = 1e-8;

/// Physical and truncation parameters of the two pumped Kerr oscillators.
///
/// Units follow hbar = 1 with chi_a = chi_b = 1 by default, so time is
/// measured in 1/chi and the coupling g is quoted in units of chi.
struct SystemParams {
  double chi_a = 1.0;
  double chi_b = 1.0;
  Complex g{0.0, 0.0};
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double nbar_a = 0.0;
  double nbar_b = 0.0;
  int n_max = 10;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  [[nodiscard]] int dim() const { return n_max + 1; }
  [[nodiscard]] double kerr_sum() const { return chi_a + chi_b; }
  /// Dimensionless coupling g / (chi_a + chi_b).
  [[nodiscard]] Complex scaled_coupling() const { return g / kerr_sum(); }
};

/// Pure two-mode state: amplitudes c(n, m) of |n>_a |m>_b.
class TwoModeAmplitudes {
 public:
  TwoModeAmplitudes() = default;
  explicit TwoModeAmplitudes(int n_max);

  [[nodiscard]] int n_max() const { return n_max_; }
  [[nodiscard]] int dim() const { return n_max_ + 1; }

  Complex& operator()(int n, int m) { return c_[static_cast<std::size_t>(n * dim() + m)]; }
  const Complex& operator()(int n, int m) const {
    return c_[static_cast<std::size_t>(n * dim() + m)];
  }

  [[nodiscard]] std::span<Complex> data() { return c_; }
  [[nodiscard]] std::span<const Complex> data() const { return c_; }

  [[nodiscard]] double norm_squared() const;

  double t = 0.0;

 private:
  int n_max_ = 0;
  std::vector<Complex> c_;
};

/// Two-mode density matrix stored as a (d*d) x (d*d) row-major matrix.
///
/// Element access uses rho(n, m, k, l) = <k|<n| rho |m>|l>: n, m are the
/// mode-a ket/bra indices and k, l the mode-b ket/bra indices. The matrix
/// view has row (n, k) -> n*d + k and column (m, l) -> m*d + l.
class TwoModeDensityMatrix {
 public:
  TwoModeDensityMatrix() = default;
  explicit TwoModeDensityMatrix(int n_max);

  [[nodiscard]] int n_max() const { return n_max_; }
  [[nodiscard]] int dim() const { return n_max_ + 1; }
  /// Side length of the flattened matrix, dim()^2.
  [[nodiscard]] int matrix_dim() const { return dim() * dim(); }

  [[nodiscard]] std::size_t flat_index(int n, int m, int k, int l) const {
    const auto d = static_cast<std::size_t>(dim());
    return (static_cast<std::size_t>(n) * d + static_cast<std::size_t>(k)) * d * d +
           static_cast<std::size_t>(m) * d + static_cast<std::size_t>(l);
  }

  Complex& operator()(int n, int m, int k, int l) { return rho_[flat_index(n, m, k, l)]; }
  const Complex& operator()(int n, int m, int k, int l) const {
    return rho_[flat_index(n, m, k, l)];
  }

  /// Population of |n>_a |k>_b.
  [[nodiscard]] double population(int n, int k) const { return (*this)(n, n, k, k).real(); }

  [[nodiscard]] std::span<Complex> data() { return rho_; }
  [[nodiscard]] std::span<const Complex> data() const { return rho_; }

  [[nodiscard]] Complex trace() const;
  [[nodiscard]] double purity() const;
  /// max |rho - rho^dagger| over all elements.
  [[nodiscard]] double hermiticity_defect() const;
  /// Smallest eigenvalue of the flattened matrix.
  [[nodiscard]] double min_eigenvalue() const;
  /// Replace rho by (rho + rho^dagger) / 2.
  void symmetrize();

  double t = 0.0;

 private:
  int n_max_ = 0;
  std::vector<Complex> rho_;
};

[[nodiscard]] TwoModeAmplitudes make_vacuum_state(const SystemParams& params);

/// |n>_a |m>_b as an amplitude lattice.
[[nodiscard]] TwoModeAmplitudes make_fock_state(int n_max, int n, int m);

/// Outer product rho_{nm,kl} = c_{nk} conj(c_{ml}).
/// Throws std::invalid_argument if psi is not normalized within kNormTolerance.
[[nodiscard]] TwoModeDensityMatrix amplitudes_to_density(const TwoModeAmplitudes& psi);

/// Zero-pads (or rejects, if it would drop nonzero amplitudes) to a new truncation.
[[nodiscard]] TwoModeAmplitudes embed(const TwoModeAmplitudes& psi, int n_max);

[[nodiscard]] Complex overlap(const TwoModeAmplitudes& psi_a, const TwoModeAmplitudes& psi_b);

/// |<psi_a|psi_b>|^2. States of different truncation are compared on the
/// common lattice after zero-padding the smaller one.
[[nodiscard]] double fidelity(const TwoModeAmplitudes& psi_a, const TwoModeAmplitudes& psi_b);

/// Total population sitting on the truncation edge (n = n_max or m = n_max).
[[nodiscard]] double boundary_population(const TwoModeAmplitudes& psi);
[[nodiscard]] double boundary_population(const TwoModeDensityMatrix& rho);

}  // namespace kerrpdc

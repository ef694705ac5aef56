#include "kerrpdc/fock.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace kerrpdc {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) {
    throw std::invalid_argument("SystemParams." + field + ": " + why);
  }
}

// Smallest eigenvalue of a Hermitian matrix given as row-major data.
double min_eig_dense(const std::vector<Complex>& a, int n) {
  Eigen::MatrixXcd m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      m(r, c) = a[static_cast<std::size_t>(r * n + c)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

void SystemParams::validate() const {
  require(std::isfinite(chi_a) && std::isfinite(chi_b), "chi", "must be finite");
  require(chi_a + chi_b > 0.0, "chi_a+chi_b", "must be positive");
  require(std::isfinite(g.real()) && std::isfinite(g.imag()), "g", "must be finite");
  require(gamma_a >= 0.0, "gamma_a", "must be >= 0");
  require(gamma_b >= 0.0, "gamma_b", "must be >= 0");
  require(nbar_a >= 0.0, "nbar_a", "must be >= 0");
  require(nbar_b >= 0.0, "nbar_b", "must be >= 0");
  require(n_max >= 2, "n_max", "must be >= 2");
}

TwoModeAmplitudes::TwoModeAmplitudes(int n_max)
    : n_max_(n_max), c_(static_cast<std::size_t>((n_max + 1) * (n_max + 1))) {
  if (n_max < 0) {
    throw std::invalid_argument("TwoModeAmplitudes: negative truncation");
  }
}

double TwoModeAmplitudes::norm_squared() const {
  double s = 0.0;
  for (const auto& z : c_) {
    s += std::norm(z);
  }
  return s;
}

TwoModeDensityMatrix::TwoModeDensityMatrix(int n_max) : n_max_(n_max) {
  if (n_max < 0) {
    throw std::invalid_argument("TwoModeDensityMatrix: negative truncation");
  }
  const auto side = static_cast<std::size_t>(matrix_dim());
  rho_.assign(side * side, Complex{});
}

Complex TwoModeDensityMatrix::trace() const {
  Complex s{};
  const int side = matrix_dim();
  for (int r = 0; r < side; ++r) {
    s += rho_[static_cast<std::size_t>(r * side + r)];
  }
  return s;
}

double TwoModeDensityMatrix::purity() const {
  // tr(rho^2) = sum |rho_rc|^2 for Hermitian rho.
  double s = 0.0;
  for (const auto& z : rho_) {
    s += std::norm(z);
  }
  return s;
}

double TwoModeDensityMatrix::hermiticity_defect() const {
  const int side = matrix_dim();
  double worst = 0.0;
  for (int r = 0; r < side; ++r) {
    for (int c = r; c < side; ++c) {
      const auto& x = rho_[static_cast<std::size_t>(r * side + c)];
      const auto& y = rho_[static_cast<std::size_t>(c * side + r)];
      worst = std::max(worst, std::abs(x - std::conj(y)));
    }
  }
  return worst;
}

void TwoModeDensityMatrix::symmetrize() {
  const int side = matrix_dim();
  for (int r = 0; r < side; ++r) {
    for (int c = r; c < side; ++c) {
      auto& x = rho_[static_cast<std::size_t>(r * side + c)];
      auto& y = rho_[static_cast<std::size_t>(c * side + r)];
      const Complex avg = 0.5 * (x + std::conj(y));
      x = avg;
      y = std::conj(avg);
    }
  }
}

double TwoModeDensityMatrix::min_eigenvalue() const {
  const int d = dim();
  const int side = matrix_dim();

  // States generated from pair-balanced initial conditions are block diagonal
  // in the photon-number difference n - k; diagonalize block by block when
  // that holds, otherwise fall back to the full matrix.
  bool block_diagonal = true;
  for (int r = 0; r < side && block_diagonal; ++r) {
    const int qr = r / d - r % d;
    for (int c = 0; c < side; ++c) {
      if (c / d - c % d != qr && rho_[static_cast<std::size_t>(r * side + c)] != Complex{}) {
        block_diagonal = false;
        break;
      }
    }
  }
  if (!block_diagonal) {
    return min_eig_dense(rho_, side);
  }

  std::map<int, std::vector<int>> blocks;
  for (int r = 0; r < side; ++r) {
    blocks[r / d - r % d].push_back(r);
  }
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& [q, rows] : blocks) {
    const int n = static_cast<int>(rows.size());
    std::vector<Complex> sub(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        sub[static_cast<std::size_t>(i * n + j)] =
            rho_[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)] * side +
                                          rows[static_cast<std::size_t>(j)])];
      }
    }
    lowest = std::min(lowest, min_eig_dense(sub, n));
  }
  return lowest;
}

TwoModeAmplitudes make_vacuum_state(const SystemParams& params) {
  params.validate();
  TwoModeAmplitudes psi(params.n_max);
  psi(0, 0) = 1.0;
  return psi;
}

TwoModeAmplitudes make_fock_state(int n_max, int n, int m) {
  if (n < 0 || m < 0 || n > n_max || m > n_max) {
    throw std::out_of_range("make_fock_state: level outside truncation");
  }
  TwoModeAmplitudes psi(n_max);
  psi(n, m) = 1.0;
  return psi;
}

TwoModeDensityMatrix amplitudes_to_density(const TwoModeAmplitudes& psi) {
  const double norm = psi.norm_squared();
  if (std::abs(norm - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg << "amplitudes_to_density: state not normalized (|psi|^2 = " << norm << ")";
    throw std::invalid_argument(msg.str());
  }
  const int d = psi.dim();
  TwoModeDensityMatrix rho(psi.n_max());
  for (int n = 0; n < d; ++n) {
    for (int k = 0; k < d; ++k) {
      const Complex ket = psi(n, k);
      if (ket == Complex{}) {
        continue;
      }
      for (int m = 0; m < d; ++m) {
        for (int l = 0; l < d; ++l) {
          rho(n, m, k, l) = ket * std::conj(psi(m, l));
        }
      }
    }
  }
  rho.t = psi.t;
  return rho;
}

TwoModeAmplitudes embed(const TwoModeAmplitudes& psi, int n_max) {
  TwoModeAmplitudes out(n_max);
  const int d = psi.dim();
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      if (n <= n_max && m <= n_max) {
        out(n, m) = psi(n, m);
      } else if (psi(n, m) != Complex{}) {
        throw std::invalid_argument("embed: truncation would discard nonzero amplitudes");
      }
    }
  }
  out.t = psi.t;
  return out;
}

Complex overlap(const TwoModeAmplitudes& psi_a, const TwoModeAmplitudes& psi_b) {
  const int d = std::min(psi_a.dim(), psi_b.dim());
  Complex s{};
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      s += std::conj(psi_a(n, m)) * psi_b(n, m);
    }
  }
  return s;
}

double fidelity(const TwoModeAmplitudes& psi_a, const TwoModeAmplitudes& psi_b) {
  return std::clamp(std::norm(overlap(psi_a, psi_b)), 0.0, 1.0);
}

double boundary_population(const TwoModeAmplitudes& psi) {
  const int e = psi.n_max();
  double s = 0.0;
  for (int j = 0; j <= e; ++j) {
    s += std::norm(psi(e, j));
    if (j != e) {
      s += std::norm(psi(j, e));
    }
  }
  return s;
}

double boundary_population(const TwoModeDensityMatrix& rho) {
  const int e = rho.n_max();
  double s = 0.0;
  for (int j = 0; j <= e; ++j) {
    s += rho.population(e, j);
    if (j != e) {
      s += rho.population(j, e);
    }
  }
  return s;
}

}  // namespace kerrpdc

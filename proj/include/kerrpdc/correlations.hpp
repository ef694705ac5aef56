#pragma once

#include <optional>

#include "kerrpdc/fock.hpp"

namespace kerrpdc {

enum class Mode { A, B };

/// Normally ordered intensity correlation Tr{rho :I_k I_l:} with I = k^dagger k:
/// <a^dagger^2 a^2> = sum n(n-1) p(n,.), <b^dagger^2 b^2>, and <a^dagger a b^dagger b>.
[[nodiscard]] double gamma2(const TwoModeDensityMatrix& rho, Mode k, Mode l);

/// Cauchy-Schwartz parameter R = Gamma_ab / sqrt(Gamma_aa Gamma_bb); R > 1
/// signals nonclassical intermode intensity correlations. Returns nullopt
/// when the denominator is below 1e-12 (tr rho)^2 (e.g. vacuum).
[[nodiscard]] std::optional<double> csi_parameter(const TwoModeDensityMatrix& rho);

}  // namespace kerrpdc

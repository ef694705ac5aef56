#include "kerrpdc/correlations.hpp"

#include <algorithm>
#include <cmath>

namespace kerrpdc {

double gamma2(const TwoModeDensityMatrix& rho, Mode k, Mode l) {
  const int d = rho.dim();
  double s = 0.0;
  for (int n = 0; n < d; ++n) {
    for (int m = 0; m < d; ++m) {
      double w = 0.0;
      if (k == Mode::A && l == Mode::A) {
        w = n * (n - 1.0);
      } else if (k == Mode::B && l == Mode::B) {
        w = m * (m - 1.0);
      } else {
        w = static_cast<double>(n) * m;
      }
      if (w != 0.0) {
        s += w * rho.population(n, m);
      }
    }
  }
  return s;
}

std::optional<double> csi_parameter(const TwoModeDensityMatrix& rho) {
  const double gaa = gamma2(rho, Mode::A, Mode::A);
  const double gbb = gamma2(rho, Mode::B, Mode::B);
  const double gab = gamma2(rho, Mode::A, Mode::B);
  const double tr = rho.trace().real();
  const double denom = std::sqrt(std::max(gaa * gbb, 0.0));
  if (denom < 1e-12 * tr * tr) {
    return std::nullopt;
  }
  return gab / denom;
}

}  // namespace kerrpdc

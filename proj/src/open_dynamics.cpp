#include "kerrpdc/open_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kerrpdc {

namespace {

const Complex kI{0.0, 1.0};

// Element-wise master-equation generator. Flat index of rho(n, m, k, l) is
// n*sn + k*sk + m*sm + l with sn = d*d*d, sk = d*d, sm = d.
class LindbladKernel {
 public:
  LindbladKernel(const SystemParams& p, int n_max, DissipatorForm form)
      : p_(p), form_(form), e_(n_max), d_(n_max + 1) {
    sk_ = static_cast<std::ptrdiff_t>(d_) * d_;
    sn_ = sk_ * d_;
    sm_ = d_;
    sq_.resize(static_cast<std::size_t>(d_ * d_ + 1));
    for (std::size_t j = 0; j < sq_.size(); ++j) sq_[j] = std::sqrt(static_cast<double>(j));
    kerr_a_.resize(static_cast<std::size_t>(d_));
    kerr_b_.resize(static_cast<std::size_t>(d_));
    for (int j = 0; j < d_; ++j) {
      kerr_a_[static_cast<std::size_t>(j)] = 0.5 * p.chi_a * j * (j - 1);
      kerr_b_[static_cast<std::size_t>(j)] = 0.5 * p.chi_b * j * (j - 1);
    }
    down_a_ = p.gamma_a * (p.nbar_a + 1.0);
    up_a_ = p.gamma_a * p.nbar_a;
    down_b_ = p.gamma_b * (p.nbar_b + 1.0);
    up_b_ = p.gamma_b * p.nbar_b;
  }

  void apply(const Complex* r, Complex* out, bool sector_only) const {
    for (int n = 0; n < d_; ++n) {
      for (int m = 0; m < d_; ++m) {
        for (int k = 0; k < d_; ++k) {
          if (sector_only) {
            const int l = k - n + m;
            if (l >= 0 && l < d_) {
              const auto i = index(n, m, k, l);
              out[i] = element(r, i, n, m, k, l);
            }
          } else {
            for (int l = 0; l < d_; ++l) {
              const auto i = index(n, m, k, l);
              out[i] = element(r, i, n, m, k, l);
            }
          }
        }
      }
    }
  }

 private:
  [[nodiscard]] std::ptrdiff_t index(int n, int m, int k, int l) const {
    return n * sn_ + k * sk_ + m * sm_ + l;
  }
  [[nodiscard]] double sq(int j) const { return sq_[static_cast<std::size_t>(j)]; }
  // Diagonal of a a^dagger for the truncated ladder operator.
  [[nodiscard]] int raised(int j) const { return j < e_ ? j + 1 : 0; }

  Complex element(const Complex* r, std::ptrdiff_t i, int n, int m, int k, int l) const {
    return form_ == DissipatorForm::Standard ? standard(r, i, n, m, k, l)
                                             : printed(r, i, n, m, k, l);
  }

  Complex standard(const Complex* r, std::ptrdiff_t i, int n, int m, int k, int l) const {
    const Complex g = p_.g;
    const Complex gc = std::conj(g);
    const Complex here = r[i];
    const double energy = kerr_a_[static_cast<std::size_t>(n)] + kerr_b_[static_cast<std::size_t>(k)] -
                          kerr_a_[static_cast<std::size_t>(m)] - kerr_b_[static_cast<std::size_t>(l)];
    Complex acc = -kI * energy * here;

    Complex pump{};
    if (n > 0 && k > 0) pump -= g * sq(n * k) * r[i - sn_ - sk_];
    if (n < e_ && k < e_) pump -= gc * sq((n + 1) * (k + 1)) * r[i + sn_ + sk_];
    if (m < e_ && l < e_) pump += g * sq((m + 1) * (l + 1)) * r[i + sm_ + 1];
    if (m > 0 && l > 0) pump += gc * sq(m * l) * r[i - sm_ - 1];
    acc += kI * pump;

    if (down_a_ != 0.0) {
      Complex t = -0.5 * (n + m) * here;
      if (n < e_ && m < e_) t += sq((n + 1) * (m + 1)) * r[i + sn_ + sm_];
      acc += down_a_ * t;
    }
    if (up_a_ != 0.0) {
      Complex t = -0.5 * (raised(n) + raised(m)) * here;
      if (n > 0 && m > 0) t += sq(n * m) * r[i - sn_ - sm_];
      acc += up_a_ * t;
    }
    if (down_b_ != 0.0) {
      Complex t = -0.5 * (k + l) * here;
      if (k < e_ && l < e_) t += sq((k + 1) * (l + 1)) * r[i + sk_ + 1];
      acc += down_b_ * t;
    }
    if (up_b_ != 0.0) {
      Complex t = -0.5 * (raised(k) + raised(l)) * here;
      if (k > 0 && l > 0) t += sq(k * l) * r[i - sk_ - 1];
      acc += up_b_ * t;
    }
    return acc;
  }

  Complex printed(const Complex* r, std::ptrdiff_t i, int n, int m, int k, int l) const {
    const Complex g = p_.g;
    const Complex gc = std::conj(g);
    const double ga = p_.gamma_a;
    const double gb = p_.gamma_b;
    const double na = p_.nbar_a;
    const double nb = p_.nbar_b;
    const Complex bracket =
        kI * p_.chi_a * static_cast<double>(n * (n - 1) - m * (m - 1)) +
        kI * p_.chi_b * static_cast<double>(k * (k - 1) - l * (l - 1)) +
        ga * (n + m - 2.0 * na * (n + m + 1)) + gb * (k + l - 2.0 * nb * (k + l + 1));
    Complex acc = -0.5 * bracket * r[i];
    if (n > 0 && k > 0) acc += g * sq(n * k) * r[i - sn_ - sk_];
    if (m < e_ && l < e_) acc -= g * sq((m + 1) * (l + 1)) * r[i + sm_ + 1];
    if (n < e_ && k < e_) acc += gc * sq((n + 1) * (k + 1)) * r[i + sn_ + sk_];
    if (m > 0 && l > 0) acc -= gc * sq(m * l) * r[i - sm_ - 1];
    Complex ta{};
    if (n < e_ && m < e_) ta += (1.0 + na) * sq((n + 1) * (m + 1)) * r[i + sn_ + sm_];
    if (n > 0 && m > 0) ta += na * sq(n * m) * r[i - sn_ - sm_];
    Complex tb{};
    if (k < e_ && l < e_) tb += (1.0 + nb) * sq((k + 1) * (l + 1)) * r[i + sk_ + 1];
    if (k > 0 && l > 0) tb += nb * sq(k * l) * r[i - sk_ - 1];
    return acc + ga * ta + gb * tb;
  }

  SystemParams p_;
  DissipatorForm form_;
  int e_;
  int d_;
  std::ptrdiff_t sn_ = 0, sk_ = 0, sm_ = 0;
  std::vector<double> sq_;
  std::vector<double> kerr_a_, kerr_b_;
  double down_a_ = 0.0, up_a_ = 0.0, down_b_ = 0.0, up_b_ = 0.0;
};

struct KernelRhs {
  const LindbladKernel* kernel;
  bool sector_only;
  void operator()(const TwoModeDensityMatrix& y, TwoModeDensityMatrix& dy) const {
    kernel->apply(y.data().data(), dy.data().data(), sector_only);
  }
};

// max |rho - rho^dagger| and optional symmetrization, restricted to `active`
// (or every element when empty). The adjoint partner of (n,m,k,l) is (m,n,l,k).
double hermitize(TwoModeDensityMatrix& rho, std::span<const std::size_t> active, bool apply) {
  const int side = rho.matrix_dim();
  auto data = rho.data();
  double worst = 0.0;
  auto visit = [&](std::size_t i) {
    const auto row = i / static_cast<std::size_t>(side);
    const auto col = i % static_cast<std::size_t>(side);
    if (col < row) return;
    const std::size_t j = col * static_cast<std::size_t>(side) + row;
    worst = std::max(worst, std::abs(data[i] - std::conj(data[j])));
    if (apply) {
      const Complex avg = 0.5 * (data[i] + std::conj(data[j]));
      data[i] = avg;
      data[j] = std::conj(avg);
    }
  };
  if (active.empty()) {
    for (std::size_t i = 0; i < data.size(); ++i) visit(i);
  } else {
    for (auto i : active) visit(i);
  }
  return worst;
}

}  // namespace

void lindblad_rhs(const TwoModeDensityMatrix& rho, const SystemParams& params,
                  TwoModeDensityMatrix& drho, DissipatorForm form) {
  if (drho.n_max() != rho.n_max()) {
    drho = TwoModeDensityMatrix(rho.n_max());
  }
  const LindbladKernel kernel(params, rho.n_max(), form);
  kernel.apply(rho.data().data(), drho.data().data(), false);
}

TwoModeDensityMatrix lindblad_rhs(const TwoModeDensityMatrix& rho, const SystemParams& params,
                                  DissipatorForm form) {
  TwoModeDensityMatrix out(rho.n_max());
  lindblad_rhs(rho, params, out, form);
  return out;
}

bool is_pair_balanced(const TwoModeDensityMatrix& rho) {
  const int d = rho.dim();
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          if (n - m != k - l && rho(n, m, k, l) != Complex{}) return false;
  return true;
}

std::vector<std::size_t> pair_balanced_indices(int n_max) {
  const TwoModeDensityMatrix shape(n_max);
  const int d = n_max + 1;
  std::vector<std::size_t> idx;
  for (int n = 0; n < d; ++n)
    for (int m = 0; m < d; ++m)
      for (int k = 0; k < d; ++k) {
        const int l = k - n + m;
        if (l >= 0 && l < d) idx.push_back(shape.flat_index(n, m, k, l));
      }
  std::sort(idx.begin(), idx.end());
  return idx;
}

OpenRunReport evolve_open(const TwoModeDensityMatrix& rho0, const SystemParams& params,
                          const IntegratorConfig& integ,
                          const SampleObserver<TwoModeDensityMatrix>& observer,
                          const OpenOptions& options) {
  params.validate();
  integ.validate();
  if (rho0.n_max() != params.n_max) {
    throw std::invalid_argument("evolve_open: state truncation differs from params.n_max");
  }
  if (std::abs(rho0.trace() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("evolve_open: initial state does not have unit trace");
  }
  if (rho0.hermiticity_defect() > kNormTolerance) {
    throw std::invalid_argument("evolve_open: initial state is not Hermitian");
  }
  if (options.positivity_check_every < 1) {
    throw std::invalid_argument("OpenOptions.positivity_check_every: must be >= 1");
  }

  OpenRunReport report;
  report.pair_balanced = is_pair_balanced(rho0);
  const std::vector<std::size_t> active =
      report.pair_balanced ? pair_balanced_indices(params.n_max) : std::vector<std::size_t>{};

  const LindbladKernel kernel(params, params.n_max, options.form);
  const KernelRhs rhs{&kernel, report.pair_balanced};
  Rk4Stepper<TwoModeDensityMatrix, KernelRhs> stepper(rhs, rho0);

  TwoModeDensityMatrix rho = rho0;
  rho.t = 0.0;
  TwoModeDensityMatrix prev = rho;
  const Complex trace0 = rho0.trace();
  const double dt = integ.dt;
  const long steps = integ.steps();
  report.min_eigenvalue = rho.min_eigenvalue();

  long sample_index = 0;
  const long last_sample = steps / integ.sample_every;

  auto on_sample = [&](double t) {
    const double b = boundary_population(rho);
    report.max_boundary_population = std::max(report.max_boundary_population, b);
    report.boundary_warning = report.max_boundary_population > 1e-6;
    if (sample_index % options.positivity_check_every == 0 || sample_index == last_sample) {
      const double lowest = rho.min_eigenvalue();
      report.min_eigenvalue = std::min(report.min_eigenvalue, lowest);
      if (lowest < -kPositivityFailure) {
        std::ostringstream msg;
        msg << "evolve_open: smallest eigenvalue " << lowest << " at t=" << t
            << " (truncation or step size too coarse)";
        throw PositivityError(msg.str(), t);
      }
    }
  };

  on_sample(0.0);
  if (observer) {
    observer(SampleContext<TwoModeDensityMatrix>{0.0, rho, 0.0, {}});
  }

  for (long s = 1; s <= steps; ++s) {
    stepper.step(rho, dt, active);
    rho.t = static_cast<double>(s) * dt;
    const double herm = hermitize(rho, active, options.enforce_hermiticity);
    report.max_hermiticity_drift = std::max(report.max_hermiticity_drift, herm);
    report.max_trace_drift = std::max(report.max_trace_drift, std::abs(rho.trace() - trace0));
    report.steps = s;

    if (s % integ.sample_every == 0) {
      ++sample_index;
      on_sample(rho.t);
      if (observer) {
        const double t_prev = prev.t;
        auto revisit = [&, t_prev](double tau) {
          TwoModeDensityMatrix y = prev;
          const double span = tau - t_prev;
          if (span <= 0.0) return y;
          const long n = std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
          const double h = span / static_cast<double>(n);
          Rk4Stepper<TwoModeDensityMatrix, KernelRhs> sub(rhs, y);
          for (long i = 0; i < n; ++i) {
            sub.step(y, h, active);
            hermitize(y, active, options.enforce_hermiticity);
          }
          y.t = tau;
          return y;
        };
        observer(SampleContext<TwoModeDensityMatrix>{rho.t, rho, t_prev, revisit});
      }
      prev = rho;
    }
  }
  return report;
}

OpenTrajectory evolve_open(const TwoModeDensityMatrix& rho0, const SystemParams& params,
                           const IntegratorConfig& integ, const OpenOptions& options) {
  OpenTrajectory out;
  out.report = evolve_open(
      rho0, params, integ,
      [&](const SampleContext<TwoModeDensityMatrix>& ctx) { out.samples.push_back(ctx.state); },
      options);
  return out;
}

}  // namespace kerrpdc

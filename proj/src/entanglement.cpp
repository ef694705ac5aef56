#include "kerrpdc/entanglement.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <sstream>

#include "kerrpdc/correlations.hpp"

namespace kerrpdc {

void QubitPair::validate(int n_max) const {
  if (low < 0 || high <= low || high > n_max) {
    std::ostringstream msg;
    msg << "QubitPair {" << low << "," << high << "} must satisfy 0 <= low < high <= n_max ("
        << n_max << ")";
    throw std::invalid_argument(msg.str());
  }
}

std::string QubitPair::label() const {
  std::ostringstream s;
  s << low << high << high << low;
  return s.str();
}

QubitPair parse_qubit_pair(const std::string& text) {
  std::string digits;
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
    } else if (c != '-' && c != ' ' && c != '{' && c != '}' && c != ',') {
      throw std::invalid_argument("qubit pair '" + text + "': unexpected character");
    }
  }
  if (digits.size() == 4 && digits[0] == digits[3] && digits[1] == digits[2]) {
    digits.resize(2);
  }
  if (digits.size() != 2) {
    throw std::invalid_argument("qubit pair '" + text + "': expected two single-digit levels");
  }
  return QubitPair{digits[0] - '0', digits[1] - '0'};
}

QubitPairReduced project_qubit_pair(const TwoModeDensityMatrix& rho, QubitPair pair,
                                    ProjectionNorm norm) {
  pair.validate(rho.n_max());
  const std::array<int, 2> level{pair.low, pair.high};
  QubitPairReduced out;
  // Basis index 2*qa + qb for qubit values qa (mode a), qb (mode b).
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const int n = level[static_cast<std::size_t>(r / 2)];
      const int k = level[static_cast<std::size_t>(r % 2)];
      const int m = level[static_cast<std::size_t>(c / 2)];
      const int l = level[static_cast<std::size_t>(c % 2)];
      out.m(r, c) = rho(n, m, k, l);
    }
  }
  out.weight = out.m.trace().real();
  out.norm = norm;
  if (norm == ProjectionNorm::Renormalized && out.weight > 0.0) {
    out.m /= out.weight;
  }
  return out;
}

Eigen::Matrix4cd partial_transpose(const Eigen::Matrix4cd& m) {
  Eigen::Matrix4cd pt;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const int ra = r / 2, rb = r % 2, ca = c / 2, cb = c % 2;
      pt(r, c) = m(2 * ra + cb, 2 * ca + rb);
    }
  }
  return pt;
}

double entanglement_witness(const QubitPairReduced& reduced) {
  const Eigen::Matrix4cd pt = partial_transpose(reduced.m);
  const Eigen::Matrix4cd h = 0.5 * (pt + pt.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  return -2.0 * es.eigenvalues().minCoeff();
}

double negativity(const QubitPairReduced& reduced) {
  return std::max(0.0, entanglement_witness(reduced));
}

double off_x_magnitude(const QubitPairReduced& reduced) {
  double worst = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const bool on_x = (r == c) || (r == 0 && c == 3) || (r == 3 && c == 0);
      if (!on_x) {
        worst = std::max(worst, std::abs(reduced.m(r, c)));
      }
    }
  }
  return worst;
}

std::array<double, 4> xstate_eigenvalues(const QubitPairReduced& reduced, double tolerance) {
  const double off = off_x_magnitude(reduced);
  if (off > tolerance) {
    std::ostringstream msg;
    msg << "xstate_eigenvalues: element outside the X pattern has magnitude " << off;
    throw XFormError(msg.str());
  }
  const auto& m = reduced.m;
  const double a11 = m(0, 0).real();
  const double a22 = m(1, 1).real();
  const double a33 = m(2, 2).real();
  const double a44 = m(3, 3).real();
  // a14 a41 = |a14|^2 for a Hermitian block.
  const double coh = (m(0, 3) * m(3, 0)).real();
  const double root = std::sqrt((a22 - a33) * (a22 - a33) + 4.0 * coh);
  return {a11, 0.5 * (a22 + a33 - root), 0.5 * (a22 + a33 + root), a44};
}

double xstate_negativity(const QubitPairReduced& reduced, double tolerance) {
  const auto lam = xstate_eigenvalues(reduced, tolerance);
  const double lowest = *std::min_element(lam.begin(), lam.end());
  return std::max(0.0, -2.0 * lowest);
}

BorderProducts border_ratio(const TwoModeDensityMatrix& rho, QubitPair pair) {
  pair.validate(rho.n_max());
  const int i = pair.low;
  const int j = pair.high;
  BorderProducts out;
  out.population_product = (rho(i, i, j, j) * rho(j, j, i, i)).real();
  out.coherence_product = (rho(i, j, i, j) * rho(j, i, j, i)).real();
  return out;
}

// ---------------------------------------------------------------------------

const PairTrack& TimeSeries::track(QubitPair pair) const {
  for (const auto& p : pairs) {
    if (p.pair == pair) return p;
  }
  throw std::out_of_range("TimeSeries: pair " + pair.label() + " was not recorded");
}

SeriesRecorder::SeriesRecorder(std::vector<QubitPair> pairs, RecorderOptions options)
    : options_(options) {
  for (const auto& p : pairs) {
    series_.pairs.push_back(PairTrack{p, {}, {}, {}, {}, {}});
  }
}

template <class State, class ToDensity>
void SeriesRecorder::record(const SampleContext<State>& ctx, ToDensity to_density) {
  const TwoModeDensityMatrix rho = to_density(ctx.state);
  series_.t.push_back(ctx.t);
  series_.trace.push_back(rho.trace().real());
  series_.boundary_population.push_back(boundary_population(rho));
  if (options_.record_csi) {
    series_.csi.push_back(csi_parameter(rho));
  }
  for (auto& track : series_.pairs) {
    const auto reduced = project_qubit_pair(rho, track.pair);
    const double w = entanglement_witness(reduced);
    const auto border = border_ratio(rho, track.pair);
    const bool had_prev = !track.witness.empty();
    const double w_prev = had_prev ? track.witness.back() : 0.0;
    track.witness.push_back(w);
    track.negativity.push_back(std::max(0.0, w));
    track.population_product.push_back(border.population_product);
    track.coherence_product.push_back(border.coherence_product);

    if (!had_prev || (w_prev > 0.0) == (w > 0.0)) continue;
    WitnessCrossing crossing;
    crossing.to_separable = w_prev > 0.0;
    double lo = ctx.t_prev;
    double hi = ctx.t;
    if (options_.refine_to > 0.0 && ctx.revisit) {
      while (hi - lo > options_.refine_to) {
        const double mid = 0.5 * (lo + hi);
        const auto mid_rho = to_density(ctx.revisit(mid));
        const double wm = entanglement_witness(project_qubit_pair(mid_rho, track.pair));
        if ((wm > 0.0) == (w_prev > 0.0)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
    crossing.t_lo = lo;
    crossing.t_hi = hi;
    crossing.t = 0.5 * (lo + hi);
    track.crossings.push_back(crossing);
  }
}

void SeriesRecorder::operator()(const SampleContext<TwoModeDensityMatrix>& ctx) {
  record(ctx, [](const TwoModeDensityMatrix& r) -> const TwoModeDensityMatrix& { return r; });
}

void SeriesRecorder::operator()(const SampleContext<TwoModeAmplitudes>& ctx) {
  record(ctx, [](const TwoModeAmplitudes& psi) { return amplitudes_to_density(psi); });
}

std::vector<EntanglementEvent> detect_events(const TimeSeries& series, QubitPair pair,
                                             const EventOptions& options) {
  const PairTrack& track = series.track(pair);
  const auto& t = series.t;
  const auto& neg = track.negativity;
  const std::size_t n = neg.size();
  std::vector<EntanglementEvent> events;
  if (n == 0) return events;

  const double step = n > 1 ? t[1] - t[0] : 0.0;
  auto refined = [&](double lo, double hi, bool to_separable) {
    // Crossing inside the bracket (widened by one sample to absorb the
    // threshold-vs-sign offset); closest to the bracket midpoint wins.
    const double mid = 0.5 * (lo + hi);
    std::optional<double> best;
    for (const auto& c : track.crossings) {
      if (c.to_separable != to_separable) continue;
      if (c.t < lo - step || c.t > hi + step) continue;
      if (!best || std::abs(c.t - mid) < std::abs(*best - mid)) best = c.t;
    }
    return best.value_or(to_separable ? hi : lo);
  };

  std::size_t i = 0;
  while (i < n) {
    if (neg[i] >= options.zero_threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && neg[j] < options.zero_threshold) ++j;
    const std::size_t run = j - i;
    const bool from_start = (i == 0);
    const bool to_end = (j == n);
    if (run >= static_cast<std::size_t>(options.min_dead_samples) && !from_start) {
      const double duration = t[j - 1] - t[i];
      const bool sustained = duration >= options.sustained_duration;
      EntanglementEvent death;
      death.kind = EventKind::SuddenDeath;
      death.pair = pair;
      death.t_lo = t[i - 1];
      death.t_hi = t[i];
      death.t = refined(death.t_lo, death.t_hi, true);
      death.dead_duration = duration;
      death.reaches_end = to_end;
      death.sustained = sustained;
      events.push_back(death);
      if (!to_end) {
        EntanglementEvent birth = death;
        birth.kind = EventKind::SuddenBirth;
        birth.t_lo = t[j - 1];
        birth.t_hi = t[j];
        birth.t = refined(birth.t_lo, birth.t_hi, false);
        events.push_back(birth);
      }
    }
    i = j;
  }
  return events;
}

std::vector<EntanglementEvent> sustained_only(const std::vector<EntanglementEvent>& events) {
  std::vector<EntanglementEvent> out;
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [](const EntanglementEvent& e) { return e.sustained; });
  return out;
}

std::string to_string(EventKind kind) {
  return kind == EventKind::SuddenDeath ? "sudden_death" : "sudden_birth";
}

}  // namespace kerrpdc

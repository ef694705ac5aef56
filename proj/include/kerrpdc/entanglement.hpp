#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kerrpdc/fock.hpp"
#include "kerrpdc/integrator.hpp"

namespace kerrpdc {

/// Qubit-qubit subsystem spanned by |low>_a|low>_b ... |high>_a|high>_b.
/// {0,1}, {0,2}, {1,2} give the negativities N_0110, N_0220, N_1221.
struct QubitPair {
  int low = 0;
  int high = 1;

  void validate(int n_max) const;
  /// "0110" style label.
  [[nodiscard]] std::string label() const;
  friend bool operator==(const QubitPair&, const QubitPair&) = default;
};

/// Parses "01", "0-1" or "0110" into a pair.
[[nodiscard]] QubitPair parse_qubit_pair(const std::string& text);

enum class ProjectionNorm {
  Raw,           ///< plain 4x4 block of rho (trace = projection weight)
  Renormalized,  ///< block divided by its trace
};

/// 4x4 block of rho over {|ii>, |ij>, |ji>, |jj>} (a index first).
struct QubitPairReduced {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  ProjectionNorm norm = ProjectionNorm::Raw;
  double weight = 0.0;  ///< trace of the raw block
};

class XFormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] QubitPairReduced project_qubit_pair(const TwoModeDensityMatrix& rho, QubitPair pair,
                                                  ProjectionNorm norm = ProjectionNorm::Raw);

/// Partial transpose over the mode-b qubit.
[[nodiscard]] Eigen::Matrix4cd partial_transpose(const Eigen::Matrix4cd& m);

/// -2 * (smallest eigenvalue of the partial transpose). Positive iff entangled;
/// smooth in time, unlike the clipped negativity.
[[nodiscard]] double entanglement_witness(const QubitPairReduced& reduced);

/// N = max(0, -2 min_j mu_j), mu_j eigenvalues of the partial transpose.
[[nodiscard]] double negativity(const QubitPairReduced& reduced);

/// Magnitude of the largest element outside the X pattern (diagonal + a14/a41).
[[nodiscard]] double off_x_magnitude(const QubitPairReduced& reduced);

/// Closed-form eigenvalues of an X-form partial transpose, ordered
/// {a11, lambda_-, lambda_+, a44}.
[[nodiscard]] std::array<double, 4> xstate_eigenvalues(const QubitPairReduced& reduced,
                                                       double tolerance = 1e-10);

/// Negativity from the X-form eigenvalues; throws XFormError when elements
/// outside the X pattern exceed `tolerance`.
[[nodiscard]] double xstate_negativity(const QubitPairReduced& reduced, double tolerance = 1e-10);

/// The two products whose ordering decides entanglement of an X-form block.
///
/// In the rho_{nm,kl} index convention, population_product is
/// rho_{ii,jj} rho_{jj,ii} = p(i_a, j_b) p(j_a, i_b) and coherence_product is
/// rho_{ij,ij} rho_{ji,ji} = |<ii|rho|jj>|^2. The subsystem is entangled iff
/// coherence_product > population_product.
struct BorderProducts {
  double population_product = 0.0;
  double coherence_product = 0.0;
  [[nodiscard]] bool entangled() const { return coherence_product > population_product; }
};

[[nodiscard]] BorderProducts border_ratio(const TwoModeDensityMatrix& rho, QubitPair pair);

// ---------------------------------------------------------------------------
// Time series and event detection.

/// Sign change of the witness, refined by bisection between two samples.
struct WitnessCrossing {
  double t = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool to_separable = false;  ///< witness went from positive to non-positive
};

struct PairTrack {
  QubitPair pair;
  std::vector<double> negativity;
  std::vector<double> witness;
  std::vector<double> population_product;
  std::vector<double> coherence_product;
  std::vector<WitnessCrossing> crossings;
};

/// Sampled observables of one run.
struct TimeSeries {
  std::vector<double> t;
  std::vector<PairTrack> pairs;
  std::vector<std::optional<double>> csi;  ///< R; nullopt where undefined
  std::vector<double> trace;
  std::vector<double> boundary_population;

  [[nodiscard]] const PairTrack& track(QubitPair pair) const;
  [[nodiscard]] std::size_t size() const { return t.size(); }
};

struct RecorderOptions {
  bool record_csi = true;
  /// Bisect witness sign changes down to this interval (0 disables).
  double refine_to = 1e-3;
};

/// Observer that fills a TimeSeries from density-matrix samples.
class SeriesRecorder {
 public:
  SeriesRecorder(std::vector<QubitPair> pairs, RecorderOptions options = {});

  void operator()(const SampleContext<TwoModeDensityMatrix>& ctx);
  /// Pure-state runs: converts each sample to a density matrix first.
  void operator()(const SampleContext<TwoModeAmplitudes>& ctx);

  [[nodiscard]] const TimeSeries& series() const { return series_; }
  [[nodiscard]] TimeSeries take() { return std::move(series_); }

 private:
  template <class State, class ToDensity>
  void record(const SampleContext<State>& ctx, ToDensity to_density);

  RecorderOptions options_;
  TimeSeries series_;
};

enum class EventKind { SuddenDeath, SuddenBirth };

struct EntanglementEvent {
  EventKind kind = EventKind::SuddenDeath;
  double t = 0.0;
  QubitPair pair;
  double t_lo = 0.0;  ///< bracketing interval
  double t_hi = 0.0;
  double dead_duration = 0.0;  ///< length of the zero plateau this event bounds
  bool reaches_end = false;    ///< plateau extends to the end of the series
  bool sustained = false;      ///< plateau at least EventOptions::sustained_duration long
};

struct EventOptions {
  double zero_threshold = 1e-6;
  /// Minimum run of consecutive sub-threshold samples counted as a dead interval.
  int min_dead_samples = 20;
  /// Dead intervals at least this long (time units) are marked sustained; shorter
  /// ones are the zero windows of an oscillating negativity.
  double sustained_duration = 10.0;
};

/// Death/birth events bounding every zero plateau of N for `pair`. Plateaus
/// starting at the first sample (initial vacuum) produce no events.
[[nodiscard]] std::vector<EntanglementEvent> detect_events(const TimeSeries& series, QubitPair pair,
                                                           const EventOptions& options = {});

[[nodiscard]] std::vector<EntanglementEvent> sustained_only(
    const std::vector<EntanglementEvent>& events);

[[nodiscard]] std::string to_string(EventKind kind);

}  // namespace kerrpdc

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "presence/error.hpp"
#include "presence/features.hpp"
#include "presence/kde_bayes.hpp"
#include "presence/trace.hpp"

namespace presence {

/// Hour-of-day presence assumption used to seed the labels and to break vote
/// ties. Hours are evaluated at a fixed UTC offset.
class PriorSchedule {
public:
  PriorSchedule();  // the office default, present 09:00-20:00
  explicit PriorSchedule(std::array<Presence, 24> hours, std::int64_t utc_offset_seconds = 0);

  /// Present on [begin_hour, end_hour), absent elsewhere. end_hour may wrap.
  static PriorSchedule present_between(int begin_hour, int end_hour,
                                       std::int64_t utc_offset_seconds = 0);
  /// Either "B-E" (present hours [B, E)) or 24 characters of '0'/'1'.
  static PriorSchedule parse(std::string_view text, std::int64_t utc_offset_seconds = 0);

  Presence at(Timestamp t) const { return hours_[static_cast<std::size_t>(hour_of_day(t))]; }
  Presence at_hour(int hour) const { return hours_.at(static_cast<std::size_t>(hour)); }
  int hour_of_day(Timestamp t) const;
  std::int64_t utc_offset() const noexcept { return utc_offset_; }

  /// Every entry moved later by `hours` (negative moves earlier).
  PriorSchedule shifted(int hours) const;
  /// Fraction of the 24 hours marked present.
  double present_fraction() const;
  /// 24 characters of '0'/'1'.
  std::string to_string() const;

private:
  std::array<Presence, 24> hours_{};
  std::int64_t utc_offset_ = 0;
};

struct SelfTrainConfig {
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  int max_iter = 30;
  double epsilon_grid_step = 0.005;
  double epsilon_max = 0.5;
  std::uint64_t seed = 0;
  bool stop_on_negative_phi = true;
  bool rate_search = false;
  /// Unlabeled windows that the vote assigns to class i join the sampling
  /// pool of class i. Off keeps them unlabeled.
  bool sample_unlabeled = true;
  /// Retain the vote labeling of every adopted iteration in the diagnostics.
  bool keep_labelings = false;
  KdeOptions kde;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Sizes of the sets A..F: correctly/incorrectly labeled class 1 (a, b),
/// correctly/incorrectly labeled class 2 (c, d), unlabeled truly class 1 / 2
/// (e, f).
struct NoiseCounts {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

  /// Classification noise rate (b + d) / (a + b + c + d); 0.5 for an empty
  /// labeled set.
  double eta() const;
  double labeled() const { return a + b + c + d; }
  /// Counts one round later under hypothesis error epsilon and sampling
  /// rates alpha1, alpha2.
  NoiseCounts advance(double epsilon, double alpha1, double alpha2) const;
};

struct SetSizes {
  double l1 = 0;
  double l2 = 0;
  double u = 0;

  static SetSizes of(const LabelPartition& p) {
    return {static_cast<double>(p.l1_size()), static_cast<double>(p.l2_size()),
            static_cast<double>(p.u_size())};
  }
  double total() const { return l1 + l2 + u; }
};

/// The two extra quantities that make the count system solvable. Exactly two
/// must be set; type1_tracks_epsilon counts as the type-I rate.
struct PriorQuantities {
  std::optional<double> class1_total;  // a + d + e
  std::optional<double> type1_rate;    // d / (a + d)
  std::optional<double> type2_rate;    // b / (b + c)
  bool type1_tracks_epsilon = false;   // d / (a + d) equals the grid epsilon
};

struct NoiseEstimate {
  double epsilon_hat = 0.0;
  double eta_hat = 0.5;          // noise of the round-k labeled set
  double residual = 0.0;         // absolute count residual of the held-out equation
  NoiseCounts counts_hat;        // round-k counts
  NoiseCounts next_counts;       // counts_hat advanced one round
  double eta_next = 0.5;         // noise of the round-(k+1) labeled set
};

/// Line search over epsilon in [0, eps_max]. At each grid point the set
/// sizes of round k are met exactly and the next-round class-1 size plus the
/// two prior quantities are fitted by non-negative least squares; the epsilon
/// with the smallest fit error plus squared held-out residual wins. Throws
/// AlgorithmError("estimator infeasible") when no grid point has a solution.
NoiseEstimate estimate_noise(const SetSizes& sizes_k, const SetSizes& sizes_next, double alpha1,
                             double alpha2, const PriorQuantities& prior,
                             double epsilon_grid_step = 0.005, double epsilon_max = 0.5);

/// m_cur (1 - 2 eta_cur)^2 - m_prev (1 - 2 eta_prev)^2.
double stopping_metric(double m_prev, double eta_prev, double m_cur, double eta_cur);

/// u = m (1 - 2 eta)^2.
double pac_utility(double m, double eta);

struct RateSearchState {
  NoiseCounts counts;    // estimated round-k counts
  double epsilon_hat = 0.0;
  double u_prev = 0.0;   // utility the next round has to beat
  double alpha1 = 0.5;   // incumbent rates, tried first
  double alpha2 = 0.5;
};

/// Utility of the next labeled set predicted from the count recurrences.
double predicted_utility(const RateSearchState& state, double alpha1, double alpha2);

/// First (alpha1, alpha2) on {0, 0.1, ..., 1}^2, incumbent first, whose
/// predicted utility exceeds u_prev. None when epsilon_hat >= 0.5 or nothing
/// qualifies.
std::optional<std::pair<double, double>> search_rates(const RateSearchState& state);

/// All windows labeled by the schedule; nothing unlabeled.
LabelPartition init_from_prior(const PriorSchedule& schedule,
                               std::span<const Timestamp> window_starts);

/// Bernoulli source for the sampling step. Uses the top 53 bits of a 64-bit
/// Mersenne twister so draws are identical across standard libraries.
class SamplingRng {
public:
  explicit SamplingRng(std::uint64_t seed) : engine_(seed) {}
  bool bernoulli(double p) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return u < p;
  }

private:
  std::mt19937_64 engine_;
};

/// Label update: per class keep prev_i & new_i, and admit each index of the
/// symmetric difference prev_i ^ new_i with probability alpha_i. An index
/// admitted by both classes takes its new label; admitted by neither, it
/// becomes unlabeled.
LabelPartition update_labels(const LabelPartition& prev, const LabelPartition& next,
                             double alpha1, double alpha2, SamplingRng& rng,
                             bool sample_unlabeled = true);

enum class Termination : std::uint8_t { max_iter, negative_phi, estimator_infeasible };

std::string_view termination_name(Termination t);

struct IterationRecord {
  int iter = 0;
  std::size_t l1 = 0;
  std::size_t l2 = 0;
  std::size_t u = 0;
  std::optional<double> eps_hat;  // empty for the prior round
  double eta_hat = 0.5;
  double u_k = 0.0;
  double phi = 0.0;
  bool stop_indicator = false;  // phi <= 0
  bool adopted = true;          // labels of this round were trained on
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

struct IterationDiagnostics {
  std::vector<IterationRecord> rows;
  /// Vote labeling per adopted iteration (keep_labelings only), indexed like rows.
  std::vector<std::optional<PresenceSeries>> labelings;
  int best_iter = 0;
  Termination termination = Termination::max_iter;
};

struct SelfTrainResult {
  PresenceSeries presence;
  IterationDiagnostics diagnostics;
};

/// Thrown when a class empties mid-run; carries the rounds completed so far.
class SelfTrainError : public AlgorithmError {
public:
  SelfTrainError(const std::string& what, IterationDiagnostics diagnostics)
      : AlgorithmError(what), diagnostics_(std::move(diagnostics)) {}
  const IterationDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
  IterationDiagnostics diagnostics_;
};

/// Vote labeling produced by per-view classifiers trained on `labels`.
std::vector<Label> fit_and_vote(const FeatureMatrix& features, const LabelPartition& labels,
                                std::span<const Label> prior_labels, const KdeOptions& kde);

/// Zero-training self-training loop. Returns the vote labeling of the
/// adopted iteration with the highest utility u_k.
SelfTrainResult run_presence_sense(const FeatureMatrix& features, const PriorSchedule& schedule,
                                   const SelfTrainConfig& cfg);

}  // namespace presence

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presence/features.hpp"
#include "presence/trace.hpp"

namespace presence {

/// Gaussian-kernel density estimate (1/n) sum K_h(x - x_i), evaluated exactly.
/// Throws std::invalid_argument("empty class") / ("invalid bandwidth").
double kde_density(std::span<const double> samples, double h, double x);

/// Natural log of kde_density(), computed with log-sum-exp so far-tail
/// queries do not underflow.
double kde_log_density(std::span<const double> samples, double h, double x);

/// Lower bound for the bandwidth of a zero-variance class.
inline constexpr double kBandwidthFloor = 1e-3;

/// Rule-of-thumb bandwidth 1.06 * sd * n^(-1/5). A zero-variance sample falls
/// back to max(kBandwidthFloor, 0.01 * max(1, mean)). Needs two samples.
double select_bandwidth(std::span<const double> samples);

/// Gaussian KDE of one class, prepared for many queries.
///
/// Large classes are linearly binned on a grid of spacing h/32 and convolved
/// with the kernel truncated at 10h; queries near the data interpolate that
/// grid, far-tail queries fall back to a pruned log-sum-exp over the occupied
/// bins. Small classes (and degenerate grids) are evaluated exactly.
class KernelDensity {
public:
  KernelDensity() = default;
  KernelDensity(std::span<const double> samples, double h);

  double log_density(double x) const;
  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return n_; }
  bool exact() const noexcept { return exact_; }

private:
  double far_log_density(double x) const;

  double h_ = 1.0;
  std::size_t n_ = 0;
  bool exact_ = true;
  std::vector<double> samples_;  // exact mode only

  double lo_ = 0.0;     // position of bin 0
  double step_ = 1.0;   // bin spacing
  std::size_t pad_ = 0; // grid nodes left of bin 0
  std::vector<double> grid_;        // density at lo_ + (k - pad_) * step_
  std::vector<double> bin_pos_;     // occupied bins, ascending
  std::vector<double> bin_weight_;  // their linear-binning masses
  double log_norm_ = 0.0;           // log(1 / (n h sqrt(2 pi)))
  double grid_floor_ = 0.0;
};

struct KdeOptions {
  /// Decision when both class scores are exactly equal.
  Label tie_break = Label::present;
  /// Fixed bandwidth for both classes; the rule of thumb when unset.
  std::optional<double> bandwidth;
};

/// Naive-Bayes classifier for one univariate view: class priors plus a KDE
/// likelihood per class. Immutable after fit.
class ViewClassifier {
public:
  /// Throws AlgorithmError("degenerate labeling") if either class is empty.
  static ViewClassifier fit(View view, std::span<const double> values,
                            const LabelPartition& labels, KdeOptions options = {});

  /// Fits from explicit per-class samples; priors are the class proportions.
  static ViewClassifier from_samples(View view, std::vector<double> present,
                                     std::vector<double> absent, KdeOptions options = {});

  Label classify(double x) const;
  std::vector<Label> predict(std::span<const double> xs) const;

  /// log p(C=c) + log p(X=x | C=c).
  double log_score(Label c, double x) const;

  View view() const noexcept { return view_; }
  double prior(Label c) const { return priors_[index(c)]; }
  double bandwidth(Label c) const { return densities_[index(c)].bandwidth(); }
  std::size_t sample_count(Label c) const { return densities_[index(c)].size(); }

  /// Priors, bandwidths and sample counts as a JSON object.
  std::string to_json() const;

private:
  static std::size_t index(Label c);

  View view_ = View::mean_power;
  std::array<double, 2> priors_{0.5, 0.5};
  std::array<KernelDensity, 2> densities_;
  KdeOptions options_;
};

/// Median of the per-view labels; an even split returns prior_label.
Label majority_vote(std::span<const Label> view_labels, Label prior_label);

}  // namespace presence

#include "presence/kde_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "presence/error.hpp"

namespace presence {

namespace {

constexpr std::size_t kExactLimit = 256;
constexpr double kStepsPerBandwidth = 32.0;
constexpr std::size_t kTaps = 320;  // 10 bandwidths
constexpr std::size_t kMaxGrid = std::size_t{1} << 22;
// Pruned terms are below exp(-40) of the dominant one.
constexpr double kPruneExponent = 40.0;

void check_kde_args(std::span<const double> samples, double h) {
  if (samples.empty()) {
    throw std::invalid_argument("empty class");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("invalid bandwidth");
  }
}

double log_kernel_norm(std::size_t n, double h) {
  return -std::log(static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

double kde_log_density(std::span<const double> samples, double h, double x) {
  check_kde_args(samples, h);
  const double inv = 1.0 / (2.0 * h * h);
  double top = -std::numeric_limits<double>::infinity();
  for (const double xi : samples) {
    top = std::max(top, -(x - xi) * (x - xi) * inv);
  }
  double sum = 0.0;
  for (const double xi : samples) {
    sum += std::exp(-(x - xi) * (x - xi) * inv - top);
  }
  return top + std::log(sum) + log_kernel_norm(samples.size(), h);
}

double kde_density(std::span<const double> samples, double h, double x) {
  return std::exp(kde_log_density(samples, h, x));
}

double select_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("bandwidth selection needs at least two samples");
  }
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (const double x : samples) {
    mean += x;
  }
  mean /= n;
  double ss = 0.0;
  for (const double x : samples) {
    ss += (x - mean) * (x - mean);
  }
  const double sigma = std::sqrt(ss / (n - 1.0));
  if (sigma == 0.0) {
    return std::max(kBandwidthFloor, 0.01 * std::max(1.0, std::abs(mean)));
  }
  return 1.06 * sigma * std::pow(n, -0.2);
}

KernelDensity::KernelDensity(std::span<const double> samples, double h)
    : h_(h), n_(samples.size()) {
  check_kde_args(samples, h);
  log_norm_ = log_kernel_norm(n_, h_);

  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  step_ = h_ / kStepsPerBandwidth;
  const double span_bins = (*mx - *mn) / step_;
  if (n_ <= kExactLimit || !(span_bins < static_cast<double>(kMaxGrid))) {
    exact_ = true;
    samples_.assign(samples.begin(), samples.end());
    return;
  }
  exact_ = false;
  lo_ = *mn;
  const auto bins = static_cast<std::size_t>(span_bins) + 2;

  std::vector<double> weight(bins, 0.0);
  for (const double x : samples) {
    const double p = (x - lo_) / step_;
    auto j = static_cast<std::size_t>(p);
    if (j > bins - 2) {
      j = bins - 2;
    }
    const double frac = p - static_cast<double>(j);
    weight[j] += 1.0 - frac;
    weight[j + 1] += frac;
  }

  std::array<double, kTaps + 1> kernel{};
  for (std::size_t t = 0; t <= kTaps; ++t) {
    const double u = static_cast<double>(t) / kStepsPerBandwidth;
    kernel[t] = std::exp(-0.5 * u * u);
  }

  pad_ = kTaps;
  grid_.assign(bins + 2 * pad_, 0.0);
  for (std::size_t j = 0; j < bins; ++j) {
    const double w = weight[j];
    if (w == 0.0) {
      continue;
    }
    bin_pos_.push_back(lo_ + static_cast<double>(j) * step_);
    bin_weight_.push_back(w);
    double* centre = grid_.data() + pad_ + j;
    centre[0] += w * kernel[0];
    for (std::size_t t = 1; t <= kTaps; ++t) {
      centre[t] += w * kernel[t];
      *(centre - t) += w * kernel[t];
    }
  }
  const double norm = std::exp(log_norm_);
  for (double& g : grid_) {
    g *= norm;
  }
  grid_floor_ = std::exp(-25.0) * norm;
}

double KernelDensity::log_density(double x) const {
  if (exact_) {
    return kde_log_density(samples_, h_, x);
  }
  const double pos = (x - lo_) / step_ + static_cast<double>(pad_);
  const double last = static_cast<double>(grid_.size() - 1);
  if (pos >= 0.0 && pos <= last) {
    auto i = static_cast<std::size_t>(pos);
    double v = grid_[i];
    if (i + 1 < grid_.size()) {
      const double frac = pos - static_cast<double>(i);
      v = v * (1.0 - frac) + grid_[i + 1] * frac;
    }
    if (v > grid_floor_) {
      return std::log(v);
    }
  }
  return far_log_density(x);
}

double KernelDensity::far_log_density(double x) const {
  const auto it = std::lower_bound(bin_pos_.begin(), bin_pos_.end(), x);
  std::size_t nearest = 0;
  if (it == bin_pos_.end()) {
    nearest = bin_pos_.size() - 1;
  } else {
    nearest = static_cast<std::size_t>(it - bin_pos_.begin());
    if (nearest > 0 && x - bin_pos_[nearest - 1] < bin_pos_[nearest] - x) {
      --nearest;
    }
  }
  const double inv = 1.0 / (2.0 * h_ * h_);
  const double d0 = (x - bin_pos_[nearest]) * (x - bin_pos_[nearest]);
  const double limit = d0 + 2.0 * kPruneExponent * h_ * h_;
  double sum = 0.0;
  for (std::size_t j = nearest + 1; j-- > 0;) {
    const double d = (x - bin_pos_[j]) * (x - bin_pos_[j]);
    if (d > limit) break;
    sum += bin_weight_[j] * std::exp(-(d - d0) * inv);
  }
  for (std::size_t j = nearest + 1; j < bin_pos_.size(); ++j) {
    const double d = (x - bin_pos_[j]) * (x - bin_pos_[j]);
    if (d > limit) break;
    sum += bin_weight_[j] * std::exp(-(d - d0) * inv);
  }
  return log_norm_ - d0 * inv + std::log(sum);
}

std::size_t ViewClassifier::index(Label c) {
  if (c == Label::present) return 0;
  if (c == Label::absent) return 1;
  throw std::invalid_argument("classifier: unlabeled is not a class");
}

namespace {

double class_bandwidth(std::span<const double> samples) {
  if (samples.size() >= 2) {
    return select_bandwidth(samples);
  }
  return std::max(kBandwidthFloor, 0.01 * std::max(1.0, std::abs(samples.front())));
}

}  // namespace

ViewClassifier ViewClassifier::from_samples(View view, std::vector<double> present,
                                            std::vector<double> absent, KdeOptions options) {
  if (present.empty() || absent.empty()) {
    throw AlgorithmError("degenerate labeling");
  }
  ViewClassifier clf;
  clf.view_ = view;
  clf.options_ = options;
  const double total = static_cast<double>(present.size() + absent.size());
  clf.priors_ = {static_cast<double>(present.size()) / total,
                 static_cast<double>(absent.size()) / total};
  if (options.bandwidth && !(*options.bandwidth > 0.0)) {
    throw std::invalid_argument("invalid bandwidth");
  }
  clf.densities_[0] = KernelDensity(present, options.bandwidth.value_or(class_bandwidth(present)));
  clf.densities_[1] = KernelDensity(absent, options.bandwidth.value_or(class_bandwidth(absent)));
  return clf;
}

ViewClassifier ViewClassifier::fit(View view, std::span<const double> values,
                                   const LabelPartition& labels, KdeOptions options) {
  if (values.size() != labels.n_total()) {
    throw std::invalid_argument("classifier: feature column and labels differ in length");
  }
  std::vector<double> present;
  std::vector<double> absent;
  present.reserve(labels.l1_size());
  absent.reserve(labels.l2_size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (labels[i] == Label::present) {
      present.push_back(values[i]);
    } else if (labels[i] == Label::absent) {
      absent.push_back(values[i]);
    }
  }
  return from_samples(view, std::move(present), std::move(absent), options);
}

double ViewClassifier::log_score(Label c, double x) const {
  const auto i = index(c);
  return std::log(priors_[i]) + densities_[i].log_density(x);
}

Label ViewClassifier::classify(double x) const {
  const double s1 = log_score(Label::present, x);
  const double s2 = log_score(Label::absent, x);
  if (s1 == s2) {
    return options_.tie_break;
  }
  return s1 > s2 ? Label::present : Label::absent;
}

std::vector<Label> ViewClassifier::predict(std::span<const double> xs) const {
  std::vector<Label> out;
  out.reserve(xs.size());
  for (const double x : xs) {
    out.push_back(classify(x));
  }
  return out;
}

std::string ViewClassifier::to_json() const {
  nlohmann::json j;
  j["view"] = std::string(view_name(view_));
  j["classes"] = nlohmann::json::array();
  for (const Label c : {Label::present, Label::absent}) {
    j["classes"].push_back({{"label", c == Label::present ? "present" : "absent"},
                            {"prior", prior(c)},
                            {"bandwidth", bandwidth(c)},
                            {"samples", sample_count(c)}});
  }
  return j.dump();
}

Label majority_vote(std::span<const Label> view_labels, Label prior_label) {
  if (view_labels.empty()) {
    throw std::invalid_argument("majority vote needs at least one view");
  }
  std::size_t present = 0;
  std::size_t absent = 0;
  for (const Label l : view_labels) {
    if (l == Label::present) {
      ++present;
    } else if (l == Label::absent) {
      ++absent;
    }
  }
  if (present == absent) {
    return prior_label;
  }
  return present > absent ? Label::present : Label::absent;
}

}  // namespace presence

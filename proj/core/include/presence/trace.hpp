#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace presence {

/// Seconds since the Unix epoch. Sub-second input is truncated on ingest.
using Timestamp = std::int64_t;

struct PowerSample {
  Timestamp t = 0;
  double watts = 0.0;
};

/// Power samples of one user's plug loads, strictly increasing in time.
class PowerTrace {
public:
  PowerTrace() = default;
  /// Throws std::invalid_argument if timestamps are not strictly increasing,
  /// a power value is negative or non-finite, or the period is not positive.
  PowerTrace(std::string user_id, std::vector<PowerSample> samples,
             std::int64_t nominal_period = 1);

  const std::string& user_id() const noexcept { return user_id_; }
  std::span<const PowerSample> samples() const noexcept { return samples_; }
  std::int64_t nominal_period() const noexcept { return nominal_period_; }
  bool empty() const noexcept { return samples_.empty(); }
  std::size_t size() const noexcept { return samples_.size(); }

private:
  std::string user_id_;
  std::vector<PowerSample> samples_;
  std::int64_t nominal_period_ = 1;
};

struct WindowSpec {
  std::int64_t width = 60;
  std::int64_t stride = 60;

  static WindowSpec of_width(std::int64_t width) { return {width, width}; }
};

struct Window {
  Timestamp start = 0;
  std::vector<double> power;
  /// Fewer samples than width / nominal_period.
  bool gapped = false;
};

/// Cuts the trace into windows [start, start + width) anchored at the first
/// sample. Windows with fewer than two samples and the trailing partial
/// window are dropped.
std::vector<Window> windowize(const PowerTrace& trace, const WindowSpec& spec);

enum class Presence : std::uint8_t { absent = 0, present = 1 };

/// Binary presence state per window.
class PresenceSeries {
public:
  PresenceSeries() = default;
  PresenceSeries(std::vector<Timestamp> window_starts, std::vector<Presence> states);

  std::span<const Timestamp> window_starts() const noexcept { return starts_; }
  std::span<const Presence> states() const noexcept { return states_; }
  std::size_t size() const noexcept { return states_.size(); }
  bool empty() const noexcept { return states_.empty(); }
  Presence operator[](std::size_t i) const { return states_[i]; }

  friend bool operator==(const PresenceSeries&, const PresenceSeries&) = default;

private:
  std::vector<Timestamp> starts_;
  std::vector<Presence> states_;
};

/// Majority state of the point-in-time series samples that fall inside each
/// [start, start + width); ties count as present, empty windows as absent.
PresenceSeries align_to_windows(const PresenceSeries& points,
                                std::span<const Timestamp> window_starts,
                                std::int64_t width);

/// Class labels of the self-training loop. Class 1 is presence.
enum class Label : std::uint8_t { unlabeled = 0, present = 1, absent = 2 };

inline Label to_label(Presence p) {
  return p == Presence::present ? Label::present : Label::absent;
}
inline Presence to_presence(Label l) {
  return l == Label::present ? Presence::present : Presence::absent;
}

/// Disjoint index sets l1 (present), l2 (absent) and u (unlabeled) covering
/// 0..n_total-1. Stored as one label per index, so disjointness and coverage
/// hold by construction.
class LabelPartition {
public:
  LabelPartition() = default;
  explicit LabelPartition(std::vector<Label> labels);

  /// Builds from explicit index sets. Throws std::invalid_argument if the
  /// sets overlap, leave an index uncovered or reference one out of range.
  static LabelPartition from_sets(std::span<const std::size_t> l1,
                                  std::span<const std::size_t> l2,
                                  std::span<const std::size_t> u, std::size_t n_total);

  std::size_t n_total() const noexcept { return labels_.size(); }
  std::size_t l1_size() const noexcept { return n1_; }
  std::size_t l2_size() const noexcept { return n2_; }
  std::size_t u_size() const noexcept { return labels_.size() - n1_ - n2_; }
  std::size_t labeled_size() const noexcept { return n1_ + n2_; }

  Label operator[](std::size_t i) const { return labels_[i]; }
  std::span<const Label> labels() const noexcept { return labels_; }

  std::vector<std::size_t> l1() const { return indices_of(Label::present); }
  std::vector<std::size_t> l2() const { return indices_of(Label::absent); }
  std::vector<std::size_t> u() const { return indices_of(Label::unlabeled); }
  std::vector<std::size_t> indices_of(Label label) const;

  friend bool operator==(const LabelPartition& a, const LabelPartition& b) {
    return a.labels_ == b.labels_;
  }

private:
  std::vector<Label> labels_;
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
};

}  // namespace presence

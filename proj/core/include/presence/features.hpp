#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "presence/trace.hpp"

namespace presence {

// Per-window statistics of a power window. All of them need at least two
// samples and throw std::invalid_argument("insufficient samples") otherwise.

/// Largest absolute first difference (edge effect).
double mac(std::span<const double> window);
/// Mean absolute first difference over the k-1 differences of a k-sample window.
double mad(std::span<const double> window);
/// Mean absolute difference between consecutive change points. Change points
/// are strict local extrema (plateaus collapse to their first index) plus both
/// endpoints.
double mahd(std::span<const double> window);
/// Sample standard deviation, denominator k-1.
double sd(std::span<const double> window);
double mean_power(std::span<const double> window);

/// Indices of the change points used by mahd().
std::vector<std::size_t> change_points(std::span<const double> window);

enum class View : std::uint8_t { mean_power, mac, mad, mahd, sd };

inline constexpr std::array<View, 5> kAllViews = {View::mean_power, View::mac, View::mad,
                                                  View::mahd, View::sd};

std::string_view view_name(View v);
std::optional<View> parse_view(std::string_view name);
/// Comma-separated view names, e.g. "mean_power,mac,mad,sd".
std::vector<View> parse_views(std::string_view list);
std::vector<View> default_views();

struct FeatureVector {
  double mean_power = 0.0;
  double mac = 0.0;
  double mad = 0.0;
  double mahd = 0.0;
  double sd = 0.0;

  double get(View v) const;
};

FeatureVector compute_features(std::span<const double> window);

struct FeatureRow {
  Timestamp window_start = 0;
  FeatureVector values;
  bool gapped = false;
};

/// One row per window plus the ordered views that make up the example space.
class FeatureMatrix {
public:
  FeatureMatrix() = default;
  /// Throws std::invalid_argument if fewer than two views are selected or a
  /// view repeats.
  FeatureMatrix(std::vector<FeatureRow> rows, std::vector<View> views);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t view_count() const noexcept { return views_.size(); }
  std::span<const View> views() const noexcept { return views_; }
  std::span<const FeatureRow> data() const noexcept { return rows_; }
  const FeatureRow& row(std::size_t i) const { return rows_[i]; }

  /// Values of the j-th selected view, one per row.
  std::vector<double> column(std::size_t j) const;
  std::vector<Timestamp> window_starts() const;

private:
  std::vector<FeatureRow> rows_;
  std::vector<View> views_;
};

FeatureMatrix build_views(const PowerTrace& trace, const WindowSpec& spec,
                          std::vector<View> views = default_views());

}  // namespace presence

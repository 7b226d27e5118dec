#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "presence/features.hpp"
#include "presence/trace.hpp"

namespace presence {

/// Supervised threshold models used as reference points for the
/// zero-training detector.
enum class ThresholdKind : std::uint8_t { absolute, change, percentage };

std::string_view threshold_kind_name(ThresholdKind k);
ThresholdKind parse_threshold_kind(std::string_view name);

/// Denominator floor of the percentage metric, in watts.
inline constexpr double kPercentageFloor = 0.1;

struct ThresholdModel {
  ThresholdKind kind = ThresholdKind::absolute;
  double threshold = 1.0;  // watts, or a fraction for percentage
  Presence initial_state = Presence::absent;
};

/// Present where the window metric exceeds the threshold.
PresenceSeries infer_absolute(std::span<const double> metric, std::span<const Timestamp> starts,
                              double threshold);

/// Two-state machine starting at `initial`; toggles on every window whose
/// metric exceeds the threshold.
PresenceSeries infer_transition(std::span<const double> metric,
                                std::span<const Timestamp> starts, double threshold,
                                Presence initial);

/// Per-window metric a model of this kind thresholds: window mean power
/// (absolute), window MAC (change), or |mean_i - mean_{i-1}| / max(mean_{i-1},
/// kPercentageFloor) (percentage, zero for the first window).
std::vector<double> threshold_metric(ThresholdKind kind, const FeatureMatrix& features);

PresenceSeries apply_threshold_model(const ThresholdModel& model, std::span<const double> metric,
                                     std::span<const Timestamp> starts);

/// 0.5 W steps over (0, max metric] for absolute/change, 0.01 steps over
/// (0, 2] for percentage.
std::vector<double> default_threshold_grid(ThresholdKind kind, std::span<const double> metric);

struct ThresholdFit {
  double threshold = 0.0;
  double accuracy = 0.0;
};

/// Exhaustive scan; maximises overall accuracy against `truth`, ties go to
/// the smallest threshold. Throws std::invalid_argument on an empty grid or
/// misaligned truth.
ThresholdFit optimize_threshold(ThresholdKind kind, std::span<const double> metric,
                                const PresenceSeries& truth, std::span<const double> grid,
                                Presence initial_state = Presence::absent);

}  // namespace presence

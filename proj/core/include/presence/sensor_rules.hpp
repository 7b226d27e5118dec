#pragma once

#include <array>
#include <limits>
#include <span>
#include <vector>

#include "presence/trace.hpp"

namespace presence {

/// Closed distance interval [lo, hi] in meters; hi may be +infinity.
struct DistanceInterval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
};

struct UltrasonicConfig {
  /// Distances at which the seat counts as empty.
  std::vector<DistanceInterval> absence_intervals{{2.0, std::numeric_limits<double>::infinity()}};
  double sound_speed = 340.0;  // m/s

  void validate() const;
};

struct AccelConfig {
  double theta = 0.03;     // g
  std::size_t window = 60; // samples per sigma

  void validate() const;
};

struct WifiConfig {
  double delta = 3600.0;  // seconds

  void validate() const;
};

/// Echo round-trip time to distance: 0.5 * delta_t * sound_speed.
double ultrasonic_distance(double delta_t, const UltrasonicConfig& cfg = {});

/// Present exactly where the distance lies outside every absence interval.
PresenceSeries ultrasonic_rule(std::span<const Timestamp> times, std::span<const double> distances,
                               const UltrasonicConfig& cfg = {});

using Accel = std::array<double, 3>;

/// Population standard deviation of the acceleration magnitudes.
double accel_sigma(std::span<const Accel> samples);

/// sigma per consecutive block of cfg.window samples; a trailing block with
/// fewer than two samples is dropped. Returned starts are the block's first
/// timestamp.
std::pair<std::vector<Timestamp>, std::vector<double>> accel_sigmas(
    std::span<const Timestamp> times, std::span<const Accel> samples, const AccelConfig& cfg = {});

/// Present where sigma > theta.
PresenceSeries accel_rule(std::span<const Timestamp> starts, std::span<const double> sigmas,
                          const AccelConfig& cfg = {});

/// Present at t iff some observation t_o has |t - t_o| < delta.
PresenceSeries wifi_rule(std::span<const Timestamp> observations,
                         std::span<const Timestamp> queries, const WifiConfig& cfg = {});

// Per-window forms: each rule's output mapped onto windows [start, start + width).

/// Majority of the ultrasonic decisions inside each window.
PresenceSeries ultrasonic_windows(std::span<const Timestamp> times, std::span<const double> distances,
                                  std::span<const Timestamp> window_starts, std::int64_t width,
                                  const UltrasonicConfig& cfg = {});
/// Majority of the accel block decisions starting inside each window.
PresenceSeries accel_windows(std::span<const Timestamp> times, std::span<const Accel> samples,
                             std::span<const Timestamp> window_starts, std::int64_t width,
                             const AccelConfig& cfg = {});
/// Wifi rule queried at each window's midpoint.
PresenceSeries wifi_windows(std::span<const Timestamp> observations,
                            std::span<const Timestamp> window_starts, std::int64_t width,
                            const WifiConfig& cfg = {});

}  // namespace presence

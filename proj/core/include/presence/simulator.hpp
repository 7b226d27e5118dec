#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "presence/sensor_rules.hpp"
#include "presence/trace.hpp"

namespace presence {

enum class DeviceKind : std::uint8_t { desktop, monitor, laptop, lamp, charger };

std::string_view device_kind_name(DeviceKind k);

struct DeviceProfile {
  DeviceKind kind = DeviceKind::desktop;
  double active_power = 0.0;   // W while the user works with it
  double idle_power = 0.0;     // W when left on during an absence
  double ripple_sd_active = 0.0;
  double ripple_sd_idle = 0.0;
  double p_left_on_when_absent = 0.0;
  /// Chance the device is switched on for a given presence interval.
  double p_used_when_present = 1.0;
  /// Chance a device left on during an absence keeps running at its active
  /// level (background jobs), still with idle ripple.
  double p_busy_when_left_on = 0.0;
  /// Per-segment level multiplier drawn uniformly from [1 - spread, 1 + spread].
  double level_spread = 0.15;

  void validate() const;
  /// Typical office device of this kind (desktop ripple 8 W active, 1 W idle).
  static DeviceProfile typical(DeviceKind kind);
};

struct ScheduleParams {
  double arrival_mean_h = 9.5;
  double arrival_sd_h = 0.75;
  double departure_mean_h = 18.5;
  double departure_sd_h = 1.0;
  double midday_absence_rate_per_h = 0.2;
  double absence_mean_min = 30.0;
  // Passive stretches inside a presence (reading, calls): used devices sit idle.
  double passive_rate_per_h = 0.5;
  double passive_mean_min = 6.0;
};

struct UserProfile {
  std::string name;
  std::vector<DeviceProfile> devices;
  ScheduleParams schedule;
  int days = 30;
  Timestamp start = 1401667200;  // 2014-06-02T00:00:00Z
  std::int64_t truth_window = 60;

  /// Throws std::invalid_argument on an invalid profile.
  void validate() const;
  /// Long-run fraction of time present implied by the schedule parameters
  /// (alternating exponential presence/absence between arrival and departure).
  double expected_presence_fraction() const;
};

/// Canned profiles mirroring the office users 8, 17, 20 and 26; user 8 has
/// no desktop. Names: "user8", "user17", "user20", "user26".
UserProfile preset(std::string_view name);
std::vector<std::string> preset_names();

struct PresenceInterval {
  Timestamp begin = 0;  // inclusive, seconds
  Timestamp end = 0;    // exclusive
};

struct SimulatedUser {
  PowerTrace power;                       // 1 s resolution
  PresenceSeries truth;                   // per truth_window, majority of seconds
  std::vector<PresenceInterval> presence; // second-level ground truth
};

/// Deterministic for a given profile and seed.
SimulatedUser simulate_user(const UserProfile& profile, std::uint64_t seed);

struct SensorNoise {
  // ultrasonic, one reading per period seconds
  std::int64_t ultrasonic_period = 10;
  double desk_distance = 0.6;
  double desk_distance_sd = 0.08;
  double empty_distance = 3.0;
  double empty_distance_sd = 0.15;
  double p_obstacle_per_absence = 0.12;  // object left in front of the sensor
  double obstacle_distance = 1.2;
  double p_reading_glitch = 0.01;        // single reading jumps to the far wall
  double p_away_from_seat = 0.15;        // present window spent standing; sensor sees the wall

  // chair accelerometer, 1 Hz
  double accel_rest_sd = 0.004;          // g
  double p_movement_per_present_window = 0.75;
  double movement_sd = 0.08;             // g
  int movement_seconds = 20;
  double noisy_tail_fraction = 0.15;     // trailing share of the run with a bad sensor
  double noisy_tail_sd = 0.03;           // g

  // wifi association events
  double p_phone_on_day = 0.55;
  double wifi_events_per_hour = 2.0;
  bool wifi_event_every_present_window = false;

  /// No artifacts: readings follow the truth exactly, accel moves in every
  /// present window, wifi reports every present window.
  static SensorNoise clean();
};

struct SensorTraces {
  std::vector<Timestamp> ultrasonic_t;
  std::vector<double> ultrasonic_m;
  std::vector<Timestamp> accel_t;
  std::vector<Accel> accel;
  std::vector<Timestamp> wifi;
};

/// Sensor readings consistent with a per-window ground truth of the given width.
SensorTraces simulate_sensors(const PresenceSeries& truth, std::int64_t window_width,
                              std::uint64_t seed, const SensorNoise& noise = {});

}  // namespace presence

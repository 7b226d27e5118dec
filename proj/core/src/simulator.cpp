#include "presence/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detail/random.hpp"

namespace presence {

namespace {

constexpr std::int64_t kDay = 86400;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view device_kind_name(DeviceKind k) {
  switch (k) {
    case DeviceKind::desktop: return "desktop";
    case DeviceKind::monitor: return "monitor";
    case DeviceKind::laptop: return "laptop";
    case DeviceKind::lamp: return "lamp";
    case DeviceKind::charger: return "charger";
  }
  return "?";
}

void DeviceProfile::validate() const {
  if (!(idle_power >= 0.0) || !(active_power >= idle_power)) {
    throw std::invalid_argument("device: need active_power >= idle_power >= 0");
  }
  if (!(ripple_sd_active >= 0.0) || !(ripple_sd_idle >= 0.0)) {
    throw std::invalid_argument("device: ripple SDs must be non-negative");
  }
  if (!is_probability(p_left_on_when_absent) || !is_probability(p_used_when_present) ||
      !is_probability(p_busy_when_left_on)) {
    throw std::invalid_argument("device: probabilities must lie in [0, 1]");
  }
  if (!(level_spread >= 0.0 && level_spread < 1.0)) {
    throw std::invalid_argument("device: level_spread must lie in [0, 1)");
  }
}

DeviceProfile DeviceProfile::typical(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::desktop: return {kind, 85.0, 70.0, 8.0, 1.0, 0.5, 1.0, 0.5};
    case DeviceKind::monitor: return {kind, 25.0, 1.0, 1.5, 0.05, 0.3, 1.0, 0.0};
    case DeviceKind::laptop: return {kind, 35.0, 8.0, 5.0, 0.3, 0.15, 0.8, 0.3};
    case DeviceKind::lamp: return {kind, 10.0, 10.0, 0.2, 0.2, 0.1, 0.6, 0.0};
    case DeviceKind::charger: return {kind, 4.0, 4.0, 0.3, 0.3, 0.9, 0.7, 0.0};
  }
  return {};
}

void UserProfile::validate() const {
  for (const auto& d : devices) {
    d.validate();
  }
  const auto& s = schedule;
  if (!(s.arrival_mean_h < s.departure_mean_h)) {
    throw std::invalid_argument("profile: arrival must precede departure");
  }
  if (s.arrival_mean_h < 0.0 || s.departure_mean_h > 24.0) {
    throw std::invalid_argument("profile: schedule hours must lie in [0, 24]");
  }
  if (s.arrival_sd_h < 0.0 || s.departure_sd_h < 0.0 || s.midday_absence_rate_per_h < 0.0 ||
      !(s.absence_mean_min > 0.0) || s.passive_rate_per_h < 0.0 || !(s.passive_mean_min > 0.0)) {
    throw std::invalid_argument("profile: invalid schedule spread or absence parameters");
  }
  if (days < 1) {
    throw std::invalid_argument("profile: days must be at least 1");
  }
  if (truth_window <= 0 || kDay % truth_window != 0) {
    throw std::invalid_argument("profile: truth window must divide a day");
  }
}

double UserProfile::expected_presence_fraction() const {
  const auto& s = schedule;
  const double span = s.departure_mean_h - s.arrival_mean_h;
  const double leave = s.midday_absence_rate_per_h;
  const double back = 60.0 / s.absence_mean_min;
  const double settled = back / (leave + back);
  const double rate = leave + back;
  const double present_hours = settled * span + (1.0 - settled) * (1.0 - std::exp(-rate * span)) / rate;
  return present_hours / 24.0;
}

UserProfile preset(std::string_view name) {
  using K = DeviceKind;
  auto dev = [](K k) { return DeviceProfile::typical(k); };
  UserProfile p;
  p.name = std::string(name);
  if (name == "user8") {
    auto laptop = dev(K::laptop);
    laptop.p_used_when_present = 0.85;
    p.devices = {dev(K::monitor), laptop, dev(K::lamp), dev(K::charger)};
    p.schedule = {10.5, 1.0, 19.0, 1.0, 0.25, 30.0};
  } else if (name == "user17") {
    auto laptop = dev(K::laptop);
    laptop.p_used_when_present = 0.2;
    p.devices = {dev(K::desktop), dev(K::monitor), laptop, dev(K::lamp), dev(K::charger),
                 dev(K::charger)};
    p.schedule = {10.0, 0.75, 18.0, 1.0, 0.2, 40.0};
  } else if (name == "user20") {
    p.devices = {dev(K::desktop), dev(K::monitor), dev(K::monitor), dev(K::laptop),
                 dev(K::lamp),    dev(K::charger), dev(K::charger)};
    p.schedule = {9.5, 0.75, 18.5, 0.75, 0.2, 30.0};
  } else if (name == "user26") {
    p.devices = {dev(K::desktop), dev(K::monitor), dev(K::laptop), dev(K::lamp),
                 dev(K::charger), dev(K::charger)};
    p.schedule = {11.0, 1.0, 20.0, 1.0, 0.15, 45.0};
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return p;
}

std::vector<std::string> preset_names() { return {"user8", "user17", "user20", "user26"}; }

namespace {

std::vector<PresenceInterval> draw_presence(const UserProfile& profile, detail::Rng& rng) {
  const auto& s = profile.schedule;
  std::vector<PresenceInterval> out;
  for (int d = 0; d < profile.days; ++d) {
    const Timestamp day0 = profile.start + static_cast<Timestamp>(d) * kDay;
    const double arrive = std::clamp(rng.normal(s.arrival_mean_h, s.arrival_sd_h), 0.25, 23.5);
    const double leave =
        std::clamp(rng.normal(s.departure_mean_h, s.departure_sd_h), arrive + 0.5, 23.95);
    const Timestamp end = day0 + static_cast<Timestamp>(std::llround(leave * 3600.0));
    Timestamp cursor = day0 + static_cast<Timestamp>(std::llround(arrive * 3600.0));
    while (cursor < end) {
      Timestamp away = end;
      if (s.midday_absence_rate_per_h > 0.0) {
        const double gap_h = rng.exponential(1.0 / s.midday_absence_rate_per_h);
        away = std::min<Timestamp>(end, cursor + static_cast<Timestamp>(std::llround(gap_h * 3600.0)));
      }
      if (away > cursor) {
        out.push_back({cursor, away});
      }
      if (away >= end) {
        break;
      }
      const double dur_min = rng.exponential(s.absence_mean_min);
      cursor = away + std::max<Timestamp>(1, static_cast<Timestamp>(std::llround(dur_min * 60.0)));
    }
  }
  return out;
}

struct Segment {
  Timestamp begin = 0;
  Timestamp end = 0;
  bool present = false;
  bool passive = false;
  std::vector<bool> used;  // per device, fixed for a presence interval
};

void render(const Segment& seg, const UserProfile& profile, detail::Rng& rng,
            std::vector<PowerSample>& samples) {
  double level = 0.0;
  double var = 0.0;
  for (std::size_t k = 0; k < profile.devices.size(); ++k) {
    const auto& dev = profile.devices[k];
    const bool on = seg.present ? seg.used[k] : rng.bernoulli(dev.p_left_on_when_absent);
    if (!on) continue;
    const double scale = 1.0 + dev.level_spread * (2.0 * rng.uniform() - 1.0);
    const bool active = seg.present && !seg.passive;
    const bool busy = !seg.present && rng.bernoulli(dev.p_busy_when_left_on);
    level += scale * (active || busy ? dev.active_power : dev.idle_power);
    const double sd = active ? dev.ripple_sd_active : dev.ripple_sd_idle;
    var += sd * sd;
  }
  const double sd = std::sqrt(var);
  for (Timestamp t = seg.begin; t < seg.end; ++t) {
    const double w = sd > 0.0 ? std::max(0.0, level + sd * rng.normal()) : level;
    samples.push_back({t, w});
  }
}

}  // namespace

SimulatedUser simulate_user(const UserProfile& profile, std::uint64_t seed) {
  profile.validate();
  detail::Rng rng(seed);
  const Timestamp run_end = profile.start + static_cast<Timestamp>(profile.days) * kDay;
  const auto& sched = profile.schedule;

  auto presence = draw_presence(profile, rng);

  std::vector<PowerSample> samples;
  samples.reserve(static_cast<std::size_t>(run_end - profile.start));
  Timestamp cursor = profile.start;
  for (const auto& p : presence) {
    if (p.begin > cursor) {
      render({cursor, p.begin, false, false, {}}, profile, rng, samples);
    }
    Segment seg{p.begin, p.begin, true, false, {}};
    for (const auto& dev : profile.devices) {
      seg.used.push_back(rng.bernoulli(dev.p_used_when_present));
    }
    // Alternate engaged and passive stretches until the interval ends.
    while (seg.begin < p.end) {
      double minutes = 0.0;
      if (seg.passive) {
        minutes = rng.exponential(sched.passive_mean_min);
      } else if (sched.passive_rate_per_h > 0.0) {
        minutes = 60.0 * rng.exponential(1.0 / sched.passive_rate_per_h);
      } else {
        minutes = static_cast<double>(p.end - seg.begin) / 60.0;
      }
      const auto len = std::max<Timestamp>(1, static_cast<Timestamp>(std::llround(minutes * 60.0)));
      seg.end = std::min(p.end, seg.begin + len);
      render(seg, profile, rng, samples);
      seg.begin = seg.end;
      seg.passive = !seg.passive;
    }
    cursor = p.end;
  }
  if (cursor < run_end) {
    render({cursor, run_end, false, false, {}}, profile, rng, samples);
  }

  // Truth per window: present when at least half its seconds are.
  const std::int64_t w = profile.truth_window;
  const auto windows = static_cast<std::size_t>((run_end - profile.start) / w);
  std::vector<std::int64_t> present_seconds(windows, 0);
  for (const auto& p : presence) {
    for (Timestamp t = p.begin; t < p.end;) {
      const auto j = static_cast<std::size_t>((t - profile.start) / w);
      const Timestamp window_end = profile.start + static_cast<Timestamp>(j + 1) * w;
      const Timestamp stop = std::min(window_end, p.end);
      present_seconds[j] += stop - t;
      t = stop;
    }
  }
  std::vector<Timestamp> starts(windows);
  std::vector<Presence> states(windows);
  for (std::size_t j = 0; j < windows; ++j) {
    starts[j] = profile.start + static_cast<Timestamp>(j) * w;
    states[j] = 2 * present_seconds[j] >= w ? Presence::present : Presence::absent;
  }

  SimulatedUser out;
  out.power = PowerTrace(profile.name, std::move(samples), 1);
  out.truth = PresenceSeries(std::move(starts), std::move(states));
  out.presence = std::move(presence);
  return out;
}

SensorNoise SensorNoise::clean() {
  SensorNoise n;
  n.desk_distance_sd = 0.0;
  n.empty_distance_sd = 0.0;
  n.p_obstacle_per_absence = 0.0;
  n.p_reading_glitch = 0.0;
  n.p_away_from_seat = 0.0;
  n.accel_rest_sd = 0.0;
  n.p_movement_per_present_window = 1.0;
  n.movement_seconds = 1 << 30;
  n.noisy_tail_fraction = 0.0;
  n.p_phone_on_day = 1.0;
  n.wifi_event_every_present_window = true;
  return n;
}

SensorTraces simulate_sensors(const PresenceSeries& truth, std::int64_t window_width,
                              std::uint64_t seed, const SensorNoise& noise) {
  if (truth.empty()) {
    throw std::invalid_argument("sensor simulation needs a non-empty truth series");
  }
  if (window_width <= 0 || noise.ultrasonic_period <= 0) {
    throw std::invalid_argument("sensor simulation: widths and periods must be positive");
  }
  detail::Rng rng(seed);
  SensorTraces out;
  const auto starts = truth.window_starts();
  const std::size_t n = truth.size();
  const auto noisy_from =
      static_cast<std::size_t>(std::floor((1.0 - noise.noisy_tail_fraction) * static_cast<double>(n)));
  const Timestamp first = starts.front();

  bool obstacle = false;
  bool prev_present = true;
  std::int64_t phone_day = -1;
  bool phone_on = false;

  for (std::size_t j = 0; j < n; ++j) {
    const Timestamp t0 = starts[j];
    const bool present = truth[j] == Presence::present;
    if (!present && prev_present) {
      obstacle = rng.bernoulli(noise.p_obstacle_per_absence);
    }
    prev_present = present;

    // Ultrasonic: readings on a fixed grid, aligned to the run start.
    const bool away = present && rng.bernoulli(noise.p_away_from_seat);
    const std::int64_t period = noise.ultrasonic_period;
    Timestamp t = t0 + ((first - t0) % period + period) % period;
    for (; t < t0 + window_width; t += period) {
      double d = 0.0;
      if (present && !away) {
        d = rng.normal(noise.desk_distance, noise.desk_distance_sd);
      } else if (obstacle) {
        d = rng.normal(noise.obstacle_distance, 0.05);
      } else {
        d = rng.normal(noise.empty_distance, noise.empty_distance_sd);
      }
      if (noise.p_reading_glitch > 0.0 && rng.bernoulli(noise.p_reading_glitch)) {
        d = noise.empty_distance;
      }
      out.ultrasonic_t.push_back(t);
      out.ultrasonic_m.push_back(std::max(0.02, d));
    }

    // Accelerometer, 1 Hz.
    const bool moving = present && rng.bernoulli(noise.p_movement_per_present_window);
    std::int64_t move_begin = 0;
    std::int64_t move_end = 0;
    if (moving) {
      const std::int64_t len = std::min<std::int64_t>(noise.movement_seconds, window_width);
      move_begin = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(window_width - len + 1));
      move_end = move_begin + len;
    }
    const bool noisy = j >= noisy_from && noise.noisy_tail_fraction > 0.0;
    for (std::int64_t s = 0; s < window_width; ++s) {
      Accel a{0.0, 0.0, 1.0};
      if (noise.accel_rest_sd > 0.0) {
        for (double& c : a) c += noise.accel_rest_sd * rng.normal();
      }
      if (moving && s >= move_begin && s < move_end) {
        for (double& c : a) c += noise.movement_sd * rng.normal();
      }
      if (noisy) {
        for (double& c : a) c += noise.noisy_tail_sd * rng.normal();
      }
      out.accel_t.push_back(t0 + s);
      out.accel.push_back(a);
    }

    // Wifi association events.
    const std::int64_t day = (t0 - first) / kDay;
    if (day != phone_day) {
      phone_day = day;
      phone_on = rng.bernoulli(noise.p_phone_on_day);
    }
    if (present && phone_on) {
      if (noise.wifi_event_every_present_window) {
        out.wifi.push_back(t0 + window_width / 2);
      } else {
        const double p = noise.wifi_events_per_hour * static_cast<double>(window_width) / 3600.0;
        if (rng.bernoulli(p)) {
          out.wifi.push_back(t0 + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(window_width)));
        }
      }
    }
  }
  return out;
}

}  // namespace presence

#include "presence/sensor_rules.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace presence {

void UltrasonicConfig::validate() const {
  if (!(sound_speed > 0.0)) {
    throw std::invalid_argument("sound speed must be positive");
  }
  auto sorted = absence_intervals;
  std::sort(sorted.begin(), sorted.end(),
            [](const DistanceInterval& a, const DistanceInterval& b) { return a.lo < b.lo; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!(sorted[i].lo <= sorted[i].hi)) {
      throw std::invalid_argument("absence interval with lo > hi");
    }
    if (i > 0 && sorted[i].lo <= sorted[i - 1].hi) {
      throw std::invalid_argument("absence intervals overlap");
    }
  }
}

void AccelConfig::validate() const {
  if (!(theta > 0.0)) {
    throw std::invalid_argument("accel threshold must be positive");
  }
  if (window < 2) {
    throw std::invalid_argument("accel window needs at least two samples");
  }
}

void WifiConfig::validate() const {
  if (!(delta > 0.0)) {
    throw std::invalid_argument("wifi delta must be positive");
  }
}

double ultrasonic_distance(double delta_t, const UltrasonicConfig& cfg) {
  if (!(delta_t >= 0.0)) {
    throw std::invalid_argument("echo time must be non-negative");
  }
  return 0.5 * delta_t * cfg.sound_speed;
}

PresenceSeries ultrasonic_rule(std::span<const Timestamp> times, std::span<const double> distances,
                               const UltrasonicConfig& cfg) {
  cfg.validate();
  if (times.size() != distances.size()) {
    throw std::invalid_argument("ultrasonic: times and distances differ in length");
  }
  std::vector<Presence> states;
  states.reserve(distances.size());
  for (const double d : distances) {
    if (!std::isfinite(d)) {
      throw std::invalid_argument("ultrasonic: distance must be finite");
    }
    const bool absent = std::any_of(cfg.absence_intervals.begin(), cfg.absence_intervals.end(),
                                    [d](const DistanceInterval& a) { return d >= a.lo && d <= a.hi; });
    states.push_back(absent ? Presence::absent : Presence::present);
  }
  return {std::vector<Timestamp>(times.begin(), times.end()), std::move(states)};
}

double accel_sigma(std::span<const Accel> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("insufficient samples");
  }
  const double n = static_cast<double>(samples.size());
  std::vector<double> mag;
  mag.reserve(samples.size());
  double mu = 0.0;
  for (const auto& a : samples) {
    mag.push_back(std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]));
    mu += mag.back();
  }
  mu /= n;
  double ss = 0.0;
  for (const double m : mag) {
    ss += (m - mu) * (m - mu);
  }
  return std::sqrt(ss / n);
}

std::pair<std::vector<Timestamp>, std::vector<double>> accel_sigmas(
    std::span<const Timestamp> times, std::span<const Accel> samples, const AccelConfig& cfg) {
  cfg.validate();
  if (times.size() != samples.size()) {
    throw std::invalid_argument("accel: times and samples differ in length");
  }
  std::pair<std::vector<Timestamp>, std::vector<double>> out;
  for (std::size_t begin = 0; begin < samples.size(); begin += cfg.window) {
    const std::size_t len = std::min(cfg.window, samples.size() - begin);
    if (len < 2) {
      break;
    }
    out.first.push_back(times[begin]);
    out.second.push_back(accel_sigma(samples.subspan(begin, len)));
  }
  return out;
}

PresenceSeries accel_rule(std::span<const Timestamp> starts, std::span<const double> sigmas,
                          const AccelConfig& cfg) {
  cfg.validate();
  if (starts.size() != sigmas.size()) {
    throw std::invalid_argument("accel: starts and sigmas differ in length");
  }
  std::vector<Presence> states;
  states.reserve(sigmas.size());
  for (const double s : sigmas) {
    states.push_back(s > cfg.theta ? Presence::present : Presence::absent);
  }
  return {std::vector<Timestamp>(starts.begin(), starts.end()), std::move(states)};
}

PresenceSeries wifi_rule(std::span<const Timestamp> observations,
                         std::span<const Timestamp> queries, const WifiConfig& cfg) {
  cfg.validate();
  if (!std::is_sorted(observations.begin(), observations.end()) ||
      !std::is_sorted(queries.begin(), queries.end())) {
    throw std::invalid_argument("wifi: timestamps must be sorted");
  }
  std::vector<Presence> states;
  states.reserve(queries.size());
  for (const Timestamp t : queries) {
    // Nearest observations on either side decide.
    const auto it = std::lower_bound(observations.begin(), observations.end(), t);
    bool present = false;
    if (it != observations.end() && static_cast<double>(*it - t) < cfg.delta) {
      present = true;
    }
    if (it != observations.begin() && static_cast<double>(t - *(it - 1)) < cfg.delta) {
      present = true;
    }
    states.push_back(present ? Presence::present : Presence::absent);
  }
  return {std::vector<Timestamp>(queries.begin(), queries.end()), std::move(states)};
}

PresenceSeries ultrasonic_windows(std::span<const Timestamp> times, std::span<const double> distances,
                                  std::span<const Timestamp> window_starts, std::int64_t width,
                                  const UltrasonicConfig& cfg) {
  return align_to_windows(ultrasonic_rule(times, distances, cfg), window_starts, width);
}

PresenceSeries accel_windows(std::span<const Timestamp> times, std::span<const Accel> samples,
                             std::span<const Timestamp> window_starts, std::int64_t width,
                             const AccelConfig& cfg) {
  const auto [starts, sigmas] = accel_sigmas(times, samples, cfg);
  return align_to_windows(accel_rule(starts, sigmas, cfg), window_starts, width);
}

PresenceSeries wifi_windows(std::span<const Timestamp> observations,
                            std::span<const Timestamp> window_starts, std::int64_t width,
                            const WifiConfig& cfg) {
  std::vector<Timestamp> mid(window_starts.begin(), window_starts.end());
  for (auto& t : mid) {
    t += width / 2;
  }
  const auto at_mid = wifi_rule(observations, mid, cfg);
  return {std::vector<Timestamp>(window_starts.begin(), window_starts.end()),
          std::vector<Presence>(at_mid.states().begin(), at_mid.states().end())};
}

}  // namespace presence

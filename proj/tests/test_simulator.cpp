#include <gtest/gtest.h>

#include <algorithm>

#include "presence/evalkit.hpp"
#include "presence/features.hpp"
#include "presence/sensor_rules.hpp"
#include "presence/simulator.hpp"

using namespace presence;

namespace {

UserProfile quiet_profile() {
  UserProfile p = preset("user17");
  p.days = 3;
  p.devices = {DeviceProfile::typical(DeviceKind::desktop)};
  auto& d = p.devices.front();
  d.ripple_sd_active = 0.0;
  d.ripple_sd_idle = 0.0;
  d.level_spread = 0.0;
  d.p_left_on_when_absent = 0.0;
  d.p_used_when_present = 1.0;
  p.schedule.passive_rate_per_h = 0.0;
  return p;
}

}  // namespace

TEST(Simulator, Deterministic) {
  auto p = preset("user20");
  p.days = 2;
  const auto a = simulate_user(p, 11);
  const auto b = simulate_user(p, 11);
  ASSERT_EQ(a.power.size(), b.power.size());
  for (std::size_t i = 0; i < a.power.size(); ++i) {
    ASSERT_EQ(a.power.samples()[i].watts, b.power.samples()[i].watts);
  }
  EXPECT_EQ(a.truth, b.truth);
  const auto c = simulate_user(p, 12);
  EXPECT_NE(a.truth, c.truth);
}

TEST(Simulator, ShapeAndPresets) {
  for (const auto& name : preset_names()) {
    auto p = preset(name);
    p.days = 1;
    const auto u = simulate_user(p, 1);
    EXPECT_EQ(u.power.size(), 86400u);
    EXPECT_EQ(u.truth.size(), 1440u);
  }
  EXPECT_THROW(preset("user99"), std::invalid_argument);
  const auto eight = preset("user8");
  EXPECT_TRUE(std::none_of(eight.devices.begin(), eight.devices.end(),
                           [](const DeviceProfile& d) { return d.kind == DeviceKind::desktop; }));
}

TEST(Simulator, NoiseFreeTraceSteps) {
  const auto p = quiet_profile();
  const auto u = simulate_user(p, 2);
  const auto s = u.power.samples();
  const double level = p.devices.front().active_power;
  for (const auto& iv : u.presence) {
    const auto i = static_cast<std::size_t>(iv.begin - p.start);
    ASSERT_GT(i, 0u);
    EXPECT_EQ(s[i].watts, level);
    EXPECT_EQ(s[i - 1].watts, 0.0);
    const auto j = static_cast<std::size_t>(iv.end - p.start);
    if (j < s.size()) {
      EXPECT_EQ(s[j].watts, 0.0);
      EXPECT_EQ(s[j - 1].watts, level);
    }
  }
  // piecewise constant: the only changes happen at transitions
  std::size_t changes = 0;
  for (std::size_t i = 1; i < s.size(); ++i) changes += s[i].watts != s[i - 1].watts ? 1 : 0;
  EXPECT_EQ(changes, 2 * u.presence.size());
}

TEST(Simulator, AbsencePowerBimodal) {
  auto p = quiet_profile();
  p.days = 20;
  p.devices.front().p_left_on_when_absent = 0.5;
  p.devices.front().p_busy_when_left_on = 0.0;
  const auto u = simulate_user(p, 3);
  std::size_t off = 0, idle = 0, other = 0;
  const auto s = u.power.samples();
  std::size_t k = 0;
  for (const auto& iv : u.presence) {
    for (; s[k].t < iv.begin; ++k) {
      if (s[k].watts == 0.0) ++off;
      else if (s[k].watts == p.devices.front().idle_power) ++idle;
      else ++other;
    }
    k = static_cast<std::size_t>(iv.end - p.start);
  }
  EXPECT_EQ(other, 0u);
  EXPECT_GT(off, s.size() / 20);
  EXPECT_GT(idle, s.size() / 20);
}

TEST(Simulator, PresenceFractionMatchesSchedule) {
  auto p = preset("user20");
  p.days = 60;
  const auto u = simulate_user(p, 5);
  const auto st = u.truth.states();
  const double frac = static_cast<double>(std::count(st.begin(), st.end(), Presence::present)) /
                      static_cast<double>(st.size());
  EXPECT_NEAR(frac, p.expected_presence_fraction(), 0.03);
}

TEST(Simulator, RippleSeparatesClasses) {
  auto p = preset("user17");
  p.days = 5;
  const auto u = simulate_user(p, 6);
  const auto fm = build_views(u.power, WindowSpec{});
  const auto truth = align_to_windows(u.truth, fm.window_starts(), 60);
  std::vector<double> pres, abs;
  for (std::size_t i = 0; i < fm.rows() && (pres.size() < 500 || abs.size() < 500); i += 3) {
    auto& v = truth[i] == Presence::present ? pres : abs;
    if (v.size() < 500) v.push_back(fm.row(i).values.sd);
  }
  ASSERT_EQ(pres.size(), 500u);
  ASSERT_EQ(abs.size(), 500u);
  // Mann-Whitney U with the normal approximation.
  double ustat = 0.0;
  for (const double x : pres) {
    for (const double y : abs) ustat += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  const double n = 500.0;
  const double z = (ustat - n * n / 2.0) / std::sqrt(n * n * (2.0 * n + 1.0) / 12.0);
  EXPECT_GT(z, 2.326);
}

TEST(Simulator, ValidationErrors) {
  auto p = preset("user8");
  p.days = 0;
  EXPECT_THROW(simulate_user(p, 1), std::invalid_argument);
  p = preset("user8");
  p.devices.front().p_left_on_when_absent = 2.0;
  EXPECT_THROW(simulate_user(p, 1), std::invalid_argument);
}

TEST(Sensors, CleanChannelRecoversTruth) {
  auto p = preset("user26");
  p.days = 3;
  const auto u = simulate_user(p, 7);
  const auto s = simulate_sensors(u.truth, 60, 8, SensorNoise::clean());
  const auto starts = u.truth.window_starts();
  EXPECT_EQ(ultrasonic_windows(s.ultrasonic_t, s.ultrasonic_m, starts, 60), u.truth);
  EXPECT_EQ(accel_windows(s.accel_t, s.accel, starts, 60), u.truth);
  const auto again = simulate_sensors(u.truth, 60, 8, SensorNoise::clean());
  EXPECT_EQ(again.wifi, s.wifi);
  EXPECT_EQ(again.ultrasonic_m, s.ultrasonic_m);
}

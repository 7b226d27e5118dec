#include <gtest/gtest.h>

#include <random>

#include "presence/error.hpp"
#include "presence/evalkit.hpp"

using namespace presence;

namespace {

constexpr auto A = Presence::absent;
constexpr auto P = Presence::present;

PresenceSeries series(std::vector<Presence> s, Timestamp start = 0, Timestamp step = 60) {
  std::vector<Timestamp> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = start + static_cast<Timestamp>(i) * step;
  return {t, std::move(s)};
}

}  // namespace

TEST(Rates, Examples) {
  const auto r = detection_rates(series({A, A, P, P}), series({A, P, P, P}));
  EXPECT_DOUBLE_EQ(r.absence_rate, 1.0);
  EXPECT_DOUBLE_EQ(r.presence_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.overall, 0.75);
  EXPECT_EQ(r.absent_windows, 1u);
  EXPECT_EQ(r.present_windows, 3u);

  const auto only = detection_rates(series({A, P}), series({A, A}));
  EXPECT_TRUE(only.presence_undefined);
  EXPECT_DOUBLE_EQ(only.presence_rate, 1.0);
  EXPECT_DOUBLE_EQ(only.absence_rate, 0.5);

  EXPECT_THROW(detection_rates(series({A}), series({A, A})), DataError);
}

TEST(Rates, WeightedIdentityAndSwap) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<Presence> p(n), t(n), pf(n), tf(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng() % 2 ? P : A;
      t[i] = rng() % 2 ? P : A;
      pf[i] = p[i] == P ? A : P;
      tf[i] = t[i] == P ? A : P;
    }
    const auto r = detection_rates(series(p), series(t));
    const double weighted = (static_cast<double>(r.absent_windows) * r.absence_rate +
                             static_cast<double>(r.present_windows) * r.presence_rate) /
                            static_cast<double>(n);
    EXPECT_NEAR(r.overall, weighted, 1e-12);
    const auto s = detection_rates(series(pf), series(tf));
    EXPECT_DOUBLE_EQ(s.absence_rate, r.presence_rate);
    EXPECT_DOUBLE_EQ(s.presence_rate, r.absence_rate);
    EXPECT_DOUBLE_EQ(s.overall, r.overall);
  }
}

TEST(Hourly, ScheduleShape) {
  // one day of minutes, present 9:00-20:00
  std::vector<Presence> s(1440);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = i >= 9 * 60 && i < 20 * 60 ? P : A;
  const auto h = hourly_absence(series(s));
  for (int hr = 0; hr < 24; ++hr) {
    EXPECT_EQ(h.windows[hr], 60u);
    EXPECT_DOUBLE_EQ(h.fraction[hr], hr >= 9 && hr < 20 ? 0.0 : 1.0);
  }
  const auto shifted = hourly_absence(series(s), 2 * 3600);
  EXPECT_DOUBLE_EQ(shifted.fraction[10], 1.0);
  EXPECT_DOUBLE_EQ(shifted.fraction[11], 0.0);
  EXPECT_DOUBLE_EQ(shifted.fraction[21], 0.0);
  EXPECT_DOUBLE_EQ(shifted.fraction[22], 1.0);
}

TEST(Hourly, EmptyHours) {
  const auto h = hourly_absence(series({A, P}, 3 * 3600));
  EXPECT_FALSE(h.empty[3]);
  EXPECT_TRUE(h.empty[4]);
  EXPECT_EQ(h.fraction[4], 0.0);
  EXPECT_DOUBLE_EQ(h.fraction[3], 0.5);
  EXPECT_THROW(hourly_absence(PresenceSeries{}), DataError);
}

TEST(Curve, RequiresKeptLabelings) {
  IterationDiagnostics diag;
  EXPECT_THROW(iteration_curve(diag, series({A})), std::invalid_argument);
}

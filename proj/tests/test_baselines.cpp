#include <gtest/gtest.h>

#include <random>

#include "presence/baselines.hpp"
#include "presence/evalkit.hpp"
#include "presence/simulator.hpp"

using namespace presence;

namespace {

std::vector<Timestamp> minutes(std::size_t n) {
  std::vector<Timestamp> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<Timestamp>(60 * i);
  return t;
}

std::vector<Presence> states(const PresenceSeries& s) { return {s.states().begin(), s.states().end()}; }

constexpr auto A = Presence::absent;
constexpr auto P = Presence::present;

}  // namespace

TEST(Absolute, Examples) {
  const std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(states(infer_absolute(zeros, minutes(5), 5.0)), std::vector<Presence>(5, A));
  const std::vector<double> x{10, 60, 10};
  EXPECT_EQ(states(infer_absolute(x, minutes(3), 30.0)), (std::vector<Presence>{A, P, A}));
  EXPECT_EQ(states(infer_absolute(x, minutes(3), 5.0)), std::vector<Presence>(3, P));
  EXPECT_THROW(infer_absolute(x, minutes(3), 0.0), std::invalid_argument);
}

TEST(Absolute, MonotoneInThreshold) {
  std::mt19937_64 rng(1);
  std::vector<double> x(300);
  for (auto& v : x) v = static_cast<double>(rng() % 1000) / 7.0;
  const auto t = minutes(300);
  auto prev = infer_absolute(x, t, 0.5);
  for (double th = 1.0; th < 150.0; th += 0.5) {
    const auto cur = infer_absolute(x, t, th);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (prev[i] == A) EXPECT_EQ(cur[i], A);
    }
    prev = cur;
  }
}

TEST(Transition, Examples) {
  const std::vector<double> quiet(6, 1.0);
  EXPECT_EQ(states(infer_transition(quiet, minutes(6), 5.0, P)), std::vector<Presence>(6, P));
  const std::vector<double> two{0, 9, 0, 0, 9, 0};
  EXPECT_EQ(states(infer_transition(two, minutes(6), 5.0, A)), (std::vector<Presence>{A, P, P, P, A, A}));
}

TEST(Transition, SquareWaveRecovered) {
  // 10 W / 100 W square wave; the change metric fires on edges only.
  std::vector<Presence> truth;
  std::vector<double> power;
  for (int block = 0; block < 8; ++block) {
    for (int i = 0; i < 5; ++i) {
      truth.push_back(block % 2 ? P : A);
      power.push_back(block % 2 ? 100.0 : 10.0);
    }
  }
  std::vector<double> change(power.size(), 0.0);
  for (std::size_t i = 1; i < power.size(); ++i) change[i] = std::abs(power[i] - power[i - 1]);
  EXPECT_EQ(states(infer_transition(change, minutes(power.size()), 45.0, A)), truth);
}

TEST(Transition, TogglesOncePerExceedance) {
  std::mt19937_64 rng(2);
  std::vector<double> x(500);
  for (auto& v : x) v = static_cast<double>(rng() % 100);
  const auto s = infer_transition(x, minutes(500), 80.0, A);
  std::size_t toggles = 0, exceed = 0;
  Presence state = A;
  for (std::size_t i = 0; i < x.size(); ++i) {
    exceed += x[i] > 80.0 ? 1 : 0;
    if (s[i] != state) ++toggles;
    state = s[i];
  }
  EXPECT_EQ(toggles, exceed);
}

TEST(Optimize, SeparableTwoLevel) {
  std::vector<double> x;
  std::vector<Presence> truth;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i % 3 ? 10.0 : 100.0);
    truth.push_back(i % 3 ? A : P);
  }
  const PresenceSeries t(minutes(40), truth);
  const auto grid = default_threshold_grid(ThresholdKind::absolute, x);
  const auto fit = optimize_threshold(ThresholdKind::absolute, x, t, grid);
  EXPECT_EQ(fit.accuracy, 1.0);
  EXPECT_EQ(fit.threshold, 10.0);  // first grid point with 10 < th
}

TEST(Optimize, SingleClassTruth) {
  const std::vector<double> x{1, 5, 9, 13};
  const PresenceSeries t(minutes(4), std::vector<Presence>(4, A));
  const auto fit = optimize_threshold(ThresholdKind::absolute, x, t, std::vector<double>{0.5, 4.0, 20.0});
  EXPECT_EQ(fit.accuracy, 1.0);
  EXPECT_EQ(fit.threshold, 20.0);
}

TEST(Optimize, BestOverFullRescan) {
  std::mt19937_64 rng(3);
  std::vector<double> x(400);
  std::vector<Presence> truth(400);
  for (std::size_t i = 0; i < 400; ++i) {
    truth[i] = rng() % 2 ? P : A;
    x[i] = (truth[i] == P ? 60.0 : 30.0) + static_cast<double>(rng() % 40);
  }
  const PresenceSeries t(minutes(400), truth);
  for (const auto kind : {ThresholdKind::absolute, ThresholdKind::change, ThresholdKind::percentage}) {
    const auto grid = default_threshold_grid(kind, x);
    const auto fit = optimize_threshold(kind, x, t, grid);
    for (const double th : grid) {
      const auto s = apply_threshold_model({kind, th, A}, x, t.window_starts());
      EXPECT_LE(detection_rates(s, t).overall, fit.accuracy);
    }
  }
  EXPECT_THROW(optimize_threshold(ThresholdKind::absolute, x, t, std::vector<double>{}), std::invalid_argument);
}

TEST(Metric, PercentageDefinition) {
  std::vector<FeatureRow> rows(3);
  rows[0].window_start = 0;
  rows[0].values.mean_power = 0.0;
  rows[1].window_start = 60;
  rows[1].values.mean_power = 50.0;
  rows[2].window_start = 120;
  rows[2].values.mean_power = 25.0;
  const FeatureMatrix fm(rows, default_views());
  const auto m = threshold_metric(ThresholdKind::percentage, fm);
  EXPECT_EQ(m[0], 0.0);
  EXPECT_DOUBLE_EQ(m[1], 50.0 / kPercentageFloor);
  EXPECT_DOUBLE_EQ(m[2], 0.5);
  EXPECT_EQ(parse_threshold_kind("change"), ThresholdKind::change);
  EXPECT_THROW(parse_threshold_kind("median"), std::invalid_argument);
}

TEST(Baselines, AbsoluteBeatsChangeOnUser17) {
  auto profile = preset("user17");
  profile.days = 10;
  const auto sim = simulate_user(profile, 4);
  const auto fm = build_views(sim.power, WindowSpec{});
  const auto truth = align_to_windows(sim.truth, fm.window_starts(), 60);
  double acc[2];
  int k = 0;
  for (const auto kind : {ThresholdKind::absolute, ThresholdKind::change}) {
    const auto metric = threshold_metric(kind, fm);
    acc[k++] = optimize_threshold(kind, metric, truth, default_threshold_grid(kind, metric)).accuracy;
  }
  EXPECT_GT(acc[0], acc[1]);
}

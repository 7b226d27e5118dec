#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "presence/selftrain.hpp"
#include "presence/simulator.hpp"

using namespace presence;

namespace {

constexpr Timestamp kMonday = 1401667200;  // midnight UTC

std::vector<Timestamp> hourly(int hours) {
  std::vector<Timestamp> t;
  for (int h = 0; h < hours; ++h) t.push_back(kMonday + 3600 * h);
  return t;
}

LabelPartition random_partition(std::mt19937_64& rng, std::size_t n) {
  std::vector<Label> l(n);
  for (auto& x : l) x = static_cast<Label>(rng() % 3);
  return LabelPartition(l);
}

}  // namespace

TEST(PriorSchedule, PaperScheduleCounts) {
  const auto p = init_from_prior(PriorSchedule(), hourly(24));
  EXPECT_EQ(p.l1_size(), 11u);
  EXPECT_EQ(p.l2_size(), 13u);
  EXPECT_EQ(p.u_size(), 0u);
  std::vector<Timestamp> day;
  for (int m = 9 * 60; m < 20 * 60; ++m) day.push_back(kMonday + 60 * m);
  EXPECT_EQ(init_from_prior(PriorSchedule(), day).l1_size(), day.size());
}

TEST(PriorSchedule, ParseShiftWrap) {
  EXPECT_EQ(PriorSchedule::parse("9-20").to_string(), PriorSchedule().to_string());
  EXPECT_EQ(PriorSchedule::parse("22-2").to_string(), "110000000000000000000011");
  EXPECT_EQ(PriorSchedule().shifted(2).to_string(), PriorSchedule::present_between(11, 22).to_string());
  EXPECT_EQ(PriorSchedule().shifted(-2).to_string(), PriorSchedule::present_between(7, 18).to_string());
  EXPECT_THROW(PriorSchedule::parse("nine"), std::invalid_argument);
  const auto local = PriorSchedule::present_between(9, 20, 3600);
  EXPECT_EQ(local.at(kMonday + 8 * 3600), Presence::present);
  EXPECT_EQ(PriorSchedule().at(kMonday + 8 * 3600), Presence::absent);
}

TEST(SelfTrainConfig, Validation) {
  SelfTrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha1 = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.max_iter = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.epsilon_grid_step = 0.2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(UpdateLabels, AlphaZeroIsIntersection) {
  std::mt19937_64 rng(1);
  SamplingRng s(1);
  for (int t = 0; t < 100; ++t) {
    const auto prev = random_partition(rng, 200);
    const auto next = random_partition(rng, 200);
    const auto out = update_labels(prev, next, 0.0, 0.0, s);
    for (std::size_t i = 0; i < 200; ++i) {
      const Label want = (prev[i] == next[i]) ? prev[i] : Label::unlabeled;
      EXPECT_EQ(out[i], want);
    }
  }
}

TEST(UpdateLabels, AlphaOneIsUnion) {
  std::mt19937_64 rng(2);
  SamplingRng s(2);
  for (int t = 0; t < 100; ++t) {
    const auto prev = random_partition(rng, 200);
    const auto next = random_partition(rng, 200);
    const auto out = update_labels(prev, next, 1.0, 1.0, s);
    for (std::size_t i = 0; i < 200; ++i) {
      if (prev[i] == next[i]) {
        EXPECT_EQ(out[i], prev[i]);
      } else if (next[i] != Label::unlabeled) {
        EXPECT_EQ(out[i], next[i]);  // both contested classes sampled: new label wins
      } else {
        EXPECT_EQ(out[i], prev[i]);  // only the old class contests it
      }
    }
  }
}

TEST(UpdateLabels, SampledFractionConcentrates) {
  // 10^4 indices moving from l1 to unlabeled: each stays with probability alpha1.
  const std::size_t n = 10000;
  const LabelPartition prev(std::vector<Label>(n, Label::present));
  const LabelPartition next(std::vector<Label>(n, Label::unlabeled));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplingRng s(seed);
    const auto out = update_labels(prev, next, 0.5, 0.5, s);
    const double kept = static_cast<double>(out.l1_size()) / static_cast<double>(n);
    EXPECT_NEAR(kept, 0.5, 0.02);
  }
}

TEST(UpdateLabels, UnlabeledFlag) {
  const LabelPartition prev(std::vector<Label>{Label::unlabeled, Label::unlabeled});
  const LabelPartition next(std::vector<Label>{Label::present, Label::absent});
  SamplingRng s(0);
  const auto keep = update_labels(prev, next, 1.0, 1.0, s, false);
  EXPECT_EQ(keep.u_size(), 2u);
  const auto take = update_labels(prev, next, 1.0, 1.0, s, true);
  EXPECT_EQ(take, next);
  EXPECT_THROW(update_labels(prev, LabelPartition(std::vector<Label>(3)), 0.5, 0.5, s),
               std::invalid_argument);
}

TEST(UpdateLabels, DeterministicForSeed) {
  std::mt19937_64 rng(3);
  const auto prev = random_partition(rng, 500);
  const auto next = random_partition(rng, 500);
  SamplingRng a(42), b(42);
  EXPECT_EQ(update_labels(prev, next, 0.3, 0.7, a), update_labels(prev, next, 0.3, 0.7, b));
}

TEST(Noise, PerfectClassifierFixedPoint) {
  for (const double alpha : {0.0, 0.3, 1.0}) {
    oracle::NoiseCase c;
    ASSERT_TRUE(oracle::make_noise_case(1e4, 0.0, 0.2, alpha, alpha, 0.4, 0.1, c));
    PriorQuantities prior;
    prior.class1_total = c.class1_total;
    prior.type1_tracks_epsilon = true;
    const SetSizes k{c.k.a + c.k.b, c.k.c + c.k.d, c.k.e + c.k.f};
    const auto est = estimate_noise(k, {c.l1_next, c.l2_next, c.u_next}, alpha, alpha, prior);
    EXPECT_EQ(est.epsilon_hat, 0.0);
    EXPECT_LT(est.residual, 1e-6);
  }
}

TEST(Noise, RecoversEpsilonTen) {
  oracle::NoiseCase c;
  ASSERT_TRUE(oracle::make_noise_case(1e4, 0.10, 0.2, 0.5, 0.5, 0.45, 0.0, c));
  PriorQuantities prior;
  prior.class1_total = c.class1_total;
  prior.type1_tracks_epsilon = true;
  const auto est = estimate_noise({c.k.a + c.k.b, c.k.c + c.k.d, c.k.e + c.k.f},
                                  {c.l1_next, c.l2_next, c.u_next}, 0.5, 0.5, prior);
  EXPECT_GE(est.epsilon_hat, 0.095);
  EXPECT_LE(est.epsilon_hat, 0.105);
  const auto& h = est.counts_hat;
  EXPECT_DOUBLE_EQ(est.eta_hat, (h.b + h.d) / (h.a + h.b + h.c + h.d));
  EXPECT_NEAR(h.a + h.b, c.k.a + c.k.b, 1e-6);
  EXPECT_NEAR(h.c + h.d, c.k.c + c.k.d, 1e-6);
  EXPECT_NEAR(h.e + h.f, c.k.e + c.k.f, 1e-6);
  EXPECT_NEAR(est.eta_hat, 0.2, 0.02);
}

TEST(Noise, ExplicitRatesAsPriors) {
  oracle::NoiseCase c;
  ASSERT_TRUE(oracle::make_noise_case(1e4, 0.2, 0.25, 0.4, 0.6, 0.5, 0.2, c));
  PriorQuantities prior;
  prior.type1_rate = c.k.d / (c.k.a + c.k.d);
  prior.type2_rate = c.k.b / (c.k.b + c.k.c);
  const auto est = estimate_noise({c.k.a + c.k.b, c.k.c + c.k.d, c.k.e + c.k.f},
                                  {c.l1_next, c.l2_next, c.u_next}, 0.4, 0.6, prior);
  EXPECT_NEAR(est.epsilon_hat, 0.2, 0.005 + 1e-12);
}

TEST(Noise, InputValidation) {
  PriorQuantities one;
  one.class1_total = 10;
  EXPECT_THROW(estimate_noise({5, 5, 0}, {5, 5, 0}, 0.5, 0.5, one), std::invalid_argument);
  PriorQuantities both;
  both.class1_total = 10;
  both.type1_rate = 0.1;
  EXPECT_THROW(estimate_noise({5, 5, 0}, {5, 4, 0}, 0.5, 0.5, both), std::invalid_argument);
}

TEST(Noise, AdvanceMatchesRecurrences) {
  const NoiseCounts k{100, 20, 300, 30, 40, 60};
  const auto n = k.advance(0.15, 0.3, 0.8);
  const auto o = oracle::recur({100, 20, 300, 30, 40, 60}, 0.15, 0.3, 0.8);
  EXPECT_DOUBLE_EQ(n.a, o.a);
  EXPECT_DOUBLE_EQ(n.b, o.b);
  EXPECT_DOUBLE_EQ(n.c, o.c);
  EXPECT_DOUBLE_EQ(n.d, o.d);
  EXPECT_NEAR(n.a + n.b + n.c + n.d + n.e + n.f, 550.0, 1e-9);
}

TEST(Stopping, Metric) {
  EXPECT_EQ(stopping_metric(100, 0.3, 100, 0.3), 0.0);
  EXPECT_NEAR(stopping_metric(100, 0.3, 120, 0.25), 14.0, 1e-12);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> eta(0.0, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double m0 = static_cast<double>(rng() % 1000), m1 = static_cast<double>(rng() % 1000);
    const double e0 = eta(rng), e1 = eta(rng);
    EXPECT_EQ(stopping_metric(m0, e0, m1, e1) > 0.0, pac_utility(m1, e1) > pac_utility(m0, e0));
  }
}

TEST(RateSearch, Examples) {
  RateSearchState s;
  s.counts = {400, 50, 400, 50, 50, 50};
  s.epsilon_hat = 0.1;
  s.u_prev = 0.0;
  s.alpha1 = 0.3;
  s.alpha2 = 0.7;
  EXPECT_EQ(search_rates(s), (std::pair{0.3, 0.7}));

  s.epsilon_hat = 0.5;
  EXPECT_FALSE(search_rates(s).has_value());

  // Only the largest labeled set can beat this bar.
  s.epsilon_hat = 0.05;
  s.u_prev = predicted_utility(s, 1.0, 1.0) - 1e-9;
  bool others_fail = true;
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      if (i == 10 && j == 10) continue;
      if (predicted_utility(s, i / 10.0, j / 10.0) > s.u_prev) others_fail = false;
    }
  }
  ASSERT_TRUE(others_fail);
  EXPECT_EQ(search_rates(s), (std::pair{1.0, 1.0}));

  s.u_prev = 1e12;
  EXPECT_FALSE(search_rates(s).has_value());
}

namespace {

// Synthetic separable trace: present windows high power and ripple.
FeatureMatrix schedule_matched(const PriorSchedule& sched, int days) {
  std::vector<FeatureRow> rows;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int m = 0; m < days * 1440; ++m) {
    const Timestamp t = kMonday + 60 * m;
    const bool present = sched.at(t) == Presence::present;
    FeatureRow r;
    r.window_start = t;
    r.values.mean_power = (present ? 120.0 : 20.0) + g(rng);
    r.values.mac = (present ? 25.0 : 2.0) + 0.5 * g(rng);
    r.values.mad = (present ? 9.0 : 0.8) + 0.2 * g(rng);
    r.values.mahd = r.values.mad;
    r.values.sd = (present ? 8.0 : 0.5) + 0.2 * g(rng);
    rows.push_back(r);
  }
  return {std::move(rows), default_views()};
}

void check_identities(const IterationDiagnostics& d) {
  ASSERT_FALSE(d.rows.empty());
  double prev = 0.0;
  for (const auto& r : d.rows) {
    EXPECT_EQ(r.u_k, pac_utility(static_cast<double>(r.l1 + r.l2), r.eta_hat));
    EXPECT_EQ(r.phi, r.u_k - prev);
    EXPECT_EQ(r.phi > 0.0, r.u_k > prev);
    EXPECT_EQ(r.stop_indicator, r.phi <= 0.0 && r.iter > 0);
    prev = r.u_k;
  }
}

}  // namespace

TEST(RunPresenceSense, ScheduleMatchedFixedPoint) {
  const PriorSchedule sched;
  const auto fm = schedule_matched(sched, 3);
  SelfTrainConfig cfg;
  const auto res = run_presence_sense(fm, sched, cfg);
  const auto starts = fm.window_starts();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    ASSERT_EQ(res.presence[i], sched.at(starts[i]));
  }
  ASSERT_GE(res.diagnostics.rows.size(), 2u);
  const auto& r1 = res.diagnostics.rows[1];
  EXPECT_EQ(r1.u, 0u);
  EXPECT_EQ(r1.eps_hat, 0.0);
  EXPECT_TRUE(res.diagnostics.rows.back().stop_indicator);
  EXPECT_EQ(res.diagnostics.rows.size(), 3u);
  check_identities(res.diagnostics);
}

TEST(RunPresenceSense, DeterministicAndBestIterate) {
  auto profile = preset("user8");
  profile.days = 6;
  const auto sim = simulate_user(profile, 3);
  const auto fm = build_views(sim.power, WindowSpec{});
  SelfTrainConfig cfg;
  cfg.seed = 9;
  cfg.keep_labelings = true;
  cfg.stop_on_negative_phi = false;
  cfg.max_iter = 8;
  const auto a = run_presence_sense(fm, PriorSchedule(), cfg);
  const auto b = run_presence_sense(fm, PriorSchedule(), cfg);
  EXPECT_EQ(a.presence, b.presence);
  ASSERT_EQ(a.diagnostics.rows.size(), b.diagnostics.rows.size());
  for (std::size_t i = 0; i < a.diagnostics.rows.size(); ++i) {
    EXPECT_EQ(a.diagnostics.rows[i].u_k, b.diagnostics.rows[i].u_k);
    EXPECT_EQ(a.diagnostics.rows[i].l1, b.diagnostics.rows[i].l1);
  }
  check_identities(a.diagnostics);
  EXPECT_EQ(a.diagnostics.rows.size(), 9u);
  EXPECT_EQ(a.diagnostics.termination, Termination::max_iter);
  const auto best = static_cast<std::size_t>(a.diagnostics.best_iter);
  for (const auto& r : a.diagnostics.rows) {
    if (r.adopted) EXPECT_LE(r.u_k, a.diagnostics.rows[best].u_k);
  }
  ASSERT_TRUE(a.diagnostics.labelings[best].has_value());
  EXPECT_EQ(*a.diagnostics.labelings[best], a.presence);
}

TEST(RunPresenceSense, RateSearchKeepsIdentities) {
  auto profile = preset("user20");
  profile.days = 4;
  const auto sim = simulate_user(profile, 5);
  const auto fm = build_views(sim.power, WindowSpec{});
  SelfTrainConfig cfg;
  cfg.rate_search = true;
  const auto res = run_presence_sense(fm, PriorSchedule(), cfg);
  check_identities(res.diagnostics);
  for (const auto& r : res.diagnostics.rows) {
    EXPECT_GE(r.alpha1, 0.0);
    EXPECT_LE(r.alpha1, 1.0);
  }
}

TEST(RunPresenceSense, DegenerateLabelingCarriesDiagnostics) {
  // Everything inside the prior's present hours: class 2 is empty.
  std::vector<FeatureRow> rows;
  for (int m = 10 * 60; m < 12 * 60; ++m) {
    FeatureRow r;
    r.window_start = kMonday + 60 * m;
    r.values = {50.0 + m % 7, 3.0, 1.0, 1.0, 1.0};
    rows.push_back(r);
  }
  const FeatureMatrix fm(rows, default_views());
  try {
    run_presence_sense(fm, PriorSchedule(), SelfTrainConfig{});
    FAIL() << "expected SelfTrainError";
  } catch (const SelfTrainError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate labeling"), std::string::npos);
    EXPECT_EQ(e.diagnostics().rows.size(), 1u);
  }
}

#include "presence/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace presence {

std::string_view threshold_kind_name(ThresholdKind k) {
  switch (k) {
    case ThresholdKind::absolute: return "absolute";
    case ThresholdKind::change: return "change";
    case ThresholdKind::percentage: return "percentage";
  }
  return "?";
}

ThresholdKind parse_threshold_kind(std::string_view name) {
  for (const auto k : {ThresholdKind::absolute, ThresholdKind::change, ThresholdKind::percentage}) {
    if (threshold_kind_name(k) == name) {
      return k;
    }
  }
  throw std::invalid_argument("unknown threshold model '" + std::string(name) + "'");
}

namespace {

void check(std::span<const double> metric, std::span<const Timestamp> starts, double threshold) {
  if (metric.size() != starts.size()) {
    throw std::invalid_argument("threshold model: metric and window starts differ in length");
  }
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("threshold must be positive");
  }
}

std::vector<Timestamp> copy(std::span<const Timestamp> s) { return {s.begin(), s.end()}; }

}  // namespace

PresenceSeries infer_absolute(std::span<const double> metric, std::span<const Timestamp> starts,
                              double threshold) {
  check(metric, starts, threshold);
  std::vector<Presence> states;
  states.reserve(metric.size());
  for (const double m : metric) {
    states.push_back(m > threshold ? Presence::present : Presence::absent);
  }
  return {copy(starts), std::move(states)};
}

PresenceSeries infer_transition(std::span<const double> metric,
                                std::span<const Timestamp> starts, double threshold,
                                Presence initial) {
  check(metric, starts, threshold);
  std::vector<Presence> states;
  states.reserve(metric.size());
  Presence state = initial;
  for (const double m : metric) {
    if (m > threshold) {
      state = state == Presence::present ? Presence::absent : Presence::present;
    }
    states.push_back(state);
  }
  return {copy(starts), std::move(states)};
}

std::vector<double> threshold_metric(ThresholdKind kind, const FeatureMatrix& features) {
  std::vector<double> out;
  out.reserve(features.rows());
  const auto rows = features.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    switch (kind) {
      case ThresholdKind::absolute:
        out.push_back(rows[i].values.mean_power);
        break;
      case ThresholdKind::change:
        out.push_back(rows[i].values.mac);
        break;
      case ThresholdKind::percentage: {
        if (i == 0) {
          out.push_back(0.0);
          break;
        }
        const double prev = rows[i - 1].values.mean_power;
        const double cur = rows[i].values.mean_power;
        out.push_back(std::abs(cur - prev) / std::max(prev, kPercentageFloor));
        break;
      }
    }
  }
  return out;
}

PresenceSeries apply_threshold_model(const ThresholdModel& model, std::span<const double> metric,
                                     std::span<const Timestamp> starts) {
  if (model.kind == ThresholdKind::absolute) {
    return infer_absolute(metric, starts, model.threshold);
  }
  return infer_transition(metric, starts, model.threshold, model.initial_state);
}

std::vector<double> default_threshold_grid(ThresholdKind kind, std::span<const double> metric) {
  std::vector<double> grid;
  if (kind == ThresholdKind::percentage) {
    for (int i = 1; i <= 200; ++i) {
      grid.push_back(i * 0.01);
    }
    return grid;
  }
  const double top = metric.empty() ? 0.0 : *std::max_element(metric.begin(), metric.end());
  const auto steps = static_cast<int>(std::floor(top / 0.5));
  for (int i = 1; i <= std::max(steps, 1); ++i) {
    grid.push_back(i * 0.5);
  }
  return grid;
}

ThresholdFit optimize_threshold(ThresholdKind kind, std::span<const double> metric,
                                const PresenceSeries& truth, std::span<const double> grid,
                                Presence initial_state) {
  if (grid.empty()) {
    throw std::invalid_argument("empty threshold grid");
  }
  if (truth.size() != metric.size()) {
    throw std::invalid_argument("truth is not aligned with the features");
  }
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  const auto starts = truth.window_starts();
  const auto want = truth.states();
  ThresholdFit best{sorted.front(), -1.0};
  for (const double th : sorted) {
    const auto pred =
        apply_threshold_model({kind, th, initial_state}, metric, starts);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < want.size(); ++i) {
      hits += pred[i] == want[i] ? 1 : 0;
    }
    const double acc = want.empty() ? 1.0 : static_cast<double>(hits) / want.size();
    if (acc > best.accuracy) {
      best = {th, acc};
    }
  }
  return best;
}

}  // namespace presence

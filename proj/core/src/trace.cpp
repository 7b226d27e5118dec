#include "presence/trace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "presence/error.hpp"

namespace presence {

PowerTrace::PowerTrace(std::string user_id, std::vector<PowerSample> samples,
                       std::int64_t nominal_period)
    : user_id_(std::move(user_id)), samples_(std::move(samples)), nominal_period_(nominal_period) {
  if (nominal_period_ <= 0) {
    throw std::invalid_argument("nominal period must be positive");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double w = samples_[i].watts;
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("power must be finite and non-negative (sample " +
                                  std::to_string(i) + ")");
    }
    if (i > 0 && samples_[i].t <= samples_[i - 1].t) {
      throw std::invalid_argument("timestamps must be strictly increasing (sample " +
                                  std::to_string(i) + ")");
    }
  }
}

std::vector<Window> windowize(const PowerTrace& trace, const WindowSpec& spec) {
  if (trace.empty()) {
    throw DataError("empty input");
  }
  const std::int64_t period = trace.nominal_period();
  if (spec.stride <= 0 || spec.width <= 0) {
    throw std::invalid_argument("window width and stride must be positive");
  }
  if (spec.width < 2 * period) {
    throw std::invalid_argument("window too small");
  }
  if (spec.width % period != 0) {
    throw std::invalid_argument("window width must be a multiple of the sampling period");
  }

  const auto samples = trace.samples();
  const Timestamp t0 = samples.front().t;
  const std::int64_t span = samples.back().t - t0 + period;
  std::vector<Window> out;
  if (span < spec.width) {
    return out;
  }
  const std::int64_t count = (span - spec.width) / spec.stride + 1;
  const auto expected = static_cast<std::size_t>(spec.width / period);
  out.reserve(static_cast<std::size_t>(count));

  auto first = samples.begin();
  for (std::int64_t j = 0; j < count; ++j) {
    const Timestamp start = t0 + j * spec.stride;
    const Timestamp end = start + spec.width;
    first = std::lower_bound(first, samples.end(), start,
                             [](const PowerSample& s, Timestamp t) { return s.t < t; });
    auto last = std::lower_bound(first, samples.end(), end,
                                 [](const PowerSample& s, Timestamp t) { return s.t < t; });
    const auto n = static_cast<std::size_t>(last - first);
    if (n < 2) {
      continue;
    }
    Window w;
    w.start = start;
    w.power.reserve(n);
    for (auto it = first; it != last; ++it) {
      w.power.push_back(it->watts);
    }
    w.gapped = n < expected;
    out.push_back(std::move(w));
  }
  return out;
}

PresenceSeries::PresenceSeries(std::vector<Timestamp> window_starts, std::vector<Presence> states)
    : starts_(std::move(window_starts)), states_(std::move(states)) {
  if (starts_.size() != states_.size()) {
    throw std::invalid_argument("presence series: window_starts and states differ in length");
  }
  for (std::size_t i = 1; i < starts_.size(); ++i) {
    if (starts_[i] <= starts_[i - 1]) {
      throw std::invalid_argument("presence series: window starts must be increasing");
    }
  }
}

PresenceSeries align_to_windows(const PresenceSeries& points,
                                std::span<const Timestamp> window_starts, std::int64_t width) {
  const auto t = points.window_starts();
  const auto s = points.states();
  std::vector<Presence> out;
  out.reserve(window_starts.size());
  auto it = t.begin();
  for (const Timestamp start : window_starts) {
    it = std::lower_bound(it, t.end(), start);
    auto end = std::lower_bound(it, t.end(), start + width);
    std::size_t present = 0;
    std::size_t total = 0;
    for (auto p = it; p != end; ++p) {
      ++total;
      if (s[static_cast<std::size_t>(p - t.begin())] == Presence::present) {
        ++present;
      }
    }
    out.push_back(total > 0 && 2 * present >= total ? Presence::present : Presence::absent);
  }
  return {std::vector<Timestamp>(window_starts.begin(), window_starts.end()), std::move(out)};
}

LabelPartition::LabelPartition(std::vector<Label> labels) : labels_(std::move(labels)) {
  for (const Label l : labels_) {
    if (l == Label::present) {
      ++n1_;
    } else if (l == Label::absent) {
      ++n2_;
    }
  }
}

LabelPartition LabelPartition::from_sets(std::span<const std::size_t> l1,
                                         std::span<const std::size_t> l2,
                                         std::span<const std::size_t> u, std::size_t n_total) {
  std::vector<Label> labels(n_total, Label::unlabeled);
  std::vector<bool> seen(n_total, false);
  auto assign = [&](std::span<const std::size_t> set, Label label) {
    for (const std::size_t i : set) {
      if (i >= n_total) {
        throw std::invalid_argument("label partition: index out of range");
      }
      if (seen[i]) {
        throw std::invalid_argument("label partition: sets overlap");
      }
      seen[i] = true;
      labels[i] = label;
    }
  };
  assign(l1, Label::present);
  assign(l2, Label::absent);
  assign(u, Label::unlabeled);
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw std::invalid_argument("label partition: sets do not cover every index");
  }
  return LabelPartition(std::move(labels));
}

std::vector<std::size_t> LabelPartition::indices_of(Label label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace presence

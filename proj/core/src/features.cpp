#include "presence/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace presence {

namespace {

void require_two(std::span<const double> w) {
  if (w.size() < 2) {
    throw std::invalid_argument("insufficient samples");
  }
}

}  // namespace

double mac(std::span<const double> window) {
  require_two(window);
  double best = 0.0;
  for (std::size_t i = 1; i < window.size(); ++i) {
    best = std::max(best, std::abs(window[i] - window[i - 1]));
  }
  return best;
}

double mad(std::span<const double> window) {
  require_two(window);
  double sum = 0.0;
  double largest = 0.0;
  for (std::size_t i = 1; i < window.size(); ++i) {
    const double d = std::abs(window[i] - window[i - 1]);
    sum += d;
    largest = std::max(largest, d);
  }
  // Rounding in the sum can push the mean one ulp past the max.
  return std::min(sum / static_cast<double>(window.size() - 1), largest);
}

std::vector<std::size_t> change_points(std::span<const double> window) {
  require_two(window);
  const std::size_t n = window.size();
  std::vector<std::size_t> points{0};
  // Walk plateaus: [run_begin, run_end) holds equal values.
  std::size_t prev_begin = 0;
  std::size_t run_begin = 0;
  while (run_begin < n) {
    std::size_t run_end = run_begin + 1;
    while (run_end < n && window[run_end] == window[run_begin]) {
      ++run_end;
    }
    if (run_begin > 0 && run_end < n) {
      const double before = window[prev_begin];
      const double here = window[run_begin];
      const double after = window[run_end];
      if ((here > before && here > after) || (here < before && here < after)) {
        points.push_back(run_begin);
      }
    }
    prev_begin = run_begin;
    run_begin = run_end;
  }
  if (points.back() != n - 1) {
    points.push_back(n - 1);
  }
  return points;
}

double mahd(std::span<const double> window) {
  const auto cp = change_points(window);
  double sum = 0.0;
  for (std::size_t i = 1; i < cp.size(); ++i) {
    sum += std::abs(window[cp[i]] - window[cp[i - 1]]);
  }
  return sum / static_cast<double>(cp.size() - 1);
}

double mean_power(std::span<const double> window) {
  require_two(window);
  double sum = 0.0;
  for (const double x : window) {
    sum += x;
  }
  return sum / static_cast<double>(window.size());
}

double sd(std::span<const double> window) {
  const double m = mean_power(window);
  double ss = 0.0;
  for (const double x : window) {
    ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / static_cast<double>(window.size() - 1));
}

std::string_view view_name(View v) {
  switch (v) {
    case View::mean_power: return "mean_power";
    case View::mac: return "mac";
    case View::mad: return "mad";
    case View::mahd: return "mahd";
    case View::sd: return "sd";
  }
  return "?";
}

std::optional<View> parse_view(std::string_view name) {
  for (const View v : kAllViews) {
    if (view_name(v) == name) {
      return v;
    }
  }
  return std::nullopt;
}

std::vector<View> parse_views(std::string_view list) {
  std::vector<View> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    auto token = list.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    const auto v = parse_view(token);
    if (!v) {
      throw std::invalid_argument("unknown view '" + std::string(token) + "'");
    }
    out.push_back(*v);
    if (comma == std::string_view::npos) {
      break;
    }
    list.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<View> default_views() {
  return {View::mean_power, View::mac, View::mad, View::sd};
}

double FeatureVector::get(View v) const {
  switch (v) {
    case View::mean_power: return mean_power;
    case View::mac: return mac;
    case View::mad: return mad;
    case View::mahd: return mahd;
    case View::sd: return sd;
  }
  return 0.0;
}

FeatureVector compute_features(std::span<const double> window) {
  return {presence::mean_power(window), presence::mac(window), presence::mad(window),
          presence::mahd(window), presence::sd(window)};
}

FeatureMatrix::FeatureMatrix(std::vector<FeatureRow> rows, std::vector<View> views)
    : rows_(std::move(rows)), views_(std::move(views)) {
  if (views_.size() < 2) {
    throw std::invalid_argument("at least two views are required");
  }
  for (std::size_t i = 0; i < views_.size(); ++i) {
    for (std::size_t j = i + 1; j < views_.size(); ++j) {
      if (views_[i] == views_[j]) {
        throw std::invalid_argument("view '" + std::string(view_name(views_[i])) +
                                    "' selected twice");
      }
    }
  }
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  const View v = views_.at(j);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) {
    out.push_back(r.values.get(v));
  }
  return out;
}

std::vector<Timestamp> FeatureMatrix::window_starts() const {
  std::vector<Timestamp> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) {
    out.push_back(r.window_start);
  }
  return out;
}

FeatureMatrix build_views(const PowerTrace& trace, const WindowSpec& spec,
                          std::vector<View> views) {
  const auto windows = windowize(trace, spec);
  std::vector<FeatureRow> rows;
  rows.reserve(windows.size());
  for (const auto& w : windows) {
    rows.push_back({w.start, compute_features(w.power), w.gapped});
  }
  return FeatureMatrix(std::move(rows), std::move(views));
}

}  // namespace presence

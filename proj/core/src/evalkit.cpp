#include "presence/evalkit.hpp"

#include <stdexcept>

#include "presence/error.hpp"

namespace presence {

DetectionRates detection_rates(const PresenceSeries& pred, const PresenceSeries& truth) {
  if (pred.size() != truth.size()) {
    throw DataError("prediction and truth differ in length (" + std::to_string(pred.size()) +
                    " vs " + std::to_string(truth.size()) + ")");
  }
  std::size_t absent = 0;
  std::size_t present = 0;
  std::size_t absent_hit = 0;
  std::size_t present_hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Presence::absent) {
      ++absent;
      absent_hit += pred[i] == Presence::absent ? 1 : 0;
    } else {
      ++present;
      present_hit += pred[i] == Presence::present ? 1 : 0;
    }
  }
  DetectionRates r;
  r.absent_windows = absent;
  r.present_windows = present;
  r.absence_undefined = absent == 0;
  r.presence_undefined = present == 0;
  r.absence_rate = absent == 0 ? 1.0 : static_cast<double>(absent_hit) / static_cast<double>(absent);
  r.presence_rate =
      present == 0 ? 1.0 : static_cast<double>(present_hit) / static_cast<double>(present);
  const std::size_t n = absent + present;
  r.overall = n == 0 ? 1.0 : static_cast<double>(absent_hit + present_hit) / static_cast<double>(n);
  return r;
}

HourlyAbsence hourly_absence(const PresenceSeries& series, std::int64_t utc_offset_seconds) {
  if (series.empty()) {
    throw DataError("empty input");
  }
  const PriorSchedule clock(std::array<Presence, 24>{}, utc_offset_seconds);
  HourlyAbsence h;
  std::array<std::size_t, 24> absent{};
  const auto starts = series.window_starts();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto hour = static_cast<std::size_t>(clock.hour_of_day(starts[i]));
    ++h.windows[hour];
    absent[hour] += series[i] == Presence::absent ? 1 : 0;
  }
  for (std::size_t k = 0; k < 24; ++k) {
    h.empty[k] = h.windows[k] == 0;
    h.fraction[k] =
        h.empty[k] ? 0.0 : static_cast<double>(absent[k]) / static_cast<double>(h.windows[k]);
  }
  return h;
}

std::vector<CurvePoint> iteration_curve(const IterationDiagnostics& diag,
                                        const PresenceSeries& truth) {
  if (diag.labelings.empty()) {
    throw std::invalid_argument("run did not retain per-iteration labelings");
  }
  std::vector<CurvePoint> curve;
  for (std::size_t k = 0; k < diag.rows.size() && k < diag.labelings.size(); ++k) {
    if (!diag.labelings[k]) {
      continue;
    }
    const auto rates = detection_rates(*diag.labelings[k], truth);
    curve.push_back({diag.rows[k].iter, 1.0 - rates.overall, diag.rows[k].stop_indicator});
  }
  return curve;
}

}  // namespace presence

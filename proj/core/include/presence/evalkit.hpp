#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presence/selftrain.hpp"
#include "presence/trace.hpp"

namespace presence {

/// Per-class and overall accuracy against ground truth.
struct DetectionRates {
  double absence_rate = 1.0;   // correct among truly absent windows
  double presence_rate = 1.0;  // correct among truly present windows
  double overall = 1.0;
  std::size_t absent_windows = 0;
  std::size_t present_windows = 0;
  /// A class missing from the truth has its rate reported as 1.0.
  bool absence_undefined = false;
  bool presence_undefined = false;
};

/// Throws DataError on a length mismatch.
DetectionRates detection_rates(const PresenceSeries& pred, const PresenceSeries& truth);

struct HourlyAbsence {
  std::array<double, 24> fraction{};   // share of the hour's windows marked absent
  std::array<std::size_t, 24> windows{};
  /// Hours without any window; their fraction is reported as 0.
  std::array<bool, 24> empty{};
};

/// Throws DataError on an empty series.
HourlyAbsence hourly_absence(const PresenceSeries& series, std::int64_t utc_offset_seconds = 0);

struct CurvePoint {
  int iter = 0;
  double misclassification = 0.0;
  bool stop_indicator = false;
};

/// Misclassification (1 - overall rate) of every iteration with a retained
/// labeling. Throws std::invalid_argument when the run kept no labelings.
std::vector<CurvePoint> iteration_curve(const IterationDiagnostics& diag,
                                        const PresenceSeries& truth);

}  // namespace presence

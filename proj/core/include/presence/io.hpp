#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "presence/features.hpp"
#include "presence/selftrain.hpp"
#include "presence/sensor_rules.hpp"
#include "presence/trace.hpp"

namespace presence::io {

/// ISO-8601 (`2014-06-02T09:30:00`, optional fraction and `Z`/`+hh:mm`) or
/// integer epoch seconds; fractions are truncated. Throws std::invalid_argument.
Timestamp parse_timestamp(std::string_view text);

/// Days since 1970-01-01 of a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d);

std::string format_iso8601(Timestamp t);

// Readers throw DataError naming the source and line ("power.csv:12: ...");
// an input without data rows throws DataError("empty input").

PowerTrace read_power_csv(std::istream& in, const std::string& source, std::string user_id = {},
                          std::int64_t nominal_period = 1);
PowerTrace read_power_csv(const std::filesystem::path& path, std::int64_t nominal_period = 1);
void write_power_csv(std::ostream& out, const PowerTrace& trace);

PresenceSeries read_presence_csv(std::istream& in, const std::string& source);
PresenceSeries read_presence_csv(const std::filesystem::path& path);
void write_presence_csv(std::ostream& out, const PresenceSeries& series);

FeatureMatrix read_features_csv(std::istream& in, const std::string& source,
                                std::vector<View> views = default_views());
FeatureMatrix read_features_csv(const std::filesystem::path& path,
                                std::vector<View> views = default_views());
/// All five features are written regardless of the selected views.
void write_features_csv(std::ostream& out, const FeatureMatrix& features);

void write_diagnostics_csv(std::ostream& out, const IterationDiagnostics& diag);

struct UltrasonicLog {
  std::vector<Timestamp> t;
  std::vector<double> distance_m;
};
struct AccelLog {
  std::vector<Timestamp> t;
  std::vector<Accel> accel;
};

UltrasonicLog read_ultrasonic_csv(const std::filesystem::path& path);
AccelLog read_accel_csv(const std::filesystem::path& path);
std::vector<Timestamp> read_wifi_csv(const std::filesystem::path& path);
void write_ultrasonic_csv(std::ostream& out, std::span<const Timestamp> t,
                          std::span<const double> distance_m);
void write_accel_csv(std::ostream& out, std::span<const Timestamp> t, std::span<const Accel> a);
void write_wifi_csv(std::ostream& out, std::span<const Timestamp> t);

/// Writes `content` to `path`, throwing DataError when the file cannot be opened.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace presence::io

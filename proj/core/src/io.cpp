#include "presence/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "presence/error.hpp"

namespace presence::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

class CsvReader {
public:
  CsvReader(std::istream& in, std::string source, std::string_view header)
      : in_(in), source_(std::move(source)) {
    if (!next_line()) {
      throw DataError(source_ + ": empty input");
    }
    if (trim(line_) != header) {
      fail(fmt::format("expected header '{}'", header));
    }
  }

  /// Next non-blank data row; false at end of input.
  bool next(std::vector<std::string_view>& fields, std::size_t expected) {
    if (!next_line()) return false;
    fields = split(line_);
    if (fields.size() != expected) {
      fail(fmt::format("expected {} fields, found {}", expected, fields.size()));
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(fmt::format("{}:{}: {}", source_, line_no_, what));
  }

  double number(std::string_view s) const {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
      fail(fmt::format("malformed number '{}'", s));
    }
    return v;
  }

  Timestamp timestamp(std::string_view s) const {
    try {
      return parse_timestamp(s);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }

  const std::string& source() const { return source_; }

private:
  bool next_line() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!trim(line_).empty()) return true;
    }
    return false;
  }

  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError(fmt::format("{}: cannot open file", path.string()));
  }
  return in;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool digits(std::string_view s, std::size_t pos, std::size_t n, std::int64_t& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  return true;
}

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw std::invalid_argument(fmt::format("malformed timestamp '{}'", text));
}

}  // namespace

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2 ? 1 : 0;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Timestamp parse_timestamp(std::string_view text) {
  const auto s = trim(text);
  if (s.empty()) bad_timestamp(text);

  std::int64_t v = 0;
  if (s.find('-', 1) == std::string_view::npos && s.find(':') == std::string_view::npos) {
    const auto dot = s.find('.');
    const auto whole = s.substr(0, dot);
    if (!parse_int(whole, v)) bad_timestamp(text);
    if (dot != std::string_view::npos) {
      const auto frac = s.substr(dot + 1);
      std::int64_t ignored = 0;
      if (frac.empty() || !digits(frac, 0, frac.size(), ignored)) bad_timestamp(text);
      // truncation toward negative infinity keeps "-0.5" at -1
      if (!whole.empty() && whole.front() == '-' && ignored != 0) --v;
    }
    return v;
  }

  std::int64_t y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  if (!digits(s, 0, 4, y) || s.size() < 19 || s[4] != '-' || !digits(s, 5, 2, mo) || s[7] != '-' ||
      !digits(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') || !digits(s, 11, 2, h) ||
      s[13] != ':' || !digits(s, 14, 2, mi) || s[16] != ':' || !digits(s, 17, 2, se)) {
    bad_timestamp(text);
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) bad_timestamp(text);

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const auto start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) bad_timestamp(text);
  }
  std::int64_t offset = 0;
  if (pos < s.size()) {
    const auto zone = s.substr(pos);
    std::int64_t oh = 0, om = 0;
    if (zone == "Z") {
      offset = 0;
    } else if ((zone[0] == '+' || zone[0] == '-') && zone.size() == 6 && digits(zone, 1, 2, oh) &&
               zone[3] == ':' && digits(zone, 4, 2, om)) {
      offset = (oh * 3600 + om * 60) * (zone[0] == '-' ? -1 : 1);
    } else {
      bad_timestamp(text);
    }
  }
  return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + se - offset;
}

std::string format_iso8601(Timestamp t) {
  std::int64_t days = t / 86400;
  std::int64_t secs = t % 86400;
  if (secs < 0) {
    secs += 86400;
    --days;
  }
  // inverse of days_from_civil
  const std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2 ? 1 : 0);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", y, m, d, secs / 3600, secs / 60 % 60,
                     secs % 60);
}

PowerTrace read_power_csv(std::istream& in, const std::string& source, std::string user_id,
                          std::int64_t nominal_period) {
  CsvReader csv(in, source, "timestamp,watts");
  std::vector<PowerSample> samples;
  std::vector<std::string_view> f;
  while (csv.next(f, 2)) {
    const Timestamp t = csv.timestamp(f[0]);
    const double w = csv.number(f[1]);
    if (!std::isfinite(w) || w < 0.0) {
      csv.fail("power must be finite and non-negative");
    }
    if (!samples.empty() && t <= samples.back().t) {
      csv.fail("timestamps must be strictly increasing");
    }
    samples.push_back({t, w});
  }
  if (samples.empty()) {
    throw DataError(source + ": empty input");
  }
  return PowerTrace(std::move(user_id), std::move(samples), nominal_period);
}

PowerTrace read_power_csv(const std::filesystem::path& path, std::int64_t nominal_period) {
  auto in = open_input(path);
  return read_power_csv(in, path.string(), path.stem().string(), nominal_period);
}

void write_power_csv(std::ostream& out, const PowerTrace& trace) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "timestamp,watts\n");
  for (const auto& s : trace.samples()) {
    fmt::format_to(std::back_inserter(buf), "{},{}\n", s.t, s.watts);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

PresenceSeries read_presence_csv(std::istream& in, const std::string& source) {
  CsvReader csv(in, source, "window_start,state");
  std::vector<Timestamp> starts;
  std::vector<Presence> states;
  std::vector<std::string_view> f;
  while (csv.next(f, 2)) {
    const Timestamp t = csv.timestamp(f[0]);
    if (!starts.empty() && t <= starts.back()) {
      csv.fail("window starts must be strictly increasing");
    }
    Presence p = Presence::absent;
    if (f[1] == "1" || f[1] == "present") {
      p = Presence::present;
    } else if (f[1] != "0" && f[1] != "absent") {
      csv.fail(fmt::format("unknown state '{}'", f[1]));
    }
    starts.push_back(t);
    states.push_back(p);
  }
  if (starts.empty()) {
    throw DataError(source + ": empty input");
  }
  return {std::move(starts), std::move(states)};
}

PresenceSeries read_presence_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_presence_csv(in, path.string());
}

void write_presence_csv(std::ostream& out, const PresenceSeries& series) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "window_start,state\n");
  const auto starts = series.window_starts();
  for (std::size_t i = 0; i < series.size(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{},{}\n", starts[i],
                   series[i] == Presence::present ? 1 : 0);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

FeatureMatrix read_features_csv(std::istream& in, const std::string& source,
                                std::vector<View> views) {
  CsvReader csv(in, source, "window_start,mean_power,mac,mad,mahd,sd");
  std::vector<FeatureRow> rows;
  std::vector<std::string_view> f;
  while (csv.next(f, 6)) {
    FeatureRow r;
    r.window_start = csv.timestamp(f[0]);
    if (!rows.empty() && r.window_start <= rows.back().window_start) {
      csv.fail("window starts must be strictly increasing");
    }
    r.values = {csv.number(f[1]), csv.number(f[2]), csv.number(f[3]), csv.number(f[4]),
                csv.number(f[5])};
    rows.push_back(r);
  }
  if (rows.empty()) {
    throw DataError(source + ": empty input");
  }
  return {std::move(rows), std::move(views)};
}

FeatureMatrix read_features_csv(const std::filesystem::path& path, std::vector<View> views) {
  auto in = open_input(path);
  return read_features_csv(in, path.string(), std::move(views));
}

void write_features_csv(std::ostream& out, const FeatureMatrix& features) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "window_start,mean_power,mac,mad,mahd,sd\n");
  for (const auto& r : features.data()) {
    const auto& v = r.values;
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{}\n", r.window_start, v.mean_power,
                   v.mac, v.mad, v.mahd, v.sd);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_diagnostics_csv(std::ostream& out, const IterationDiagnostics& diag) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "iter,l1,l2,u,eps_hat,eta_hat,u_k,phi,stopped\n");
  for (const auto& r : diag.rows) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{},{},{}\n", r.iter, r.l1, r.l2,
                   r.u, r.eps_hat ? fmt::format("{}", *r.eps_hat) : std::string(), r.eta_hat,
                   r.u_k, r.phi, r.stop_indicator ? 1 : 0);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

UltrasonicLog read_ultrasonic_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  CsvReader csv(in, path.string(), "timestamp,distance_m");
  UltrasonicLog log;
  std::vector<std::string_view> f;
  while (csv.next(f, 2)) {
    log.t.push_back(csv.timestamp(f[0]));
    log.distance_m.push_back(csv.number(f[1]));
  }
  if (log.t.empty()) throw DataError(path.string() + ": empty input");
  return log;
}

AccelLog read_accel_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  CsvReader csv(in, path.string(), "timestamp,ax,ay,az");
  AccelLog log;
  std::vector<std::string_view> f;
  while (csv.next(f, 4)) {
    log.t.push_back(csv.timestamp(f[0]));
    log.accel.push_back({csv.number(f[1]), csv.number(f[2]), csv.number(f[3])});
  }
  if (log.t.empty()) throw DataError(path.string() + ": empty input");
  return log;
}

std::vector<Timestamp> read_wifi_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  CsvReader csv(in, path.string(), "timestamp");
  std::vector<Timestamp> t;
  std::vector<std::string_view> f;
  while (csv.next(f, 1)) {
    t.push_back(csv.timestamp(f[0]));
  }
  return t;
}

void write_ultrasonic_csv(std::ostream& out, std::span<const Timestamp> t,
                          std::span<const double> distance_m) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "timestamp,distance_m\n");
  for (std::size_t i = 0; i < t.size(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{},{}\n", t[i], distance_m[i]);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_accel_csv(std::ostream& out, std::span<const Timestamp> t, std::span<const Accel> a) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "timestamp,ax,ay,az\n");
  for (std::size_t i = 0; i < t.size(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", t[i], a[i][0], a[i][1], a[i][2]);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_wifi_csv(std::ostream& out, std::span<const Timestamp> t) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "timestamp\n");
  for (const auto ts : t) {
    fmt::format_to(std::back_inserter(buf), "{}\n", ts);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError(fmt::format("{}: cannot open file for writing", path.string()));
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace presence::io

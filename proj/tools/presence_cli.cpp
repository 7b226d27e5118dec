#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "presence/baselines.hpp"
#include "presence/error.hpp"
#include "presence/evalkit.hpp"
#include "presence/features.hpp"
#include "presence/io.hpp"
#include "presence/selftrain.hpp"
#include "presence/sensor_rules.hpp"
#include "presence/simulator.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace presence;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitAlgorithm = 3;

// Options shared by every subcommand; settable from the config file.
struct Common {
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  int max_iter = 30;
  double epsilon_grid_step = 0.005;
  std::uint64_t seed = 0;
  std::string schedule = "9-20";
  std::string views = "mean_power,mac,mad,sd";
  std::int64_t window_seconds = 60;
  bool rate_search = false;
  std::int64_t utc_offset = 0;
};

json common_json(const Common& c) {
  return {{"alpha1", c.alpha1},
          {"alpha2", c.alpha2},
          {"max_iter", c.max_iter},
          {"epsilon_grid_step", c.epsilon_grid_step},
          {"seed", c.seed},
          {"schedule", c.schedule},
          {"views", c.views},
          {"window_seconds", c.window_seconds},
          {"rate_search", c.rate_search},
          {"utc_offset", c.utc_offset}};
}

std::string to_string_output(const auto& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

void write_manifest(const fs::path& path, const std::string& command, const Common& c,
                    json inputs, json outputs, json extra = json::object()) {
  json m;
  m["tool"] = "presence";
  m["version"] = PRESENCE_VERSION;
  m["command"] = command;
  m["config"] = common_json(c);
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  if (!extra.empty()) {
    m["details"] = std::move(extra);
  }
  io::write_file(path, m.dump(2) + "\n");
}

fs::path manifest_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

PriorSchedule schedule_of(const Common& c) { return PriorSchedule::parse(c.schedule, c.utc_offset); }

FeatureMatrix load_features(const std::string& power, const std::string& features, const Common& c) {
  const auto views = parse_views(c.views);
  if (!features.empty()) {
    return io::read_features_csv(fs::path(features), views);
  }
  const auto trace = io::read_power_csv(fs::path(power));
  return build_views(trace, WindowSpec::of_width(c.window_seconds), views);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupancy detection from plug-load power traces"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");

  Common c;
  app.add_option("--alpha1", c.alpha1, "Sampling rate of the presence class")->check(CLI::Range(0.0, 1.0));
  app.add_option("--alpha2", c.alpha2, "Sampling rate of the absence class")->check(CLI::Range(0.0, 1.0));
  app.add_option("--max_iter,--max-iter", c.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--epsilon_grid_step,--epsilon-grid-step", c.epsilon_grid_step, "Line search resolution");
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--schedule", c.schedule, "Prior schedule, 'B-E' hours or 24 chars of 0/1");
  app.add_option("--views", c.views, "Comma-separated views");
  app.add_option("--window_seconds,--window-seconds", c.window_seconds, "Window width in seconds")
      ->check(CLI::PositiveNumber);
  app.add_flag("--rate_search,--rate-search", c.rate_search, "Search sampling rates when phi <= 0");
  app.add_option("--utc_offset,--utc-offset", c.utc_offset, "Local time offset from UTC in seconds");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic user with ground truth")->fallthrough();
  std::string preset_name = "user17";
  int days = 30;
  std::string sim_out;
  bool sim_sensors = false;
  bool sim_clean_sensors = false;
  sim->add_option("--preset", preset_name, "user8, user17, user20 or user26");
  sim->add_option("--days", days, "Number of days")->check(CLI::PositiveNumber);
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_flag("--sensors", sim_sensors, "Also write ultrasonic, accel and wifi traces");
  sim->add_flag("--clean-sensors", sim_clean_sensors, "Sensor traces without artifacts");

  // extract
  auto* ext = app.add_subcommand("extract", "Write the feature matrix of a power trace")->fallthrough();
  std::string ext_power;
  std::string ext_out;
  ext->add_option("--power", ext_power, "Power CSV")->required()->check(CLI::ExistingFile);
  ext->add_option("--out", ext_out, "Feature CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Zero-training presence labeling")->fallthrough();
  std::string tr_power;
  std::string tr_features;
  std::string tr_out;
  std::string tr_diag;
  std::string tr_truth;
  std::string tr_curve;
  bool tr_no_stop = false;
  auto* tr_power_opt = train->add_option("--power", tr_power, "Power CSV")->check(CLI::ExistingFile);
  auto* tr_feat_opt =
      train->add_option("--features", tr_features, "Feature CSV")->check(CLI::ExistingFile);
  tr_power_opt->excludes(tr_feat_opt);
  train->add_option("--out", tr_out, "Presence CSV")->required();
  train->add_option("--diagnostics", tr_diag, "Per-iteration diagnostics CSV");
  train->add_option("--truth", tr_truth, "Ground truth for the iteration curve")->check(CLI::ExistingFile);
  train->add_option("--curve", tr_curve, "Misclassification per iteration CSV (needs --truth)");
  train->add_flag("--no-stop", tr_no_stop, "Run to max_iter regardless of phi");

  // baseline
  auto* base = app.add_subcommand("baseline", "Label-optimized threshold model")->fallthrough();
  std::string bl_power;
  std::string bl_features;
  std::string bl_truth;
  std::string bl_kind = "absolute";
  std::string bl_out;
  auto* bl_power_opt = base->add_option("--power", bl_power, "Power CSV")->check(CLI::ExistingFile);
  auto* bl_feat_opt =
      base->add_option("--features", bl_features, "Feature CSV")->check(CLI::ExistingFile);
  bl_power_opt->excludes(bl_feat_opt);
  base->add_option("--truth", bl_truth, "Ground truth to optimize against")->required()->check(CLI::ExistingFile);
  base->add_option("--kind", bl_kind, "absolute, change or percentage");
  base->add_option("--out", bl_out, "Presence CSV")->required();

  // sensors
  auto* sens = app.add_subcommand("sensors", "Rule-based presence from desk sensors")->fallthrough();
  std::string sn_kind;
  std::string sn_input;
  std::string sn_reference;
  std::string sn_out;
  double sn_theta = 0.03;
  double sn_delta = 3600.0;
  double sn_absent_from = 2.0;
  sens->add_option("--kind", sn_kind, "ultrasonic, accel or wifi")->required();
  sens->add_option("--input", sn_input, "Sensor CSV")->required()->check(CLI::ExistingFile);
  sens->add_option("--reference", sn_reference, "Presence CSV whose windows the output follows")
      ->required()
      ->check(CLI::ExistingFile);
  sens->add_option("--out", sn_out, "Presence CSV")->required();
  sens->add_option("--theta", sn_theta, "Accel threshold in g");
  sens->add_option("--delta", sn_delta, "Wifi smoothing span in seconds");
  sens->add_option("--absent-from", sn_absent_from, "Ultrasonic distance in m beyond which the seat is empty");

  // eval
  auto* ev = app.add_subcommand("eval", "Detection rates against ground truth")->fallthrough();
  std::string ev_pred;
  std::string ev_truth;
  std::string ev_user = "unknown";
  std::string ev_model = "presence_sense";
  std::string ev_out;
  std::string ev_hourly;
  ev->add_option("--pred", ev_pred, "Predicted presence CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--truth", ev_truth, "Ground-truth presence CSV")->required()->check(CLI::ExistingFile);
  ev->add_option("--user", ev_user, "User name recorded in the metrics");
  ev->add_option("--model", ev_model, "Model name recorded in the metrics");
  ev->add_option("--out", ev_out, "Metrics JSON")->required();
  ev->add_option("--hourly", ev_hourly, "Hourly absence fractions CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim) {
      auto profile = preset(preset_name);
      profile.days = days;
      profile.truth_window = c.window_seconds;
      const auto user = simulate_user(profile, c.seed);
      const fs::path dir(sim_out);
      fs::create_directories(dir);
      json outputs;
      io::write_file(dir / "power.csv",
                     to_string_output([&](std::ostream& o) { io::write_power_csv(o, user.power); }));
      io::write_file(dir / "truth.csv",
                     to_string_output([&](std::ostream& o) { io::write_presence_csv(o, user.truth); }));
      outputs["power"] = (dir / "power.csv").string();
      outputs["truth"] = (dir / "truth.csv").string();
      if (sim_sensors || sim_clean_sensors) {
        const auto noise = sim_clean_sensors ? SensorNoise::clean() : SensorNoise{};
        const auto s = simulate_sensors(user.truth, c.window_seconds, c.seed + 1, noise);
        io::write_file(dir / "ultrasonic.csv", to_string_output([&](std::ostream& o) {
                         io::write_ultrasonic_csv(o, s.ultrasonic_t, s.ultrasonic_m);
                       }));
        io::write_file(dir / "accel.csv", to_string_output([&](std::ostream& o) {
                         io::write_accel_csv(o, s.accel_t, s.accel);
                       }));
        io::write_file(dir / "wifi.csv",
                       to_string_output([&](std::ostream& o) { io::write_wifi_csv(o, s.wifi); }));
        outputs["ultrasonic"] = (dir / "ultrasonic.csv").string();
        outputs["accel"] = (dir / "accel.csv").string();
        outputs["wifi"] = (dir / "wifi.csv").string();
      }
      write_manifest(dir / "manifest.json", "simulate", c, json::object(), outputs,
                     {{"preset", preset_name},
                      {"days", days},
                      {"sensors", sim_sensors || sim_clean_sensors},
                      {"clean_sensors", sim_clean_sensors}});
    } else if (*ext) {
      const auto fm = load_features(ext_power, "", c);
      io::write_file(ext_out, to_string_output([&](std::ostream& o) { io::write_features_csv(o, fm); }));
      write_manifest(manifest_for(ext_out), "extract", c, {{"power", ext_power}}, {{"features", ext_out}});
    } else if (*train) {
      if (tr_power.empty() == tr_features.empty()) {
        throw CLI::ValidationError("train", "exactly one of --power and --features is required");
      }
      if (!tr_curve.empty() && tr_truth.empty()) {
        throw CLI::ValidationError("train", "--curve needs --truth");
      }
      const auto fm = load_features(tr_power, tr_features, c);
      SelfTrainConfig cfg;
      cfg.alpha1 = c.alpha1;
      cfg.alpha2 = c.alpha2;
      cfg.max_iter = c.max_iter;
      cfg.epsilon_grid_step = c.epsilon_grid_step;
      cfg.seed = c.seed;
      cfg.rate_search = c.rate_search;
      cfg.stop_on_negative_phi = !tr_no_stop;
      cfg.keep_labelings = !tr_curve.empty();
      const auto result = run_presence_sense(fm, schedule_of(c), cfg);
      io::write_file(tr_out, to_string_output([&](std::ostream& o) {
                       io::write_presence_csv(o, result.presence);
                     }));
      json outputs{{"presence", tr_out}};
      if (!tr_diag.empty()) {
        io::write_file(tr_diag, to_string_output([&](std::ostream& o) {
                         io::write_diagnostics_csv(o, result.diagnostics);
                       }));
        outputs["diagnostics"] = tr_diag;
      }
      if (!tr_curve.empty()) {
        const auto truth = io::read_presence_csv(fs::path(tr_truth));
        const auto aligned = align_to_windows(truth, fm.window_starts(), c.window_seconds);
        const auto curve = iteration_curve(result.diagnostics, aligned);
        std::string csv = "iter,misclassification,stopped\n";
        for (const auto& p : curve) {
          csv += fmt::format("{},{},{}\n", p.iter, p.misclassification, p.stop_indicator ? 1 : 0);
        }
        io::write_file(tr_curve, csv);
        outputs["curve"] = tr_curve;
      }
      json inputs = tr_power.empty() ? json{{"features", tr_features}} : json{{"power", tr_power}};
      if (!tr_truth.empty()) inputs["truth"] = tr_truth;
      write_manifest(manifest_for(tr_out), "train", c, inputs, outputs,
                     {{"stop_on_negative_phi", !tr_no_stop},
                      {"best_iter", result.diagnostics.best_iter},
                      {"iterations", result.diagnostics.rows.size()},
                      {"termination", std::string(termination_name(result.diagnostics.termination))}});
    } else if (*base) {
      if (bl_power.empty() == bl_features.empty()) {
        throw CLI::ValidationError("baseline", "exactly one of --power and --features is required");
      }
      const auto kind = parse_threshold_kind(bl_kind);
      const auto fm = load_features(bl_power, bl_features, c);
      const auto starts = fm.window_starts();
      const auto truth =
          align_to_windows(io::read_presence_csv(fs::path(bl_truth)), starts, c.window_seconds);
      const auto metric = threshold_metric(kind, fm);
      const auto grid = default_threshold_grid(kind, metric);
      const auto fit = optimize_threshold(kind, metric, truth, grid);
      const auto series = apply_threshold_model({kind, fit.threshold, Presence::absent}, metric, starts);
      io::write_file(bl_out, to_string_output([&](std::ostream& o) { io::write_presence_csv(o, series); }));
      json inputs = bl_power.empty() ? json{{"features", bl_features}} : json{{"power", bl_power}};
      inputs["truth"] = bl_truth;
      write_manifest(manifest_for(bl_out), "baseline", c, inputs, {{"presence", bl_out}},
                     {{"kind", bl_kind}, {"threshold", fit.threshold}, {"accuracy", fit.accuracy}});
    } else if (*sens) {
      const auto reference = io::read_presence_csv(fs::path(sn_reference));
      const auto starts = reference.window_starts();
      PresenceSeries series;
      json extra{{"kind", sn_kind}};
      if (sn_kind == "ultrasonic") {
        UltrasonicConfig cfg;
        cfg.absence_intervals = {{sn_absent_from, std::numeric_limits<double>::infinity()}};
        const auto log = io::read_ultrasonic_csv(sn_input);
        series = ultrasonic_windows(log.t, log.distance_m, starts, c.window_seconds, cfg);
        extra["absent_from"] = sn_absent_from;
      } else if (sn_kind == "accel") {
        AccelConfig cfg;
        cfg.theta = sn_theta;
        cfg.window = static_cast<std::size_t>(c.window_seconds);
        const auto log = io::read_accel_csv(sn_input);
        series = accel_windows(log.t, log.accel, starts, c.window_seconds, cfg);
        extra["theta"] = sn_theta;
      } else if (sn_kind == "wifi") {
        WifiConfig cfg;
        cfg.delta = sn_delta;
        series = wifi_windows(io::read_wifi_csv(sn_input), starts, c.window_seconds, cfg);
        extra["delta"] = sn_delta;
      } else {
        throw CLI::ValidationError("--kind", "unknown sensor kind '" + sn_kind + "'");
      }
      io::write_file(sn_out, to_string_output([&](std::ostream& o) { io::write_presence_csv(o, series); }));
      write_manifest(manifest_for(sn_out), "sensors", c, {{"input", sn_input}, {"reference", sn_reference}},
                     {{"presence", sn_out}}, extra);
    } else if (*ev) {
      const auto pred = io::read_presence_csv(fs::path(ev_pred));
      const auto truth = align_to_windows(io::read_presence_csv(fs::path(ev_truth)),
                                          pred.window_starts(), c.window_seconds);
      const auto rates = detection_rates(pred, truth);
      json metrics{{"user", ev_user},
                   {"model", ev_model},
                   {"absence", rates.absence_rate},
                   {"presence", rates.presence_rate},
                   {"overall", rates.overall}};
      io::write_file(ev_out, metrics.dump(2) + "\n");
      json outputs{{"metrics", ev_out}};
      if (!ev_hourly.empty()) {
        const auto pred_h = hourly_absence(pred, c.utc_offset);
        const auto truth_h = hourly_absence(truth, c.utc_offset);
        std::string csv = "hour,predicted,truth,windows\n";
        for (std::size_t h = 0; h < 24; ++h) {
          csv += fmt::format("{},{},{},{}\n", h, pred_h.fraction[h], truth_h.fraction[h], pred_h.windows[h]);
        }
        io::write_file(ev_hourly, csv);
        outputs["hourly"] = ev_hourly;
      }
      write_manifest(manifest_for(ev_out), "eval", c, {{"pred", ev_pred}, {"truth", ev_truth}}, outputs,
                     {{"user", ev_user}, {"model", ev_model}});
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const AlgorithmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAlgorithm;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

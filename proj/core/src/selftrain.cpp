#include "presence/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace presence {

// ---------------------------------------------------------------- schedule

PriorSchedule::PriorSchedule() : PriorSchedule(present_between(9, 20)) {}

PriorSchedule::PriorSchedule(std::array<Presence, 24> hours, std::int64_t utc_offset_seconds)
    : hours_(hours), utc_offset_(utc_offset_seconds) {}

PriorSchedule PriorSchedule::present_between(int begin_hour, int end_hour,
                                             std::int64_t utc_offset_seconds) {
  if (begin_hour < 0 || begin_hour > 24 || end_hour < 0 || end_hour > 24) {
    throw std::invalid_argument("schedule hours must lie in [0, 24]");
  }
  std::array<Presence, 24> hours{};
  for (int h = 0; h < 24; ++h) {
    const bool present = begin_hour <= end_hour ? (h >= begin_hour && h < end_hour)
                                                : (h >= begin_hour || h < end_hour);
    hours[static_cast<std::size_t>(h)] = present ? Presence::present : Presence::absent;
  }
  return PriorSchedule(hours, utc_offset_seconds);
}

PriorSchedule PriorSchedule::parse(std::string_view text, std::int64_t utc_offset_seconds) {
  if (text.size() == 24 && text.find_first_not_of("01") == std::string_view::npos) {
    std::array<Presence, 24> hours{};
    for (std::size_t h = 0; h < 24; ++h) {
      hours[h] = text[h] == '1' ? Presence::present : Presence::absent;
    }
    return PriorSchedule(hours, utc_offset_seconds);
  }
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument("schedule must be 'B-E' or 24 characters of 0/1");
  }
  auto to_int = [&](std::string_view s) {
    if (s.empty() || s.size() > 2 || s.find_first_not_of("0123456789") != std::string_view::npos) {
      throw std::invalid_argument("schedule hour '" + std::string(s) + "' is not a number");
    }
    return std::stoi(std::string(s));
  };
  return present_between(to_int(text.substr(0, dash)), to_int(text.substr(dash + 1)),
                         utc_offset_seconds);
}

int PriorSchedule::hour_of_day(Timestamp t) const {
  constexpr std::int64_t kDay = 86400;
  std::int64_t s = (t + utc_offset_) % kDay;
  if (s < 0) {
    s += kDay;
  }
  return static_cast<int>(s / 3600);
}

PriorSchedule PriorSchedule::shifted(int hours) const {
  std::array<Presence, 24> out{};
  for (int h = 0; h < 24; ++h) {
    const int to = ((h + hours) % 24 + 24) % 24;
    out[static_cast<std::size_t>(to)] = hours_[static_cast<std::size_t>(h)];
  }
  return PriorSchedule(out, utc_offset_);
}

double PriorSchedule::present_fraction() const {
  return static_cast<double>(std::count(hours_.begin(), hours_.end(), Presence::present)) / 24.0;
}

std::string PriorSchedule::to_string() const {
  std::string s(24, '0');
  for (std::size_t h = 0; h < 24; ++h) {
    if (hours_[h] == Presence::present) {
      s[h] = '1';
    }
  }
  return s;
}

void SelfTrainConfig::validate() const {
  if (!(alpha1 >= 0.0 && alpha1 <= 1.0) || !(alpha2 >= 0.0 && alpha2 <= 1.0)) {
    throw std::invalid_argument("sampling rates must lie in [0, 1]");
  }
  if (max_iter < 1) {
    throw std::invalid_argument("max_iter must be at least 1");
  }
  if (!(epsilon_grid_step > 0.0 && epsilon_grid_step <= 0.1)) {
    throw std::invalid_argument("epsilon_grid_step must lie in (0, 0.1]");
  }
  if (!(epsilon_max > 0.0 && epsilon_max <= 1.0)) {
    throw std::invalid_argument("epsilon_max must lie in (0, 1]");
  }
}

// ---------------------------------------------------------------- counts

double NoiseCounts::eta() const {
  const double m = labeled();
  return m > 0.0 ? (b + d) / m : 0.5;
}

NoiseCounts NoiseCounts::advance(double eps, double alpha1, double alpha2) const {
  NoiseCounts n;
  n.a = a * (1.0 - eps) + (d + e) * (1.0 - eps) * alpha1;
  n.b = b * eps + (c + f) * eps * alpha1;
  n.c = c * (1.0 - eps) + (b + f) * (1.0 - eps) * alpha2;
  n.d = d * eps + (a + e) * eps * alpha2;
  const double total = a + b + c + d + e + f;
  const double rest = total - (n.a + n.b + n.c + n.d);
  // Unlabeled split by ground truth: class-1 mass not in a or d.
  const double class1 = a + d + e;
  n.e = std::max(0.0, class1 - n.a - n.d);
  n.f = std::max(0.0, rest - n.e);
  return n;
}

double pac_utility(double m, double eta) {
  const double s = 1.0 - 2.0 * eta;
  return m * s * s;
}

double stopping_metric(double m_prev, double eta_prev, double m_cur, double eta_cur) {
  return pac_utility(m_cur, eta_cur) - pac_utility(m_prev, eta_prev);
}

// ---------------------------------------------------------------- estimator

namespace {

using Row = std::array<double, 7>;  // six coefficients + right-hand side

double row_value(const Row& row, const std::array<double, 6>& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    s += row[i] * x[i];
  }
  return s - row[6];
}

// Gaussian elimination with partial pivoting on an n x (n+1) system; false
// when singular.
template <std::size_t N>
bool solve_dense(std::array<std::array<double, N + 1>, N>& m, std::size_t n,
                 std::array<double, N>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-13) return false;
    std::swap(m[col], m[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = m[r][col] / m[col][col];
      if (factor == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= factor * m[col][c];
    }
  }
  for (std::size_t r = n; r-- > 0;) {
    double s = m[r][n];
    for (std::size_t c = r + 1; c < n; ++c) s -= m[r][c] * x[c];
    x[r] = s / m[r][r];
  }
  return true;
}

struct GridSolution {
  std::array<double, 6> x{};
  double fit = 0.0;       // squared misfit of the fitted equations
  double residual = 0.0;  // |held-out equation|
};

// Minimises the squared misfit of `soft` subject to the `hard` equalities
// and x >= 0 by enumerating which counts are pinned at zero.
std::optional<GridSolution> constrained_fit(const std::vector<Row>& hard,
                                            const std::vector<Row>& soft, double tolerance) {
  constexpr std::size_t kMax = 6 + 3;
  std::optional<GridSolution> best;
  for (unsigned zero_mask = 0; zero_mask < 64; ++zero_mask) {
    std::array<std::size_t, 6> free{};
    std::size_t nf = 0;
    for (std::size_t i = 0; i < 6; ++i) {
      if (!(zero_mask & (1U << i))) free[nf++] = i;
    }
    const std::size_t n = nf + hard.size();
    std::array<std::array<double, kMax + 1>, kMax> kkt{};
    for (std::size_t p = 0; p < nf; ++p) {
      for (std::size_t q = 0; q < nf; ++q) {
        double s = 0.0;
        for (const auto& r : soft) s += r[free[p]] * r[free[q]];
        kkt[p][q] = s + (p == q ? 1e-10 : 0.0);
      }
      double rhs = 0.0;
      for (const auto& r : soft) rhs += r[free[p]] * r[6];
      kkt[p][n] = rhs;
      for (std::size_t h = 0; h < hard.size(); ++h) {
        kkt[p][nf + h] = hard[h][free[p]];
        kkt[nf + h][p] = hard[h][free[p]];
      }
    }
    for (std::size_t h = 0; h < hard.size(); ++h) kkt[nf + h][n] = hard[h][6];

    std::array<double, kMax> z{};
    if (!solve_dense<kMax>(kkt, n, z)) continue;
    GridSolution sol;
    bool feasible = true;
    for (std::size_t p = 0; p < nf; ++p) {
      if (z[p] < -tolerance) {
        feasible = false;
        break;
      }
      sol.x[free[p]] = std::max(z[p], 0.0);
    }
    if (!feasible) continue;
    bool satisfies = true;
    for (const auto& r : hard) {
      if (std::abs(row_value(r, sol.x)) > tolerance) satisfies = false;
    }
    if (!satisfies) continue;
    for (const auto& r : soft) {
      const double v = row_value(r, sol.x);
      sol.fit += v * v;
    }
    if (!best || sol.fit < best->fit) best = sol;
  }
  return best;
}

std::optional<GridSolution> solve_at(double eps, const SetSizes& k, const SetSizes& next,
                                     double alpha1, double alpha2, const PriorQuantities& prior,
                                     double tolerance) {
  const double q = 1.0 - eps;
  // Unknowns: a b c d e f.
  const std::vector<Row> sums{{1, 1, 0, 0, 0, 0, k.l1}, {0, 0, 1, 1, 0, 0, k.l2},
                              {0, 0, 0, 0, 1, 1, k.u}};
  const Row next1{q, eps, eps * alpha1, q * alpha1, q * alpha1, eps * alpha1, next.l1};
  const Row next2{eps * alpha2, q * alpha2, q, eps, eps * alpha2, q * alpha2, next.l2};

  std::vector<Row> soft{next1};
  if (prior.class1_total) {
    soft.push_back({1, 0, 0, 1, 1, 0, *prior.class1_total});
  }
  if (prior.type1_tracks_epsilon || prior.type1_rate) {
    const double r = prior.type1_tracks_epsilon ? eps : *prior.type1_rate;
    soft.push_back({-r, 0, 0, 1.0 - r, 0, 0, 0});
  }
  if (prior.type2_rate) {
    const double r = *prior.type2_rate;
    soft.push_back({0, 1.0 - r, -r, 0, 0, 0, 0});
  }

  auto sol = constrained_fit(sums, soft, tolerance);
  if (sol) {
    sol->residual = std::abs(row_value(next2, sol->x));
  }
  return sol;
}

}  // namespace

NoiseEstimate estimate_noise(const SetSizes& sizes_k, const SetSizes& sizes_next, double alpha1,
                             double alpha2, const PriorQuantities& prior,
                             double epsilon_grid_step, double epsilon_max) {
  const int given = (prior.class1_total ? 1 : 0) +
                    ((prior.type1_rate || prior.type1_tracks_epsilon) ? 1 : 0) +
                    (prior.type2_rate ? 1 : 0);
  if (given != 2) {
    throw std::invalid_argument("noise estimation needs exactly two prior quantities");
  }
  if (prior.type1_rate && prior.type1_tracks_epsilon) {
    throw std::invalid_argument("type-I rate given both explicitly and as epsilon");
  }
  const double n = sizes_k.total();
  if (std::abs(n - sizes_next.total()) > 1e-6 * std::max(1.0, n)) {
    throw std::invalid_argument("set sizes of consecutive rounds cover different totals");
  }
  if (!(epsilon_grid_step > 0.0)) {
    throw std::invalid_argument("epsilon_grid_step must be positive");
  }

  const double tolerance = 1e-9 * std::max(1.0, n);
  const auto steps = static_cast<int>(std::floor(epsilon_max / epsilon_grid_step + 1e-9));
  std::optional<GridSolution> best;
  double best_eps = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double eps = i * epsilon_grid_step;
    auto sol = solve_at(eps, sizes_k, sizes_next, alpha1, alpha2, prior, tolerance);
    if (sol && (!best || sol->fit + sol->residual * sol->residual <
                             best->fit + best->residual * best->residual)) {
      best = sol;
      best_eps = eps;
    }
  }
  if (!best) {
    throw AlgorithmError("estimator infeasible");
  }

  NoiseEstimate est;
  est.epsilon_hat = best_eps;
  est.residual = best->residual;
  const auto& x = best->x;
  est.counts_hat = {x[0], x[1], x[2], x[3], x[4], x[5]};
  est.eta_hat = est.counts_hat.eta();
  est.next_counts = est.counts_hat.advance(best_eps, alpha1, alpha2);
  est.eta_next = est.next_counts.eta();
  return est;
}

// ---------------------------------------------------------------- rates

double predicted_utility(const RateSearchState& state, double alpha1, double alpha2) {
  const auto next = state.counts.advance(state.epsilon_hat, alpha1, alpha2);
  return pac_utility(next.labeled(), next.eta());
}

std::optional<std::pair<double, double>> search_rates(const RateSearchState& state) {
  if (state.epsilon_hat >= 0.5) {
    return std::nullopt;
  }
  if (predicted_utility(state, state.alpha1, state.alpha2) > state.u_prev) {
    return std::pair{state.alpha1, state.alpha2};
  }
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      const double a1 = i / 10.0;
      const double a2 = j / 10.0;
      if (predicted_utility(state, a1, a2) > state.u_prev) {
        return std::pair{a1, a2};
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- labels

LabelPartition init_from_prior(const PriorSchedule& schedule,
                               std::span<const Timestamp> window_starts) {
  std::vector<Label> labels;
  labels.reserve(window_starts.size());
  for (const Timestamp t : window_starts) {
    labels.push_back(to_label(schedule.at(t)));
  }
  return LabelPartition(std::move(labels));
}

LabelPartition update_labels(const LabelPartition& prev, const LabelPartition& next,
                             double alpha1, double alpha2, SamplingRng& rng,
                             bool sample_unlabeled) {
  if (prev.n_total() != next.n_total()) {
    throw std::invalid_argument("label update: partitions cover different index sets");
  }
  std::vector<Label> out(prev.n_total(), Label::unlabeled);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Label p = prev[i];
    const Label q = next[i];
    if (p == q) {
      out[i] = p;
      continue;
    }
    if (p == Label::unlabeled && !sample_unlabeled) {
      continue;
    }
    const bool in_delta1 = (p == Label::present) != (q == Label::present);
    const bool in_delta2 = (p == Label::absent) != (q == Label::absent);
    const bool take1 = in_delta1 && rng.bernoulli(alpha1);
    const bool take2 = in_delta2 && rng.bernoulli(alpha2);
    if (take1 && take2) {
      out[i] = q;
    } else if (take1) {
      out[i] = Label::present;
    } else if (take2) {
      out[i] = Label::absent;
    }
  }
  return LabelPartition(std::move(out));
}

// ---------------------------------------------------------------- loop

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::max_iter: return "max_iter";
    case Termination::negative_phi: return "negative_phi";
    case Termination::estimator_infeasible: return "estimator_infeasible";
  }
  return "?";
}

std::vector<Label> fit_and_vote(const FeatureMatrix& features, const LabelPartition& labels,
                                std::span<const Label> prior_labels, const KdeOptions& kde) {
  const std::size_t n = features.rows();
  const std::size_t v = features.view_count();
  std::vector<std::vector<Label>> per_view;
  per_view.reserve(v);
  for (std::size_t j = 0; j < v; ++j) {
    const auto column = features.column(j);
    const auto clf = ViewClassifier::fit(features.views()[j], column, labels, kde);
    per_view.push_back(clf.predict(column));
  }
  std::vector<Label> votes(n);
  std::vector<Label> row(v);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < v; ++j) {
      row[j] = per_view[j][i];
    }
    votes[i] = majority_vote(row, prior_labels[i]);
  }
  return votes;
}

namespace {

PresenceSeries to_series(std::span<const Timestamp> starts, std::span<const Label> labels) {
  std::vector<Presence> states;
  states.reserve(labels.size());
  for (const Label l : labels) {
    states.push_back(to_presence(l));
  }
  return {std::vector<Timestamp>(starts.begin(), starts.end()), std::move(states)};
}

IterationRecord make_record(int iter, const LabelPartition& p) {
  IterationRecord r;
  r.iter = iter;
  r.l1 = p.l1_size();
  r.l2 = p.l2_size();
  r.u = p.u_size();
  return r;
}

}  // namespace

SelfTrainResult run_presence_sense(const FeatureMatrix& features, const PriorSchedule& schedule,
                                   const SelfTrainConfig& cfg) {
  cfg.validate();
  if (features.rows() == 0) {
    throw DataError("empty input");
  }
  const auto starts = features.window_starts();
  const std::size_t n = starts.size();

  LabelPartition labels = init_from_prior(schedule, starts);
  const std::vector<Label> prior_labels(labels.labels().begin(), labels.labels().end());

  PriorQuantities prior;
  prior.class1_total = schedule.present_fraction() * static_cast<double>(n);
  prior.type1_tracks_epsilon = true;

  SamplingRng rng(cfg.seed);
  IterationDiagnostics diag;

  IterationRecord first = make_record(0, labels);
  first.eta_hat = 0.5;
  first.u_k = pac_utility(static_cast<double>(labels.labeled_size()), first.eta_hat);
  first.phi = first.u_k - 0.0;
  first.alpha1 = cfg.alpha1;
  first.alpha2 = cfg.alpha2;
  diag.rows.push_back(first);

  double u_prev = first.u_k;
  double best_u = first.u_k;
  int best_iter = 0;
  std::vector<Label> best_vote;
  double alpha1 = cfg.alpha1;
  double alpha2 = cfg.alpha2;

  for (int k = 0;; ++k) {
    std::vector<Label> vote;
    try {
      vote = fit_and_vote(features, labels, prior_labels, cfg.kde);
    } catch (const AlgorithmError& e) {
      diag.best_iter = best_iter;
      throw SelfTrainError(std::string(e.what()) + " at iteration " + std::to_string(k),
                           std::move(diag));
    }
    if (cfg.keep_labelings) {
      diag.labelings.resize(diag.rows.size());
      diag.labelings[static_cast<std::size_t>(k)] = to_series(starts, vote);
    }
    if (k == best_iter) {
      best_vote = vote;
    }
    if (k >= cfg.max_iter) {
      diag.termination = Termination::max_iter;
      break;
    }

    const LabelPartition proposed(std::move(vote));
    auto step = [&](double a1, double a2) {
      LabelPartition updated = update_labels(labels, proposed, a1, a2, rng, cfg.sample_unlabeled);
      NoiseEstimate est = estimate_noise(SetSizes::of(labels), SetSizes::of(updated), a1, a2,
                                         prior, cfg.epsilon_grid_step, cfg.epsilon_max);
      return std::pair{std::move(updated), est};
    };

    std::optional<std::pair<LabelPartition, NoiseEstimate>> outcome;
    try {
      outcome = step(alpha1, alpha2);
      double u_next = pac_utility(static_cast<double>(outcome->first.labeled_size()),
                                  outcome->second.eta_next);
      if (u_next - u_prev <= 0.0 && cfg.rate_search) {
        const RateSearchState state{outcome->second.counts_hat, outcome->second.epsilon_hat,
                                    u_prev, alpha1, alpha2};
        if (const auto rates = search_rates(state)) {
          alpha1 = rates->first;
          alpha2 = rates->second;
          outcome = step(alpha1, alpha2);
        }
      }
    } catch (const AlgorithmError&) {
      diag.termination = Termination::estimator_infeasible;
      break;
    }

    auto& [updated, est] = *outcome;
    IterationRecord rec = make_record(k + 1, updated);
    rec.eps_hat = est.epsilon_hat;
    rec.eta_hat = est.eta_next;
    rec.u_k = pac_utility(static_cast<double>(updated.labeled_size()), rec.eta_hat);
    rec.phi = rec.u_k - u_prev;
    rec.stop_indicator = rec.phi <= 0.0;
    rec.alpha1 = alpha1;
    rec.alpha2 = alpha2;
    const bool stop = rec.stop_indicator && cfg.stop_on_negative_phi;
    rec.adopted = !stop;
    diag.rows.push_back(rec);
    if (stop) {
      diag.termination = Termination::negative_phi;
      break;
    }
    labels = std::move(updated);
    u_prev = rec.u_k;
    if (rec.u_k > best_u) {
      best_u = rec.u_k;
      best_iter = k + 1;
    }
  }

  if (cfg.keep_labelings) {
    diag.labelings.resize(diag.rows.size());
  }
  diag.best_iter = best_iter;
  return {to_series(starts, best_vote), std::move(diag)};
}

}  // namespace presence

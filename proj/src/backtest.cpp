#include "hfcov/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "hfcov/error.hpp"
#include "hfcov/estimators.hpp"

namespace hfcov {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Rows (time_s, values...) of a latent_D<k>.csv file, columns reordered to `ids`.
void read_latent_file(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      std::vector<double>& times, Eigen::MatrixXd& values) {
  std::ifstream in(path);
  if (!in) throw InsufficientDataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty latent file " + path.string(), 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "time_s")
    throw ParseError("latent file header must start with time_s", 1);
  std::vector<Eigen::Index> col_of(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = std::find(header.begin() + 1, header.end(), ids[i]);
    if (it == header.end())
      throw InsufficientDataError("latent file " + path.string() + " lacks asset " + ids[i]);
    col_of[i] = static_cast<Eigen::Index>(it - header.begin());
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw ParseError("wrong number of columns", line_no);
    std::vector<double> row(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      char* end = nullptr;
      row[k] = std::strtod(cells[k].c_str(), &end);
      if (end == cells[k].c_str() || *end != '\0' || !std::isfinite(row[k]))
        throw ParseError("bad number '" + cells[k] + "'", line_no);
    }
    rows.push_back(std::move(row));
  }
  times.resize(rows.size());
  values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    times[r] = rows[r][0];
    for (std::size_t i = 0; i < ids.size(); ++i)
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) =
          rows[r][static_cast<std::size_t>(col_of[i])];
  }
}

}  // namespace

// ---------------------------------------------------------------- data feed

Eigen::MatrixXd observed_assessment_grid(const TickPanel& day, int interval_seconds) {
  if (interval_seconds < 1) throw ArgumentError("assessment interval must be >= 1 s");
  const double window = day.window_length_seconds;
  const double marks = window / interval_seconds;
  const auto n_marks = static_cast<Eigen::Index>(std::llround(marks));
  if (n_marks < 1 || std::abs(marks - static_cast<double>(n_marks)) > 1e-9)
    throw InsufficientDataError("assessment interval " + std::to_string(interval_seconds) +
                                " s does not divide the trading window");
  Eigen::MatrixXd grid(n_marks + 1, static_cast<Eigen::Index>(day.num_assets()));
  for (std::size_t a = 0; a < day.num_assets(); ++a) {
    const TickSeries& s = day.series[a];
    if (s.empty())
      throw InsufficientDataError("no 15-minute prices for asset " + s.asset_id +
                                  " (no trades in the day)");
    std::size_t idx = 0;
    for (Eigen::Index k = 0; k <= n_marks; ++k) {
      const double t = static_cast<double>(k) * interval_seconds;
      while (idx + 1 < s.size() && s.times[idx + 1] <= t) ++idx;
      grid(k, static_cast<Eigen::Index>(a)) = s.log_prices[idx];
    }
  }
  return grid;
}

Eigen::VectorXd observed_close(const TickPanel& day) {
  Eigen::VectorXd close(static_cast<Eigen::Index>(day.num_assets()));
  for (std::size_t a = 0; a < day.num_assets(); ++a)
    close[static_cast<Eigen::Index>(a)] =
        day.series[a].empty() ? kNaN : day.series[a].log_prices.back();
  return close;
}

SimulatedDaySource::SimulatedDaySource(std::vector<AssetParams> params, SimConfig cfg,
                                       std::uint64_t seed, SimulatedSourceOptions opts)
    : sim_([&] {
        cfg.keep_grid = false;
        cfg.daily_oracle = opts.with_oracle;
        return Simulator(std::move(params), cfg, seed);
      }()),
      opts_(opts) {}

std::size_t SimulatedDaySource::remaining_days() const {
  if (opts_.n_days == SIZE_MAX) return SIZE_MAX;
  return opts_.n_days - std::min(opts_.n_days, sim_.days_generated());
}

MarketDay SimulatedDaySource::next() {
  if (remaining_days() == 0) throw InsufficientDataError("simulated day source exhausted");
  DayPaths dp = sim_.next_day();
  MarketDay m;
  m.index = dp.day_index;
  m.ticks = std::move(dp.ticks);
  m.close = observed_close(m.ticks);
  m.assessment_grid = opts_.empirical
                          ? observed_assessment_grid(m.ticks, sim_.config().assessment_interval)
                          : std::move(dp.assessment_grid);
  if (dp.has_oracle) m.oracle = std::move(dp.oracle);
  return m;
}

FileDaySource::FileDaySource(std::filesystem::path dir, bool empirical, int assessment_interval,
                             double seconds_per_day, bool with_oracle)
    : dir_(std::move(dir)),
      empirical_(empirical),
      interval_(assessment_interval),
      seconds_per_day_(seconds_per_day),
      with_oracle_(with_oracle) {
  if (!std::filesystem::is_directory(dir_))
    throw InsufficientDataError("data directory " + dir_.string() + " does not exist");
  while (std::filesystem::exists(dir_ / tick_file_name(n_days_))) ++n_days_;
  if (n_days_ == 0) throw InsufficientDataError("no " + tick_file_name(0) + " in " + dir_.string());
  ids_ = load_panel(dir_ / tick_file_name(0), seconds_per_day_).asset_ids();
}

MarketDay FileDaySource::next() {
  if (next_ >= n_days_) throw InsufficientDataError("file day source exhausted");
  const std::size_t k = next_++;
  TickPanel raw = load_panel(dir_ / tick_file_name(k), seconds_per_day_);
  if (raw.num_assets() != ids_.size())
    throw InsufficientDataError(tick_file_name(k) + " has " + std::to_string(raw.num_assets()) +
                                " assets, expected " + std::to_string(ids_.size()));
  MarketDay m;
  m.index = k;
  m.ticks.window_length_seconds = raw.window_length_seconds;
  for (const auto& id : ids_) {
    const std::size_t a = raw.find(id);
    if (a == raw.num_assets())
      throw InsufficientDataError("asset " + id + " has no ticks in " + tick_file_name(k));
    m.ticks.series.push_back(std::move(raw.series[a]));
  }
  m.close = observed_close(m.ticks);

  const auto latent_path = dir_ / latent_file_name(k);
  const bool need_latent = !empirical_ || with_oracle_;
  if (!need_latent) {
    m.assessment_grid = observed_assessment_grid(m.ticks, interval_);
    return m;
  }
  if (!std::filesystem::exists(latent_path))
    throw InsufficientDataError("missing " + latent_file_name(k) +
                                " (latent prices are needed outside empirical mode)");
  std::vector<double> times;
  Eigen::MatrixXd latent;
  read_latent_file(latent_path, ids_, times, latent);
  if (empirical_) {
    m.assessment_grid = observed_assessment_grid(m.ticks, interval_);
  } else {
    const auto n_marks = static_cast<Eigen::Index>(std::llround(seconds_per_day_ / interval_));
    m.assessment_grid.resize(n_marks + 1, latent.cols());
    std::size_t r = 0;
    for (Eigen::Index mark = 0; mark <= n_marks; ++mark) {
      const double t = static_cast<double>(mark) * interval_;
      while (r < times.size() && times[r] < t - 1e-9) ++r;
      if (r == times.size() || std::abs(times[r] - t) > 1e-9)
        throw InsufficientDataError(latent_file_name(k) + " has no row at t = " +
                                    std::to_string(static_cast<long>(t)) + " s");
      m.assessment_grid.row(mark) = latent.row(static_cast<Eigen::Index>(r));
    }
  }
  if (with_oracle_)
    m.oracle = estimate_matrix_synchronous(latent, ids_, 1.0, CovMethod::LatentOracle,
                                           choose_two_scale_noiseless(
                                               static_cast<std::size_t>(latent.rows())));
  return m;
}

// ---------------------------------------------------------------- strategies

std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::LowFreq100d: return "lowfreq-100d";
    case StrategyKind::AllRefreshTSCV10d: return "all-refresh-tscv-10d";
    case StrategyKind::AllRefreshRK10d: return "all-refresh-rk-10d";
    case StrategyKind::PairwiseTSCV10d: return "pairwise-tscv-10d";
    case StrategyKind::LatentOracle1d: return "latent-oracle-1d";
    case StrategyKind::EqualWeight: return "equal-weight";
  }
  return "unknown";
}

StrategyKind strategy_from_string(const std::string& s) {
  static const std::map<std::string, StrategyKind> names = {
      {"lowfreq-100d", StrategyKind::LowFreq100d},
      {"lowfreq", StrategyKind::LowFreq100d},
      {"all-refresh-tscv-10d", StrategyKind::AllRefreshTSCV10d},
      {"all-refresh-tscv", StrategyKind::AllRefreshTSCV10d},
      {"all-refresh-rk-10d", StrategyKind::AllRefreshRK10d},
      {"all-refresh-rk", StrategyKind::AllRefreshRK10d},
      {"pairwise-tscv-10d", StrategyKind::PairwiseTSCV10d},
      {"pairwise-tscv", StrategyKind::PairwiseTSCV10d},
      {"pairwise", StrategyKind::PairwiseTSCV10d},
      {"latent-oracle-1d", StrategyKind::LatentOracle1d},
      {"latent-oracle", StrategyKind::LatentOracle1d},
      {"oracle", StrategyKind::LatentOracle1d},
      {"equal-weight", StrategyKind::EqualWeight},
      {"equal", StrategyKind::EqualWeight},
  };
  const auto it = names.find(s);
  if (it == names.end())
    throw ArgumentError("unknown strategy '" + s +
                        "' (expected lowfreq, all-refresh-tscv, all-refresh-rk, pairwise-tscv, "
                        "latent-oracle or equal-weight)");
  return it->second;
}

int default_window_days(StrategyKind k) {
  switch (k) {
    case StrategyKind::LowFreq100d: return 100;
    case StrategyKind::AllRefreshTSCV10d:
    case StrategyKind::AllRefreshRK10d:
    case StrategyKind::PairwiseTSCV10d: return 10;
    case StrategyKind::LatentOracle1d: return 1;
    case StrategyKind::EqualWeight: return 0;
  }
  return 0;
}

int StrategySpec::effective_window() const {
  return window_days > 0 ? window_days : default_window_days(estimator);
}

void StrategySpec::validate() const {
  const std::string name = to_string(estimator);
  if (holding_days < 1) throw ArgumentError(name + ": holding period must be >= 1 day");
  if (c_grid.empty()) throw ArgumentError(name + ": empty gross-exposure grid");
  for (double c : c_grid)
    if (!std::isfinite(c) || c < 1.0)
      throw InfeasibleError(name + ": gross exposure " + fmt(c) + " is below 1");
  if (window_days < 0) throw ArgumentError(name + ": window must be >= 1 day");
  if (estimator == StrategyKind::LowFreq100d && effective_window() < 3)
    throw ArgumentError(name + ": the low-frequency window needs >= 3 daily closes");
  if (estimator == StrategyKind::LatentOracle1d && effective_window() != 1)
    throw ArgumentError(name + ": the oracle strategy uses a 1-day window");
  if (kernel_H < 1) throw ArgumentError(name + ": kernel bandwidth H must be >= 1");
}

const StrategyResult& BacktestReport::find(StrategyKind k, double c, int holding_days) const {
  for (const auto& r : results)
    if (r.estimator == k && r.holding_days == holding_days && std::abs(r.c - c) < 1e-12) return r;
  throw ArgumentError("no result for " + to_string(k) + " at c = " + fmt(c) +
                      ", tau = " + std::to_string(holding_days));
}

double annualized_std(const std::vector<double>& r, int intervals_per_day, double days_per_year) {
  if (r.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(r.size() - 1)) *
         std::sqrt(intervals_per_day * days_per_year);
}

double annualized_mean(const std::vector<double>& r, int intervals_per_day, double days_per_year) {
  if (r.empty()) return 0.0;
  double mean = 0.0;
  for (double x : r) mean += x;
  return mean / static_cast<double>(r.size()) * intervals_per_day * days_per_year;
}

namespace {

bool is_tick_strategy(StrategyKind k) {
  return k == StrategyKind::AllRefreshTSCV10d || k == StrategyKind::AllRefreshRK10d ||
         k == StrategyKind::PairwiseTSCV10d;
}

/// Trailing data visible at a rebalance: everything strictly before the
/// current day. Tick-based estimators keep one estimate per day.
struct History {
  struct DailyKey {
    StrategyKind kind;
    int kernel_H;
    auto operator<=>(const DailyKey&) const = default;
  };
  std::map<DailyKey, std::size_t> window_of;
  std::map<DailyKey, std::deque<CovEstimate>> daily;
  std::size_t history_days = 0;
  std::vector<Eigen::VectorXd> closes;
  std::optional<CovEstimate> last_oracle;
  unsigned workers = 1;

  static DailyKey key_of(const StrategySpec& s) {
    return {s.estimator, s.estimator == StrategyKind::AllRefreshRK10d ? s.kernel_H : 0};
  }

  void require(const StrategySpec& s) {
    auto& w = window_of[key_of(s)];
    w = std::max(w, static_cast<std::size_t>(s.effective_window()));
  }

  void push(MarketDay& day, std::size_t d) {
    Eigen::VectorXd close = day.close;
    for (Eigen::Index a = 0; a < close.size(); ++a)
      if (!std::isfinite(close[a]) && !closes.empty()) close[a] = closes.back()[a];
    closes.push_back(std::move(close));
    const MatrixOptions opts{workers};
    for (const auto& [key, w] : window_of) {
      if (d + w < history_days) continue;
      CovEstimate est =
          key.kind == StrategyKind::PairwiseTSCV10d
              ? estimate_matrix_pairwise(day.ticks, 1.0, opts)
              : estimate_matrix_allrefresh(day.ticks, 1.0,
                                           key.kind == StrategyKind::AllRefreshRK10d
                                               ? AllRefreshMode::RK
                                               : AllRefreshMode::TSCV,
                                           std::max(1, key.kernel_H), opts);
      auto& q = daily[key];
      q.push_back(std::move(est));
      while (q.size() > w) q.pop_front();
    }
    if (day.oracle) last_oracle = std::move(day.oracle);
  }
};

CovEstimate estimate_for(const StrategySpec& spec, const History& h) {
  const int w = spec.effective_window();
  switch (spec.estimator) {
    case StrategyKind::LowFreq100d: {
      const auto p = h.closes.back().size();
      Eigen::MatrixXd closes(w, p);
      const std::size_t first = h.closes.size() - static_cast<std::size_t>(w);
      for (int k = 0; k < w; ++k) closes.row(k) = h.closes[first + static_cast<std::size_t>(k)];
      if (!closes.allFinite())
        throw InsufficientDataError("low-frequency window contains an asset without any close");
      return lowfreq_sample_cov(closes);
    }
    case StrategyKind::LatentOracle1d:
      if (!h.last_oracle) throw InsufficientDataError("no latent oracle for the previous day");
      return *h.last_oracle;
    case StrategyKind::AllRefreshTSCV10d:
    case StrategyKind::AllRefreshRK10d:
    case StrategyKind::PairwiseTSCV10d: {
      const auto& q = h.daily.at(History::key_of(spec));
      if (q.size() < static_cast<std::size_t>(w))
        throw InsufficientDataError(to_string(spec.estimator) + ": only " +
                                    std::to_string(q.size()) + " tick days in the window");
      const std::vector<CovEstimate> days(q.end() - w, q.end());
      return combine_daily_estimates(days);
    }
    case StrategyKind::EqualWeight: break;
  }
  throw ArgumentError("strategy has no estimator");
}

}  // namespace

CovEstimate combine_daily_estimates(std::span<const CovEstimate> days) {
  if (days.empty()) throw ArgumentError("no daily estimates to combine");
  CovEstimate out = days.front();
  out.window_days = 0.0;
  out.matrix.setZero();
  out.pair_counts.setZero();
  out.rejections.clear();
  out.projections.clear();
  for (const auto& d : days) {
    if (d.asset_ids != out.asset_ids || d.method != out.method)
      throw ArgumentError("daily estimates differ in assets or method");
    out.matrix += d.matrix;
    out.pair_counts += d.pair_counts;
    out.window_days += d.window_days;
    for (const auto& r : d.rejections) {
      const bool seen = std::any_of(out.rejections.begin(), out.rejections.end(), [&](const auto& x) {
        return x.asset_a == r.asset_a && x.asset_b == r.asset_b;
      });
      if (!seen) out.rejections.push_back(r);
    }
  }
  for (const auto& r : out.rejections) {
    const auto ia = std::find(out.asset_ids.begin(), out.asset_ids.end(), r.asset_a) -
                    out.asset_ids.begin();
    const auto ib = std::find(out.asset_ids.begin(), out.asset_ids.end(), r.asset_b) -
                    out.asset_ids.begin();
    if (ia < out.p() && ib < out.p()) out.matrix(ia, ib) = out.matrix(ib, ia) = 0.0;
  }
  const Eigen::Index p = out.p();
  if (p == 1) {
    out.n_min = out.pair_counts(0, 0);
  } else {
    long n_min = std::numeric_limits<long>::max();
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = i + 1; j < p; ++j) n_min = std::min<long>(n_min, out.pair_counts(i, j));
    out.n_min = n_min;
  }
  return out;
}

namespace {

/// Buy-and-hold position of one (strategy, c) pair.
struct Position {
  Eigen::VectorXd target;
  Eigen::VectorXd ref;
  bool active = false;
};

double position_value(const Position& pos, const Eigen::VectorXd& x) {
  return (pos.target.array() * (x - pos.ref).array().exp()).sum();
}

}  // namespace

BacktestReport out_of_sample_run(DaySource& source, const BacktestConfig& cfg) {
  if (cfg.strategies.empty()) throw ArgumentError("no strategies configured");
  if (cfg.invest_days < 1) throw ArgumentError("invest_days must be >= 1");
  History hist;
  hist.history_days = cfg.history_days;
  hist.workers = cfg.workers;
  for (const auto& s : cfg.strategies) {
    s.validate();
    const auto w = static_cast<std::size_t>(s.effective_window());
    if (cfg.history_days < w)
      throw InsufficientDataError(to_string(s.estimator) + " needs " + std::to_string(w) +
                                  " history days, only " + std::to_string(cfg.history_days) +
                                  " configured");
    if (s.estimator == StrategyKind::LatentOracle1d && !source.provides_oracle())
      throw InsufficientDataError("the latent-oracle strategy needs latent prices");
    if (is_tick_strategy(s.estimator)) hist.require(s);
  }
  const std::size_t total = cfg.history_days + cfg.invest_days;
  if (source.remaining_days() < total)
    throw InsufficientDataError("data source has " + std::to_string(source.remaining_days()) +
                                " days, the run needs " + std::to_string(total));

  BacktestReport report;
  report.asset_ids = source.asset_ids();
  report.first_invest_day = cfg.history_days;
  report.n_invest_days = cfg.invest_days;
  report.trading_days_per_year = cfg.trading_days_per_year;
  const auto p = static_cast<Eigen::Index>(report.asset_ids.size());

  struct Slot {
    std::size_t strategy;
    std::size_t result;
  };
  std::vector<std::vector<Slot>> slots(cfg.strategies.size());
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s)
    for (double c : cfg.strategies[s].c_grid) {
      StrategyResult r;
      r.estimator = cfg.strategies[s].estimator;
      r.holding_days = cfg.strategies[s].holding_days;
      r.c = c;
      slots[s].push_back({s, report.results.size()});
      report.results.push_back(std::move(r));
    }
  std::vector<Position> positions(report.results.size());

  for (std::size_t d = 0; d < total; ++d) {
    MarketDay day = source.next();
    if (day.ticks.num_assets() != static_cast<std::size_t>(p))
      throw InsufficientDataError("day " + std::to_string(d) + " has a different asset set");
    if (d >= cfg.history_days) {
      const Eigen::MatrixXd& grid = day.assessment_grid;
      if (grid.rows() < 2 || grid.cols() != p)
        throw InsufficientDataError("day " + std::to_string(d) + " has no assessment prices");
      const int per_day = static_cast<int>(grid.rows() - 1);
      if (report.intervals_per_day == 0) report.intervals_per_day = per_day;
      if (report.intervals_per_day != per_day)
        throw InsufficientDataError("assessment grid size changes on day " + std::to_string(d));

      for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
        const StrategySpec& spec = cfg.strategies[s];
        if ((d - cfg.history_days) % static_cast<std::size_t>(spec.holding_days) != 0) continue;
        std::optional<CovEstimate> projected;
        if (spec.estimator != StrategyKind::EqualWeight)
          projected = project_cov(estimate_for(spec, hist),
                                  spec.projection);
        for (const Slot& slot : slots[s]) {
          StrategyResult& res = report.results[slot.result];
          RebalanceRecord rec;
          rec.day = d;
          rec.c = res.c;
          if (projected) {
            rec.weights = solve_min_variance(*projected, res.c);
            rec.perceived_risk = portfolio_risk(rec.weights, *projected, true);
            rec.n_min = projected->n_min;
            rec.n_rejected_pairs = static_cast<int>(projected->rejections.size());
          } else {
            rec.weights = PortfolioWeights::from_vector(Eigen::VectorXd::Constant(p, 1.0 / p));
            rec.perceived_risk = kNaN;
          }
          Position& pos = positions[slot.result];
          pos.target = rec.weights.w;
          pos.ref = grid.row(0).transpose();
          pos.active = true;
          res.rebalances.push_back(std::move(rec));
        }
      }

      for (std::size_t r = 0; r < report.results.size(); ++r) {
        Position& pos = positions[r];
        if (cfg.empirical) pos.ref = grid.row(0).transpose();
        StrategyResult& res = report.results[r];
        double prev = position_value(pos, grid.row(0).transpose());
        for (Eigen::Index k = 1; k < grid.rows(); ++k) {
          const double v = position_value(pos, grid.row(k).transpose());
          res.period_returns.push_back(v / prev - 1.0);
          res.period_days.push_back(d);
          prev = v;
        }
      }
    }
    hist.push(day, d);
  }

  for (auto& res : report.results) {
    res.annualized_std =
        annualized_std(res.period_returns, report.intervals_per_day, cfg.trading_days_per_year);
    res.annualized_mean =
        annualized_mean(res.period_returns, report.intervals_per_day, cfg.trading_days_per_year);
    std::vector<double> mx, mn, nl, ns;
    for (const auto& rec : res.rebalances) {
      mx.push_back(rec.weights.max_weight);
      mn.push_back(rec.weights.min_weight);
      nl.push_back(rec.weights.n_long);
      ns.push_back(rec.weights.n_short);
    }
    res.max_weight = median_of(mx);
    res.min_weight = median_of(mn);
    res.n_long = median_of(nl);
    res.n_short = median_of(ns);
  }
  return report;
}

BacktestReport out_of_sample_run(DaySource& source, const StrategySpec& spec, double c,
                                 std::size_t history_days, std::size_t invest_days,
                                 bool empirical, unsigned workers) {
  BacktestConfig cfg;
  StrategySpec one = spec;
  one.c_grid = {c};
  cfg.strategies = {one};
  cfg.history_days = history_days;
  cfg.invest_days = invest_days;
  cfg.empirical = empirical;
  cfg.workers = workers;
  return out_of_sample_run(source, cfg);
}

RiskCurve risk_curve(StrategyKind k, int holding_days, std::vector<RiskCurvePoint> points) {
  std::sort(points.begin(), points.end(),
            [](const RiskCurvePoint& a, const RiskCurvePoint& b) { return a.c < b.c; });
  std::size_t distinct = points.empty() ? 0 : 1;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].c != points[i - 1].c) ++distinct;
  if (distinct < 3)
    throw ArgumentError("risk curve of " + to_string(k) + " needs >= 3 distinct c values, got " +
                        std::to_string(distinct));
  RiskCurve curve;
  curve.estimator = k;
  curve.holding_days = holding_days;
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].annualized_std < points[best].annualized_std) best = i;
  curve.argmin_c = points[best].c;
  curve.argmin_on_boundary =
      points[best].c == points.front().c || points[best].c == points.back().c;
  curve.points = std::move(points);
  return curve;
}

std::vector<RiskCurve> risk_curve(const BacktestReport& report) {
  std::vector<std::pair<StrategyKind, int>> keys;
  for (const auto& r : report.results) {
    const std::pair<StrategyKind, int> key{r.estimator, r.holding_days};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<RiskCurve> curves;
  for (const auto& [k, tau] : keys) {
    std::vector<RiskCurvePoint> pts;
    for (const auto& r : report.results)
      if (r.estimator == k && r.holding_days == tau)
        pts.push_back({r.c, r.annualized_std, r.max_weight});
    curves.push_back(risk_curve(k, tau, std::move(pts)));
  }
  return curves;
}

void write_backtest_report(const std::filesystem::path& path, const BacktestReport& report) {
  auto out = open_out(path);
  out << "strategy,holding_days,c,annualized_mean,annualized_std,max_weight,min_weight,n_long,"
         "n_short,n_rebalances\n";
  for (const auto& r : report.results)
    out << to_string(r.estimator) << ',' << r.holding_days << ',' << fmt(r.c) << ','
        << fmt(r.annualized_mean) << ',' << fmt(r.annualized_std) << ',' << fmt(r.max_weight)
        << ',' << fmt(r.min_weight) << ',' << fmt(r.n_long) << ',' << fmt(r.n_short) << ','
        << r.rebalances.size() << '\n';
  if (!out) throw ArgumentError("write failed: " + path.string());
}

void write_period_returns(const std::filesystem::path& path, const BacktestReport& report) {
  auto out = open_out(path);
  out << "strategy,holding_days,c,day,interval,return\n";
  const int per_day = std::max(1, report.intervals_per_day);
  for (const auto& r : report.results)
    for (std::size_t i = 0; i < r.period_returns.size(); ++i)
      out << to_string(r.estimator) << ',' << r.holding_days << ',' << fmt(r.c) << ','
          << r.period_days[i] << ',' << (i % static_cast<std::size_t>(per_day)) + 1 << ','
          << fmt(r.period_returns[i]) << '\n';
  if (!out) throw ArgumentError("write failed: " + path.string());
}

void write_risk_curves(const std::filesystem::path& path, const std::vector<RiskCurve>& curves) {
  auto out = open_out(path);
  out << "strategy,holding_days,c,annualized_std,max_weight,is_argmin,argmin_on_boundary\n";
  for (const auto& cv : curves)
    for (const auto& pt : cv.points)
      out << to_string(cv.estimator) << ',' << cv.holding_days << ',' << fmt(pt.c) << ','
          << fmt(pt.annualized_std) << ',' << fmt(pt.max_weight) << ','
          << (pt.c == cv.argmin_c ? 1 : 0) << ',' << (cv.argmin_on_boundary ? 1 : 0) << '\n';
  if (!out) throw ArgumentError("write failed: " + path.string());
}

// ---------------------------------------------------------------- in-sample

std::vector<Eigen::VectorXd> study_portfolios(int p, double b) {
  if (p < 2) throw ArgumentError("study portfolios need p >= 2");
  const double inv = 1.0 / p;
  std::vector<Eigen::VectorXd> w(4, Eigen::VectorXd::Zero(p));
  w[0].setConstant(inv);
  w[1][0] = 1.0;
  w[2].setConstant(inv);
  w[2][0] = b / 2.0 - 0.5 + 2.0 * inv;
  w[2][1] = 0.5 - b / 2.0;
  w[3][0] = 0.5 + b / 2.0;
  w[3][1] = 0.5 - b / 2.0;
  return w;
}

CovMethod study_method(int m) {
  switch (m) {
    case 0: return CovMethod::AllRefreshTSCV;
    case 1: return CovMethod::AllRefreshRK;
    case 2: return CovMethod::PairwiseTSCV;
    default: throw ArgumentError("study method index out of range");
  }
}

SummaryStat summarize(std::vector<double> v) {
  if (v.empty()) return {kNaN, kNaN};
  std::sort(v.begin(), v.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {quantile(0.5), (quantile(0.75) - quantile(0.25)) / 1.35};
}

InSampleRep in_sample_replication(const MarketDay& day, const InSampleConfig& cfg) {
  if (!day.oracle) throw ArgumentError("in-sample replication needs the latent oracle");
  const CovEstimate& oracle = *day.oracle;
  const auto p = static_cast<int>(oracle.p());
  const double ann = std::sqrt(cfg.trading_days_per_year / oracle.window_days);
  const auto ports = study_portfolios(p, cfg.b);
  const auto risk = [&](const Eigen::VectorXd& w, const Eigen::MatrixXd& s) {
    return std::sqrt(std::max(0.0, quadratic_risk(w, s))) * ann;
  };

  InSampleRep rep;
  rep.day = day.index;
  for (const auto& w : ports) rep.oracle_risk.push_back(risk(w, oracle.matrix));
  rep.actual_opt_risk.assign(kStudyMethods + 1, {});
  const MatrixOptions opts{cfg.workers};
  for (int m = 0; m < kStudyMethods; ++m) {
    CovEstimate est;
    switch (study_method(m)) {
      case CovMethod::AllRefreshTSCV:
        est = estimate_matrix_allrefresh(day.ticks, 1.0, AllRefreshMode::TSCV, cfg.kernel_H, opts);
        rep.n_refresh_all = est.n_min;
        break;
      case CovMethod::AllRefreshRK:
        est = estimate_matrix_allrefresh(day.ticks, 1.0, AllRefreshMode::RK, cfg.kernel_H, opts);
        break;
      default: {
        est = estimate_matrix_pairwise(day.ticks, 1.0, opts);
        rep.n_pair_min = est.n_min;
        std::vector<double> counts;
        for (Eigen::Index i = 0; i < est.pair_counts.rows(); ++i)
          for (Eigen::Index j = i + 1; j < est.pair_counts.cols(); ++j)
            counts.push_back(est.pair_counts(i, j));
        rep.n_pair_median = median_of(std::move(counts));
      }
    }
    rep.a_p.push_back(max_elementwise_error(est, oracle) * cfg.trading_days_per_year /
                      est.window_days);
    const CovEstimate proj = project_cov(est, cfg.projection);
    std::vector<double> perceived;
    for (const auto& w : ports) perceived.push_back(risk(w, proj.matrix));
    rep.perceived_risk.push_back(std::move(perceived));
    for (double c : cfg.c_grid)
      rep.actual_opt_risk[static_cast<std::size_t>(m)].push_back(
          risk(solve_min_variance(proj, c).w, oracle.matrix));
  }
  for (double c : cfg.c_grid)
    rep.actual_opt_risk[kStudyMethods].push_back(
        risk(solve_min_variance(oracle, c).w, oracle.matrix));
  return rep;
}

InSampleReport summarize_in_sample(const InSampleConfig& cfg, std::vector<InSampleRep> reps) {
  if (reps.empty()) throw ArgumentError("no in-sample replications");
  InSampleReport out;
  out.config = cfg;
  const std::size_t n_port = reps.front().oracle_risk.size();
  const auto collect = [&](auto&& get) {
    std::vector<double> v;
    for (const auto& r : reps) v.push_back(get(r));
    return v;
  };
  for (std::size_t j = 0; j < n_port; ++j)
    out.oracle_risk.push_back(summarize(collect([&](const InSampleRep& r) {
      return r.oracle_risk[j];
    })));
  for (std::size_t m = 0; m < kStudyMethods; ++m) {
    std::vector<SummaryStat> perc, diff;
    for (std::size_t j = 0; j < n_port; ++j) {
      perc.push_back(summarize(collect([&](const InSampleRep& r) {
        return r.perceived_risk[m][j];
      })));
      diff.push_back(summarize(collect([&](const InSampleRep& r) {
        return std::abs(r.perceived_risk[m][j] - r.oracle_risk[j]);
      })));
    }
    out.perceived_risk.push_back(std::move(perc));
    out.abs_risk_diff.push_back(std::move(diff));
    out.a_p.push_back(summarize(collect([&](const InSampleRep& r) { return r.a_p[m]; })));
  }
  for (std::size_t m = 0; m <= kStudyMethods; ++m) {
    std::vector<double> curve;
    for (std::size_t ci = 0; ci < cfg.c_grid.size(); ++ci)
      curve.push_back(median_of(collect([&](const InSampleRep& r) {
        return r.actual_opt_risk[m][ci];
      })));
    out.opt_risk_curve.push_back(std::move(curve));
  }
  out.reps = std::move(reps);
  return out;
}

InSampleReport in_sample_study(DaySource& source, const InSampleConfig& cfg) {
  if (cfg.n_reps < 1) throw ArgumentError("n_reps must be >= 1");
  if (!source.provides_oracle())
    throw InsufficientDataError("the in-sample study needs latent prices for the oracle");
  if (source.remaining_days() < cfg.n_reps)
    throw InsufficientDataError("data source has fewer days than replications");
  std::vector<InSampleRep> reps;
  for (std::size_t k = 0; k < cfg.n_reps; ++k) reps.push_back(in_sample_replication(source.next(), cfg));
  return summarize_in_sample(cfg, std::move(reps));
}

void write_in_sample_tables(const std::filesystem::path& dir, const InSampleReport& report) {
  std::filesystem::create_directories(dir);
  const char* ports[] = {"w1", "w2", "w3", "w4"};
  {
    auto out = open_out(dir / "in_sample_table.csv");
    out << "section,portfolio,method,median,robust_sd\n";
    const auto row = [&](const char* section, const std::string& port, const std::string& method,
                         const SummaryStat& s) {
      out << section << ',' << port << ',' << method << ',' << fmt(s.median) << ','
          << fmt(s.rsd) << '\n';
    };
    for (std::size_t j = 0; j < report.oracle_risk.size(); ++j) {
      row("risk", ports[j], "latent", report.oracle_risk[j]);
      for (std::size_t m = 0; m < kStudyMethods; ++m)
        row("risk", ports[j], to_string(study_method(static_cast<int>(m))),
            report.perceived_risk[m][j]);
    }
    for (std::size_t j = 0; j < report.oracle_risk.size(); ++j)
      for (std::size_t m = 0; m < kStudyMethods; ++m)
        row("abs_risk_diff", ports[j], to_string(study_method(static_cast<int>(m))),
            report.abs_risk_diff[m][j]);
    for (std::size_t m = 0; m < kStudyMethods; ++m)
      row("a_p", "-", to_string(study_method(static_cast<int>(m))), report.a_p[m]);
    if (!out) throw ArgumentError("write failed in " + dir.string());
  }
  {
    auto out = open_out(dir / "in_sample_risk_curve.csv");
    out << 'c';
    for (std::size_t m = 0; m < kStudyMethods; ++m)
      out << ',' << to_string(study_method(static_cast<int>(m)));
    out << ",latent\n";
    for (std::size_t ci = 0; ci < report.config.c_grid.size(); ++ci) {
      out << fmt(report.config.c_grid[ci]);
      for (const auto& curve : report.opt_risk_curve) out << ',' << fmt(curve[ci]);
      out << '\n';
    }
    if (!out) throw ArgumentError("write failed in " + dir.string());
  }
  {
    auto out = open_out(dir / "in_sample_reps.csv");
    out << "day,n_refresh_all,n_pair_min,n_pair_median";
    for (std::size_t m = 0; m < kStudyMethods; ++m)
      out << ",a_p_" << to_string(study_method(static_cast<int>(m)));
    out << '\n';
    for (const auto& r : report.reps) {
      out << r.day << ',' << r.n_refresh_all << ',' << r.n_pair_min << ','
          << fmt(r.n_pair_median);
      for (double a : r.a_p) out << ',' << fmt(a);
      out << '\n';
    }
    if (!out) throw ArgumentError("write failed in " + dir.string());
  }
}

}  // namespace hfcov

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hfcov/cov_estimate.hpp"
#include "hfcov/portfolio.hpp"
#include "hfcov/psdproject.hpp"
#include "hfcov/simengine.hpp"
#include "hfcov/tickdata.hpp"

namespace hfcov {

// ---------------------------------------------------------------- data feed

/// One trading day as seen by the backtester.
struct MarketDay {
  std::size_t index = 0;
  TickPanel ticks;
  /// Log-prices at the assessment marks (open plus every interval); latent
  /// in simulation mode, previous-tick observed prices in empirical mode.
  Eigen::MatrixXd assessment_grid;
  /// Observed closing log-price (last trade of the day) per asset.
  Eigen::VectorXd close;
  std::optional<CovEstimate> oracle;
};

/// Sequential supplier of trading days.
class DaySource {
 public:
  virtual ~DaySource() = default;
  virtual std::vector<std::string> asset_ids() const = 0;
  /// Number of days that can still be produced (SIZE_MAX when unbounded).
  virtual std::size_t remaining_days() const = 0;
  virtual MarketDay next() = 0;
  /// True when next() fills MarketDay::oracle.
  virtual bool provides_oracle() const = 0;
};

/// Previous-tick observed prices at 0, interval, ..., window; the mark at
/// 0 (and any mark before an asset's first trade) takes the first trade.
/// Throws InsufficientDataError when an asset has no trade that day.
Eigen::MatrixXd observed_assessment_grid(const TickPanel& day, int interval_seconds);

/// Last observed log-price per asset; assets without ticks get NaN.
Eigen::VectorXd observed_close(const TickPanel& day);

struct SimulatedSourceOptions {
  bool empirical = false;
  bool with_oracle = false;
  std::size_t n_days = SIZE_MAX;
};

class SimulatedDaySource : public DaySource {
 public:
  /// The assessment grid spacing is cfg.assessment_interval.
  SimulatedDaySource(std::vector<AssetParams> params, SimConfig cfg, std::uint64_t seed,
                     SimulatedSourceOptions opts = {});
  std::vector<std::string> asset_ids() const override { return sim_.asset_ids(); }
  std::size_t remaining_days() const override;
  MarketDay next() override;
  bool provides_oracle() const override { return opts_.with_oracle; }

 private:
  Simulator sim_;
  SimulatedSourceOptions opts_;
};

/// Reads ticks_D<k>.csv (and latent_D<k>.csv in simulation mode) from a
/// directory, k = 0, 1, ... until a file is missing.
class FileDaySource : public DaySource {
 public:
  FileDaySource(std::filesystem::path dir, bool empirical, int assessment_interval = 900,
                double seconds_per_day = kSecondsPerDay, bool with_oracle = false);
  std::vector<std::string> asset_ids() const override { return ids_; }
  std::size_t remaining_days() const override { return n_days_ - next_; }
  MarketDay next() override;
  bool provides_oracle() const override { return with_oracle_; }
  std::size_t n_days() const noexcept { return n_days_; }

 private:
  std::filesystem::path dir_;
  bool empirical_;
  int interval_;
  double seconds_per_day_;
  bool with_oracle_;
  std::size_t n_days_ = 0;
  std::size_t next_ = 0;
  std::vector<std::string> ids_;
};

// ---------------------------------------------------------------- strategies

enum class StrategyKind {
  LowFreq100d,
  AllRefreshTSCV10d,
  AllRefreshRK10d,
  PairwiseTSCV10d,
  LatentOracle1d,
  EqualWeight
};

std::string to_string(StrategyKind k);
/// Accepts the canonical names ("pairwise-tscv-10d") and the short forms
/// without the window suffix ("pairwise-tscv", "lowfreq", "oracle").
StrategyKind strategy_from_string(const std::string& s);
/// 100 for LowFreq100d, 10 for the tick-based estimators, 1 for the oracle,
/// 0 for EqualWeight.
int default_window_days(StrategyKind k);

/// Integrated covariance over consecutive days as the sum of per-day
/// estimates (same method and assets). Pair counts add up; a pair
/// rejected on any day is zeroed and listed once.
CovEstimate combine_daily_estimates(std::span<const CovEstimate> days);

struct StrategySpec {
  StrategyKind estimator = StrategyKind::PairwiseTSCV10d;
  int holding_days = 1;
  std::vector<double> c_grid{1.0};
  Projection projection = Projection::Shift;
  /// 0 selects default_window_days(estimator).
  int window_days = 0;
  int kernel_H = 1;

  int effective_window() const;
  void validate() const;
};

struct BacktestConfig {
  std::vector<StrategySpec> strategies;
  /// Days before the first investment day (default: invest from day 101).
  std::size_t history_days = 100;
  std::size_t invest_days = 100;
  /// Observed-price assessment with positions closed overnight.
  bool empirical = false;
  double trading_days_per_year = 252.0;
  unsigned workers = 1;
};

/// Allocation made at one rebalance.
struct RebalanceRecord {
  std::size_t day = 0;
  double c = 1.0;
  PortfolioWeights weights;
  /// Annualized risk of the weights under the (projected) estimate.
  double perceived_risk = 0.0;
  long n_min = 0;
  int n_rejected_pairs = 0;
};

struct StrategyResult {
  StrategyKind estimator = StrategyKind::PairwiseTSCV10d;
  int holding_days = 1;
  double c = 1.0;
  double annualized_std = 0.0;
  double annualized_mean = 0.0;
  double max_weight = 0.0;
  double min_weight = 0.0;
  double n_long = 0.0;
  double n_short = 0.0;
  /// Simple portfolio returns per assessment interval, in time order.
  std::vector<double> period_returns;
  std::vector<std::size_t> period_days;
  std::vector<RebalanceRecord> rebalances;
};

struct BacktestReport {
  std::vector<std::string> asset_ids;
  std::size_t first_invest_day = 0;
  std::size_t n_invest_days = 0;
  int intervals_per_day = 0;
  double trading_days_per_year = 252.0;
  std::vector<StrategyResult> results;

  const StrategyResult& find(StrategyKind k, double c, int holding_days = 1) const;
};

/// Rolling out-of-sample run over every strategy and c in `cfg`. The
/// estimate for a rebalance at day d only sees days < d. Throws
/// InsufficientDataError before trading when the history or the source is
/// too short for a strategy's window.
BacktestReport out_of_sample_run(DaySource& source, const BacktestConfig& cfg);

/// Single strategy, single c.
BacktestReport out_of_sample_run(DaySource& source, const StrategySpec& spec, double c,
                                 std::size_t history_days = 100, std::size_t invest_days = 100,
                                 bool empirical = false, unsigned workers = 1);

/// std * sqrt(intervals_per_day * days_per_year).
double annualized_std(const std::vector<double>& period_returns, int intervals_per_day,
                      double days_per_year = 252.0);
double annualized_mean(const std::vector<double>& period_returns, int intervals_per_day,
                       double days_per_year = 252.0);

struct RiskCurvePoint {
  double c = 1.0;
  double annualized_std = 0.0;
  double max_weight = 0.0;
};

struct RiskCurve {
  StrategyKind estimator = StrategyKind::PairwiseTSCV10d;
  int holding_days = 1;
  std::vector<RiskCurvePoint> points;
  double argmin_c = 1.0;
  /// The minimum sits at the smallest or largest c of the grid.
  bool argmin_on_boundary = false;
};

/// One curve per (strategy, holding period); needs >= 3 distinct c values
/// per curve.
std::vector<RiskCurve> risk_curve(const BacktestReport& report);
RiskCurve risk_curve(StrategyKind k, int holding_days, std::vector<RiskCurvePoint> points);

void write_backtest_report(const std::filesystem::path& path, const BacktestReport& report);
void write_period_returns(const std::filesystem::path& path, const BacktestReport& report);
void write_risk_curves(const std::filesystem::path& path, const std::vector<RiskCurve>& curves);

// ---------------------------------------------------------------- in-sample

struct InSampleConfig {
  std::size_t n_reps = 50;
  std::vector<double> c_grid{1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.5, 3.0};
  double b = 3.0;
  int kernel_H = 1;
  Projection projection = Projection::Shift;
  double trading_days_per_year = 252.0;
  unsigned workers = 1;
};

/// w1 equal weight, w2 = e1, w3 and w4 the b-tilted pairs.
std::vector<Eigen::VectorXd> study_portfolios(int p, double b);

inline constexpr int kStudyMethods = 3;
/// Column order of the study: AllRefreshTSCV, AllRefreshRK, PairwiseTSCV.
CovMethod study_method(int m);

struct InSampleRep {
  std::size_t day = 0;
  /// [portfolio] annualized risk under the oracle.
  std::vector<double> oracle_risk;
  /// [method][portfolio] annualized perceived risk under the projected estimate.
  std::vector<std::vector<double>> perceived_risk;
  /// [method] annualized max elementwise error of the raw estimate.
  std::vector<double> a_p;
  /// [method + oracle][c] annualized actual (oracle) risk of the optimal
  /// allocation; index kStudyMethods is the oracle's own allocation.
  std::vector<std::vector<double>> actual_opt_risk;
  long n_refresh_all = 0;
  long n_pair_min = 0;
  double n_pair_median = 0.0;
};

struct SummaryStat {
  double median = 0.0;
  double rsd = 0.0;
};

/// median and IQR / 1.35 (linear-interpolated quartiles).
SummaryStat summarize(std::vector<double> values);

struct InSampleReport {
  InSampleConfig config;
  std::vector<InSampleRep> reps;
  /// [portfolio]
  std::vector<SummaryStat> oracle_risk;
  /// [method][portfolio]
  std::vector<std::vector<SummaryStat>> perceived_risk;
  std::vector<std::vector<SummaryStat>> abs_risk_diff;
  /// [method]
  std::vector<SummaryStat> a_p;
  /// [method + oracle][c] median actual risk.
  std::vector<std::vector<double>> opt_risk_curve;
};

/// Each replication is one day from `source`, which must provide the
/// latent oracle.
InSampleReport in_sample_study(DaySource& source, const InSampleConfig& cfg);
InSampleRep in_sample_replication(const MarketDay& day, const InSampleConfig& cfg);
InSampleReport summarize_in_sample(const InSampleConfig& cfg, std::vector<InSampleRep> reps);

void write_in_sample_tables(const std::filesystem::path& dir, const InSampleReport& report);

}  // namespace hfcov

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hfcov/tickdata.hpp"

namespace hfcov {

enum class RateTarget { TSRV, TSCV };

std::string to_string(RateTarget t);
RateTarget rate_target_from_string(const std::string& s);

/// Constant-volatility latent model of one trading day with i.i.d. Gaussian
/// observation noise. Asset i follows
///   X_i = sigma_i (a_i W + sqrt(1 - a_i^2) B_i),
/// so the integrated covariance over the day is sigma_i sigma_j a_i a_j off
/// the diagonal and sigma_i^2 on it.
struct ConstantVolModel {
  Eigen::VectorXd daily_sigma;
  Eigen::VectorXd factor_loading;
  double noise_std = 0.0005;
  double seconds_per_day = 23400.0;

  Eigen::Index p() const noexcept { return daily_sigma.size(); }
  Eigen::MatrixXd integrated_cov() const;
  void validate() const;
};

/// Observed panel of `model` with, per asset, `tick_counts[i]` trade times
/// drawn uniformly on the day (a Poisson process conditioned on its count).
TickPanel simulate_constant_vol_panel(const ConstantVolModel& model,
                                      const std::vector<std::size_t>& tick_counts,
                                      std::mt19937_64& rng);

struct RateConfig {
  RateTarget target = RateTarget::TSRV;
  std::vector<std::size_t> n_grid{500, 1000, 2000, 4000, 8000, 16000};
  std::size_t n_reps = 200;
  std::uint64_t seed = 0;
  double daily_sigma = 0.02;
  double noise_std = 0.0005;
  /// Correlation of the TSCV pair (ignored for TSRV).
  double rho = 0.5;
  /// Exceedance curve abscissae: 0, x_step, ..., x_max.
  double x_max = 3.0;
  double x_step = 0.05;
  unsigned workers = 1;
};

/// Minimum replication count below which a rate experiment is flagged.
inline constexpr std::size_t kMinStableReps = 50;

struct ExceedancePoint {
  double x = 0.0;
  double exceedance = 0.0;
};

/// Normalized errors are (estimate - truth) / scale with scale = the true
/// integrated variance (TSRV) or sqrt(IV_X IV_Y) (TSCV). For TSRV, n is the
/// tick count; for TSCV each asset gets round(1.5 n) ticks so the pairwise
/// refresh count is close to n, and n_effective holds its mean.
struct RateExperiment {
  RateTarget target = RateTarget::TSRV;
  std::vector<std::size_t> n_grid;
  std::size_t n_reps = 0;
  std::uint64_t seed = 0;
  /// n_grid.size() x n_reps signed normalized errors.
  Eigen::MatrixXd errors;
  std::vector<double> n_effective;
  std::vector<double> rmse;
  /// Least-squares slope of log rmse against log n_effective.
  double fitted_slope = 0.0;
  /// Exceedance of n^{1/6} |error| at the largest n.
  std::vector<ExceedancePoint> exceedance_curve;
  /// Set when n_reps < kMinStableReps.
  bool unstable = false;

  /// Fraction of adjacent grid pairs with strictly decreasing rmse.
  double decreasing_fraction() const;
};

/// Throws ArgumentError for a grid shorter than 4, not strictly increasing,
/// or with n < 16, and for zero reps or non-positive scales.
RateExperiment run_rate_experiment(const RateConfig& cfg);

/// P(e > x) over `normalized` for each x in 0, step, ..., x_max.
std::vector<ExceedancePoint> exceedance_curve(const std::vector<double>& normalized, double x_max,
                                              double x_step);

struct TailRow {
  double x = 0.0;
  double exceedance = 0.0;
  /// prefactor * exp(-C x^2); NaN when the fit is degenerate.
  double fitted = 0.0;
};

struct TailShapeOptions {
  double fit_lo = 0.5;
  double fit_hi = 2.0;
  /// Curve points below this exceedance are left out of the concavity check.
  double min_exceedance = 0.02;
  /// Concavity is checked on every `stride`-th curve point.
  std::size_t stride = 5;
  double tolerance = 0.1;
};

struct TailShapeReport {
  std::vector<TailRow> rows;
  /// Least-squares fit of log(exceedance) = log(prefactor) - C x^2 over the
  /// positive points with x in [fit_lo, fit_hi]. NaN when degenerate.
  double C = 0.0;
  double prefactor = 0.0;
  std::size_t fit_points = 0;
  /// Second differences of log exceedance are all <= tolerance.
  bool log_concave = true;
  double max_second_difference = 0.0;
  /// Fewer than 3 positive points in the fit range.
  bool degenerate = false;
  std::string warning;
};

TailShapeReport tail_shape_report(const std::vector<ExceedancePoint>& curve,
                                  const TailShapeOptions& opts = {});
inline TailShapeReport tail_shape_report(const RateExperiment& exp,
                                         const TailShapeOptions& opts = {}) {
  return tail_shape_report(exp.exceedance_curve, opts);
}

/// rate.csv (n, n_effective, rmse) and tail.csv (x, exceedance, fitted).
void write_rate_table(const std::filesystem::path& path, const RateExperiment& exp);
void write_tail_table(const std::filesystem::path& path, const TailShapeReport& rep);

/// Medians over days of |estimate - latent oracle| per entry for the
/// pairwise and all-refresh TSCV estimators on the default simulation recipe.
struct RefreshComparison {
  std::vector<std::string> asset_ids;
  Eigen::MatrixXd median_abs_error_pairwise;
  Eigen::MatrixXd median_abs_error_allrefresh;
  Eigen::MatrixXi pair_counts;
  long n_all_refresh_median = 0;
};

RefreshComparison compare_refresh_schemes(int p, std::size_t n_days, std::uint64_t seed,
                                          unsigned workers = 1);

/// Median a_p (max entrywise error of the pairwise TSCV matrix against the
/// exact integrated covariance) on constant-volatility panels where every
/// asset has `ticks_per_asset` trades, so the per-pair refresh count does not
/// depend on p.
struct ApGrowthPoint {
  int p = 0;
  double median_a_p = 0.0;
};

std::vector<ApGrowthPoint> ap_growth_experiment(const std::vector<int>& p_grid,
                                                std::size_t ticks_per_asset, std::size_t n_reps,
                                                std::uint64_t seed, unsigned workers = 1);

}  // namespace hfcov

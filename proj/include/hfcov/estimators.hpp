#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "hfcov/cov_estimate.hpp"
#include "hfcov/tickdata.hpp"

namespace hfcov {

/// Slow (K) and fast (J) subsampling scales of the two-scale estimators.
struct TwoScaleConfig {
  int K = 2;
  int J = 1;
};

/// Minimum number of observations for any two-scale estimate.
inline constexpr std::size_t kMinTwoScaleObs = 8;

/// J = 1 and K near n^{2/3}, stepped until nbar_K = (n-K+1)/K lies in
/// [n^{1/3}/2, 2 n^{1/3}]. `n` is the number of observations.
TwoScaleConfig choose_two_scale(std::size_t n);

/// Slow scale for noise-free synchronous data: J = 1 and
/// K = round((1.5 n)^{1/3}), the minimizer of K^-2 + (4/3) K / n.
TwoScaleConfig choose_two_scale_noiseless(std::size_t n);

/// Average of the K-lag realized variances:
/// (1/K) * sum_{i=K..n} (x_i - x_{i-K})^2 for x_0..x_n.
double subsampled_rv(std::span<const double> x, int K);
double subsampled_rcov(std::span<const double> x, std::span<const double> y, int K);

/// Two-scale realized variance [X,X]^(K) - (nbar_K / nbar_J) [X,X]^(J).
/// May be negative.
double tsrv(std::span<const double> prices, TwoScaleConfig cfg);

/// Two-scale realized covariance of two series sampled on a common grid.
double tscv(std::span<const double> a, std::span<const double> b, TwoScaleConfig cfg);

/// (tsrv(a+b) - tsrv(a-b)) / 4.
double tscv_polarized(std::span<const double> a, std::span<const double> b, TwoScaleConfig cfg);

/// Parzen weight function on [0, 1].
double parzen_kernel(double x);

/// Realized kernel gamma_0 + sum_{h=1..H} k((h-1)/H) (gamma_h + gamma_{-h})
/// with Parzen k. Requires H + 2 observations.
double realized_kernel(std::span<const double> prices, int H = 1);
/// Polarized realized-kernel covariance (RK(a+b) - RK(a-b)) / 4.
double realized_kernel_cov(std::span<const double> a, std::span<const double> b, int H = 1);

/// Sum of squared first differences.
double realized_variance(std::span<const double> prices);

/// Per-day sample covariance of close-to-close log-returns. `daily_closes`
/// is n_days x p; needs at least 3 closes (2 returns).
CovEstimate lowfreq_sample_cov(const Eigen::MatrixXd& daily_closes,
                               std::vector<std::string> asset_ids = {});

struct MatrixOptions {
  unsigned workers = 1;
};

/// Diagonal by TSRV on each asset's own ticks; off-diagonals by TSCV on each
/// pair's refresh grid. Pairs with fewer than 8 refresh times are zeroed
/// and listed in `rejections`.
CovEstimate estimate_matrix_pairwise(const TickPanel& panel, double window_days,
                                     MatrixOptions opts = {});

enum class AllRefreshMode { TSCV, RK };

/// All entries from the single all-refresh grid. Throws when the grid has
/// fewer than 8 refresh times.
CovEstimate estimate_matrix_allrefresh(const TickPanel& panel, double window_days,
                                       AllRefreshMode mode, int kernel_H = 1,
                                       MatrixOptions opts = {});

/// TSCV matrix of synchronous series (columns of `prices`, rows = time)
/// with one two-scale config for every entry; pair counts are the row count.
CovEstimate estimate_matrix_synchronous(const Eigen::MatrixXd& prices,
                                        std::vector<std::string> asset_ids, double window_days,
                                        CovMethod method, TwoScaleConfig cfg);

}  // namespace hfcov

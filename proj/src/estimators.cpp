#include "hfcov/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hfcov/error.hpp"
#include "hfcov/parallel.hpp"
#include "hfcov/sync.hpp"

namespace hfcov {

namespace {

double nbar(std::size_t n, int k) { return static_cast<double>(n - static_cast<std::size_t>(k) + 1) / k; }

void require_two_scale(std::size_t len, TwoScaleConfig cfg) {
  if (cfg.J < 1 || cfg.K <= cfg.J)
    throw ArgumentError("two-scale config needs 1 <= J < K");
  if (len < static_cast<std::size_t>(cfg.K) + 1)
    throw InsufficientDataError("two-scale estimator needs at least K+1 = " +
                                std::to_string(cfg.K + 1) + " observations, got " +
                                std::to_string(len));
}

}  // namespace

TwoScaleConfig choose_two_scale(std::size_t n) {
  if (n < kMinTwoScaleObs)
    throw InsufficientDataError("choose_two_scale needs n >= 8, got " + std::to_string(n));
  const double nd = static_cast<double>(n);
  const double cube_root = std::cbrt(nd);
  const double lo = 0.5 * cube_root;
  const double hi = 2.0 * cube_root;
  const int k_max = static_cast<int>(n) - 1;
  int K = std::clamp(static_cast<int>(std::lround(std::pow(nd, 2.0 / 3.0))), 2, k_max);
  while (nbar(n, K) > hi && K < k_max) ++K;
  while (nbar(n, K) < lo && K > 2) --K;
  return {K, 1};
}

TwoScaleConfig choose_two_scale_noiseless(std::size_t n) {
  if (n < kMinTwoScaleObs)
    throw InsufficientDataError("choose_two_scale_noiseless needs n >= 8, got " + std::to_string(n));
  const int k_max = static_cast<int>(n) - 1;
  const int K = std::clamp(static_cast<int>(std::lround(std::cbrt(1.5 * static_cast<double>(n)))), 2, k_max);
  return {K, 1};
}

double subsampled_rcov(std::span<const double> x, std::span<const double> y, int K) {
  double sum = 0.0;
  for (std::size_t i = static_cast<std::size_t>(K); i < x.size(); ++i)
    sum += (x[i] - x[i - K]) * (y[i] - y[i - K]);
  return sum / K;
}

double subsampled_rv(std::span<const double> x, int K) { return subsampled_rcov(x, x, K); }

double tscv(std::span<const double> a, std::span<const double> b, TwoScaleConfig cfg) {
  if (a.size() != b.size())
    throw ArgumentError("tscv: series lengths differ (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  require_two_scale(a.size(), cfg);
  const std::size_t n = a.size() - 1;
  const double slow = subsampled_rcov(a, b, cfg.K);
  const double fast = subsampled_rcov(a, b, cfg.J);
  return slow - nbar(n, cfg.K) / nbar(n, cfg.J) * fast;
}

double tsrv(std::span<const double> prices, TwoScaleConfig cfg) { return tscv(prices, prices, cfg); }

double tscv_polarized(std::span<const double> a, std::span<const double> b, TwoScaleConfig cfg) {
  if (a.size() != b.size()) throw ArgumentError("tscv_polarized: series lengths differ");
  std::vector<double> sum(a.size()), diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum[i] = a[i] + b[i];
    diff[i] = a[i] - b[i];
  }
  return (tsrv(sum, cfg) - tsrv(diff, cfg)) / 4.0;
}

double parzen_kernel(double x) {
  x = std::abs(x);
  if (x <= 0.5) return 1.0 - 6.0 * x * x + 6.0 * x * x * x;
  if (x <= 1.0) return 2.0 * (1.0 - x) * (1.0 - x) * (1.0 - x);
  return 0.0;
}

double realized_kernel(std::span<const double> prices, int H) {
  if (H < 1) throw ArgumentError("realized_kernel: bandwidth H must be >= 1");
  if (prices.size() < static_cast<std::size_t>(H) + 2)
    throw InsufficientDataError("realized_kernel needs at least H+2 observations");
  const std::size_t n = prices.size() - 1;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = prices[i + 1] - prices[i];
  auto gamma = [&](std::size_t h) {
    double s = 0.0;
    for (std::size_t i = h; i < n; ++i) s += r[i] * r[i - h];
    return s;
  };
  double out = gamma(0);
  for (int h = 1; h <= H; ++h) {
    // gamma_{-h} equals gamma_h for a single series.
    out += parzen_kernel(static_cast<double>(h - 1) / H) * 2.0 * gamma(static_cast<std::size_t>(h));
  }
  return out;
}

double realized_kernel_cov(std::span<const double> a, std::span<const double> b, int H) {
  if (a.size() != b.size()) throw ArgumentError("realized_kernel_cov: series lengths differ");
  std::vector<double> sum(a.size()), diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum[i] = a[i] + b[i];
    diff[i] = a[i] - b[i];
  }
  return (realized_kernel(sum, H) - realized_kernel(diff, H)) / 4.0;
}

double realized_variance(std::span<const double> prices) {
  double s = 0.0;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    const double d = prices[i] - prices[i - 1];
    s += d * d;
  }
  return s;
}

CovEstimate lowfreq_sample_cov(const Eigen::MatrixXd& daily_closes, std::vector<std::string> asset_ids) {
  const Eigen::Index n_days = daily_closes.rows();
  const Eigen::Index p = daily_closes.cols();
  if (n_days < 3)
    throw InsufficientDataError("low-frequency sample covariance needs at least 3 daily closes");
  if (!asset_ids.empty() && static_cast<Eigen::Index>(asset_ids.size()) != p)
    throw ArgumentError("lowfreq_sample_cov: asset id count does not match columns");
  const Eigen::MatrixXd returns =
      daily_closes.bottomRows(n_days - 1) - daily_closes.topRows(n_days - 1);
  const Eigen::RowVectorXd mean = returns.colwise().mean();
  const Eigen::MatrixXd centered = returns.rowwise() - mean;
  CovEstimate est;
  est.asset_ids = std::move(asset_ids);
  est.matrix = (centered.transpose() * centered) / static_cast<double>(returns.rows() - 1);
  est.matrix = 0.5 * (est.matrix + est.matrix.transpose()).eval();
  est.method = CovMethod::LowFreqSample;
  est.pair_counts = Eigen::MatrixXi::Constant(p, p, static_cast<int>(returns.rows()));
  est.n_min = returns.rows();
  est.window_days = 1.0;
  return est;
}

CovEstimate estimate_matrix_pairwise(const TickPanel& panel, double window_days, MatrixOptions opts) {
  const std::size_t p = panel.num_assets();
  if (p == 0) throw ArgumentError("estimate_matrix_pairwise: empty panel");
  CovEstimate est;
  est.asset_ids = panel.asset_ids();
  est.method = CovMethod::PairwiseTSCV;
  est.window_days = window_days;
  const auto P = static_cast<Eigen::Index>(p);
  est.matrix = Eigen::MatrixXd::Zero(P, P);
  est.pair_counts = Eigen::MatrixXi::Zero(P, P);

  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  tasks.reserve(p * (p + 1) / 2);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) tasks.emplace_back(i, j);

  std::vector<int> rejected(tasks.size(), 0);
  parallel_for(tasks.size(), opts.workers, [&](std::size_t t) {
    const auto [i, j] = tasks[t];
    const auto& a = panel.series[i];
    const auto& b = panel.series[j];
    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    if (i == j) {
      est.pair_counts(ii, ii) = static_cast<int>(a.size());
      if (a.size() < kMinTwoScaleObs) {
        rejected[t] = 1;
        return;
      }
      est.matrix(ii, ii) = tsrv(a.log_prices, choose_two_scale(a.size()));
      return;
    }
    if (a.empty() || b.empty()) {
      rejected[t] = 1;
      return;
    }
    const SyncGrid grid = pairwise_refresh(a, b);
    const int n = static_cast<int>(grid.n_refresh());
    est.pair_counts(ii, jj) = n;
    est.pair_counts(jj, ii) = n;
    if (grid.n_refresh() < kMinTwoScaleObs) {
      rejected[t] = 1;
      return;
    }
    const auto xa = sampled_log_prices(grid, a);
    const auto xb = sampled_log_prices(grid, b);
    const double v = tscv(xa, xb, choose_two_scale(grid.n_refresh()));
    est.matrix(ii, jj) = v;
    est.matrix(jj, ii) = v;
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (!rejected[t]) continue;
    const auto [i, j] = tasks[t];
    est.rejections.push_back({panel.series[i].asset_id, panel.series[j].asset_id,
                              est.pair_counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                              "fewer than 8 synchronized observations"});
  }

  long n_min = std::numeric_limits<long>::max();
  for (Eigen::Index i = 0; i < P; ++i)
    for (Eigen::Index j = 0; j < P; ++j)
      if (i != j || P == 1) n_min = std::min<long>(n_min, est.pair_counts(i, j));
  est.n_min = n_min;
  return est;
}

CovEstimate estimate_matrix_allrefresh(const TickPanel& panel, double window_days, AllRefreshMode mode,
                                       int kernel_H, MatrixOptions opts) {
  const SyncGrid grid = all_refresh(panel);
  const std::size_t n = grid.n_refresh();
  if (n < kMinTwoScaleObs)
    throw InsufficientDataError("all-refresh grid has only " + std::to_string(n) +
                                " refresh times (need 8)");
  const std::size_t p = panel.num_assets();
  std::vector<std::vector<double>> sampled(p);
  for (std::size_t k = 0; k < p; ++k) sampled[k] = sampled_log_prices(grid, panel.series[k]);

  CovEstimate est;
  est.asset_ids = panel.asset_ids();
  est.method = mode == AllRefreshMode::TSCV ? CovMethod::AllRefreshTSCV : CovMethod::AllRefreshRK;
  est.window_days = window_days;
  const auto P = static_cast<Eigen::Index>(p);
  est.matrix = Eigen::MatrixXd::Zero(P, P);
  est.pair_counts = Eigen::MatrixXi::Constant(P, P, static_cast<int>(n));
  est.n_min = static_cast<long>(n);

  const TwoScaleConfig cfg = choose_two_scale(n);
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) tasks.emplace_back(i, j);
  parallel_for(tasks.size(), opts.workers, [&](std::size_t t) {
    const auto [i, j] = tasks[t];
    double v = 0.0;
    if (mode == AllRefreshMode::TSCV) {
      v = tscv(sampled[i], sampled[j], cfg);
    } else {
      v = i == j ? realized_kernel(sampled[i], kernel_H)
                 : realized_kernel_cov(sampled[i], sampled[j], kernel_H);
    }
    est.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    est.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
  });
  return est;
}

CovEstimate estimate_matrix_synchronous(const Eigen::MatrixXd& prices, std::vector<std::string> asset_ids,
                                        double window_days, CovMethod method, TwoScaleConfig cfg) {
  const auto T = static_cast<std::size_t>(prices.rows());
  const Eigen::Index p = prices.cols();
  require_two_scale(T, cfg);
  const std::size_t n = T - 1;
  auto gram = [&](int k) -> Eigen::MatrixXd {
    const Eigen::Index rows = static_cast<Eigen::Index>(T) - k;
    const Eigen::MatrixXd d = prices.bottomRows(rows) - prices.topRows(rows);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, p);
    g.selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
    return g.selfadjointView<Eigen::Lower>();
  };
  CovEstimate est;
  est.asset_ids = std::move(asset_ids);
  est.method = method;
  est.window_days = window_days;
  est.matrix = gram(cfg.K) / cfg.K - (nbar(n, cfg.K) / nbar(n, cfg.J)) * gram(cfg.J) / cfg.J;
  est.pair_counts = Eigen::MatrixXi::Constant(p, p, static_cast<int>(T));
  est.n_min = static_cast<long>(T);
  return est;
}

}  // namespace hfcov

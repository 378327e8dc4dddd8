#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hfcov/cov_estimate.hpp"
#include "hfcov/tickdata.hpp"

namespace hfcov {

inline constexpr int kSecondsPerDay = 23400;

/// Per-asset coefficients of the factor model with OU log-volatility
///   dX = mu dt + rho sigma dB + sqrt(1 - rho^2) sigma dW + sqrt(lambda) dZ
///   d(log sigma) = alpha (beta0 - log sigma) dt + beta1 dU
/// Rates are per model time unit (one trading year, see SimConfig).
struct AssetParams {
  std::string asset_id;
  double mu = 0.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double alpha = 0.0;
  double rho = 0.0;
  double lambda = 0.0;
  /// Expected trades per day.
  double trade_intensity = 0.0;
};

/// x_j ~ U[0.7, 1.3]; (mu, beta0, beta1, alpha, rho) = (0.03 x1, -x2, 0.75 x3,
/// x4 / 40, -0.7); lambda = exp(beta0); intensity of asset i is 0.02 i 23400.
std::vector<AssetParams> default_params(int p, std::uint64_t seed);
void validate_params(const std::vector<AssetParams>& params);
std::string default_asset_id(int index);

struct SimConfig {
  int seconds_per_day = kSecondsPerDay;
  /// Trading days per model time unit; dt = 1 / (days_per_unit * seconds_per_day).
  double days_per_unit = 252.0;
  /// Multiplies beta1 (vol of log-vol).
  double vol_of_vol_scale = 0.30;
  double noise_std = 0.0005;
  /// Tick times are rounded to this resolution (seconds).
  double tick_time_resolution = 1e-6;
  /// Spacing of the stored assessment grid (must divide seconds_per_day).
  int assessment_interval = 900;
  /// Keep the full 1-second latent and log-vol grids of each day.
  bool keep_grid = false;
  /// Compute the latent-grid TSCV oracle of each day.
  bool daily_oracle = false;
  unsigned workers = 1;
};

struct DayPaths {
  std::size_t day_index = 0;
  TickPanel ticks;
  /// Latent log-prices at the open (= previous close) and close.
  Eigen::VectorXd open;
  Eigen::VectorXd close;
  /// Latent log-prices at multiples of assessment_interval, open included.
  Eigen::MatrixXd assessment_grid;
  /// (seconds_per_day + 1) x p grids; empty unless keep_grid.
  Eigen::MatrixXd latent;
  Eigen::MatrixXd log_vol;
  /// Log-volatility state at the close.
  Eigen::VectorXd log_vol_close;
  /// Present when daily_oracle is set.
  CovEstimate oracle;
  bool has_oracle = false;
};

/// Day-by-day generator. Every asset owns independent RNG streams for its
/// path and its ticks; the common factor W has its own stream, so results do
/// not depend on the worker count.
class Simulator {
 public:
  Simulator(std::vector<AssetParams> params, SimConfig cfg, std::uint64_t seed);

  DayPaths next_day();

  std::size_t days_generated() const noexcept { return day_; }
  const std::vector<AssetParams>& params() const noexcept { return params_; }
  const SimConfig& config() const noexcept { return cfg_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::vector<std::string> asset_ids() const;

 private:
  std::vector<AssetParams> params_;
  SimConfig cfg_;
  std::uint64_t seed_;
  std::size_t day_ = 0;
  std::mt19937_64 common_rng_;
  std::vector<std::mt19937_64> path_rng_;
  std::vector<std::mt19937_64> tick_rng_;
  Eigen::VectorXd x_;
  Eigen::VectorXd log_vol_;
};

struct SimPaths {
  std::vector<AssetParams> params;
  SimConfig config;
  std::uint64_t rng_seed = 0;
  std::vector<DayPaths> days;

  std::size_t n_days() const noexcept { return days.size(); }
  std::vector<std::string> asset_ids() const;
};

/// Runs the simulator for n_days with the full latent grid retained.
SimPaths simulate(const std::vector<AssetParams>& params, std::size_t n_days, double noise_std,
                  std::uint64_t seed, SimConfig cfg = {});

/// TSCV matrix of the noiseless 1-second latent grid over days
/// [first_day, first_day + n_days).
CovEstimate latent_oracle_cov(const SimPaths& paths, std::size_t first_day, std::size_t n_days);
CovEstimate latent_oracle_cov(const DayPaths& day, const std::vector<std::string>& ids);

/// Latent log-returns at `interval_seconds` spacing within each day of the
/// range; rows are intervals, columns assets.
Eigen::MatrixXd latent_window_returns(const SimPaths& paths, std::size_t first_day,
                                      std::size_t n_days, int interval_seconds = 900);

/// ticks_D<k>.csv and, when the day kept its grid, latent_D<k>.csv
/// (time_s plus one column per asset, every `latent_stride` seconds).
void write_day_files(const std::filesystem::path& dir, const DayPaths& day,
                     const std::vector<std::string>& ids, int latent_stride = 1);
std::string latent_file_name(std::size_t day_index);

/// params.csv and sim.json describing a run.
void write_sim_params(const std::filesystem::path& dir, const std::vector<AssetParams>& params,
                      const SimConfig& cfg, std::uint64_t seed, std::size_t n_days);
std::vector<AssetParams> read_sim_params(const std::filesystem::path& params_csv);

}  // namespace hfcov

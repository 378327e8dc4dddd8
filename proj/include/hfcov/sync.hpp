#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hfcov/tickdata.hpp"

namespace hfcov {

/// Refresh-time grid v_1..v_n with, per included asset, the index of its
/// last tick at or before each v_i. The virtual origin v_0 = 0 is not stored.
struct SyncGrid {
  std::vector<double> refresh_times;
  std::vector<std::string> asset_ids;
  std::vector<std::vector<std::size_t>> sample_indices;  // [asset][i]

  std::size_t n_refresh() const noexcept { return refresh_times.size(); }
};

/// Refresh grid over any subset of series (all of them for all_refresh).
SyncGrid refresh_grid(std::span<const TickSeries* const> series);

SyncGrid pairwise_refresh(const TickSeries& a, const TickSeries& b);
SyncGrid all_refresh(const TickPanel& panel);

/// Previous-tick log-prices of `series` on the grid.
std::vector<double> sampled_log_prices(const SyncGrid& grid, const TickSeries& series);

/// Number of pairwise refresh times only (no sample index storage).
std::size_t pairwise_refresh_count(const TickSeries& a, const TickSeries& b);

/// Symmetric matrix of pairwise refresh counts; the diagonal holds each
/// asset's own tick count.
Eigen::MatrixXi pairwise_refresh_counts(const TickPanel& panel, unsigned workers = 1);

}  // namespace hfcov

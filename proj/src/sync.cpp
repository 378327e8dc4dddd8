#include "hfcov/sync.hpp"

#include <algorithm>

#include "hfcov/error.hpp"
#include "hfcov/parallel.hpp"

namespace hfcov {

SyncGrid refresh_grid(std::span<const TickSeries* const> series) {
  SyncGrid grid;
  const std::size_t p = series.size();
  grid.asset_ids.reserve(p);
  grid.sample_indices.resize(p);
  for (const auto* s : series) {
    if (s->empty()) throw InsufficientDataError("asset " + s->asset_id + " has no ticks");
    grid.asset_ids.push_back(s->asset_id);
  }

  // next[k] = index of the first tick of asset k strictly after the last refresh time.
  std::vector<std::size_t> next(p, 0);
  for (std::size_t k = 0; k < p; ++k) {
    const auto& t = series[k]->times;
    next[k] = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), 0.0) - t.begin());
  }

  std::size_t guess = series[0]->size();
  for (const auto* s : series) guess = std::min(guess, s->size());
  grid.refresh_times.reserve(guess);
  for (auto& v : grid.sample_indices) v.reserve(guess);

  for (;;) {
    double v = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      if (next[k] == series[k]->size()) return grid;
      v = std::max(v, series[k]->times[next[k]]);
    }
    grid.refresh_times.push_back(v);
    for (std::size_t k = 0; k < p; ++k) {
      const auto& t = series[k]->times;
      std::size_t j = next[k];
      while (j < t.size() && t[j] <= v) ++j;
      next[k] = j;
      grid.sample_indices[k].push_back(j - 1);
    }
  }
}

SyncGrid pairwise_refresh(const TickSeries& a, const TickSeries& b) {
  const TickSeries* pair[2] = {&a, &b};
  return refresh_grid(pair);
}

SyncGrid all_refresh(const TickPanel& panel) {
  std::vector<const TickSeries*> ptrs;
  ptrs.reserve(panel.num_assets());
  for (const auto& s : panel.series) ptrs.push_back(&s);
  if (ptrs.empty()) throw ArgumentError("all_refresh: empty panel");
  return refresh_grid(ptrs);
}

std::vector<double> sampled_log_prices(const SyncGrid& grid, const TickSeries& series) {
  const auto it = std::find(grid.asset_ids.begin(), grid.asset_ids.end(), series.asset_id);
  if (it == grid.asset_ids.end())
    throw ArgumentError("asset " + series.asset_id + " is not part of the grid");
  const auto& idx = grid.sample_indices[static_cast<std::size_t>(it - grid.asset_ids.begin())];
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    if (i >= series.size())
      throw ArgumentError("asset " + series.asset_id + " does not match the grid it was built from");
    out.push_back(series.log_prices[i]);
  }
  return out;
}

std::size_t pairwise_refresh_count(const TickSeries& a, const TickSeries& b) {
  if (a.empty() || b.empty()) return 0;
  const auto& ta = a.times;
  const auto& tb = b.times;
  std::size_t i = static_cast<std::size_t>(std::upper_bound(ta.begin(), ta.end(), 0.0) - ta.begin());
  std::size_t j = static_cast<std::size_t>(std::upper_bound(tb.begin(), tb.end(), 0.0) - tb.begin());
  std::size_t count = 0;
  while (i < ta.size() && j < tb.size()) {
    const double v = std::max(ta[i], tb[j]);
    ++count;
    while (i < ta.size() && ta[i] <= v) ++i;
    while (j < tb.size() && tb[j] <= v) ++j;
  }
  return count;
}

Eigen::MatrixXi pairwise_refresh_counts(const TickPanel& panel, unsigned workers) {
  const auto p = static_cast<Eigen::Index>(panel.num_assets());
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(p, p);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < p; ++i) {
    counts(i, i) = static_cast<int>(panel.series[static_cast<std::size_t>(i)].size());
    for (Eigen::Index j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
  }
  parallel_for(pairs.size(), workers, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const int n = static_cast<int>(pairwise_refresh_count(panel.series[static_cast<std::size_t>(i)],
                                                          panel.series[static_cast<std::size_t>(j)]));
    counts(i, j) = n;
    counts(j, i) = n;
  });
  return counts;
}

}  // namespace hfcov

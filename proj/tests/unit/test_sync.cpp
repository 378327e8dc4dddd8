#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hfcov/error.hpp"
#include "hfcov/sync.hpp"

using namespace hfcov;

namespace {

TickSeries series(const std::string& id, std::vector<double> t) {
  TickSeries s;
  s.asset_id = id;
  for (std::size_t i = 0; i < t.size(); ++i) s.log_prices.push_back(0.1 * static_cast<double>(i));
  s.times = std::move(t);
  return s;
}

std::vector<double> times_at(const TickSeries& s, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  for (auto i : idx) out.push_back(s.times[i]);
  return out;
}

// Literal transcription of the recursion: scan forward for the next tick
// strictly after v of every asset, take the max, stop when one runs out.
std::vector<double> reference_refresh(const std::vector<const TickSeries*>& ss) {
  std::vector<double> out;
  double v = 0.0;
  for (;;) {
    double next = -1.0;
    for (const auto* s : ss) {
      double first_after = -1.0;
      for (double t : s->times)
        if (t > v) {
          first_after = t;
          break;
        }
      if (first_after < 0.0) return out;
      next = std::max(next, first_after);
    }
    out.push_back(next);
    v = next;
  }
}

TickSeries random_series(const std::string& id, std::mt19937_64& rng, double rate, double T) {
  std::exponential_distribution<double> e(rate);
  std::vector<double> t;
  for (double x = e(rng); x < T; x += e(rng)) t.push_back(x);
  if (t.empty()) t.push_back(T / 2);
  return series(id, t);
}

}  // namespace

TEST(PairwiseRefresh, Interleaved) {
  const auto a = series("a", {1, 3, 5});
  const auto b = series("b", {2, 4, 6});
  const SyncGrid g = pairwise_refresh(a, b);
  EXPECT_EQ(g.refresh_times, (std::vector<double>{2, 4, 6}));
  EXPECT_EQ(times_at(a, g.sample_indices[0]), (std::vector<double>{1, 3, 5}));
  EXPECT_EQ(times_at(b, g.sample_indices[1]), (std::vector<double>{2, 4, 6}));
}

TEST(PairwiseRefresh, SynchronousIsOwnGrid) {
  const auto a = series("a", {1, 2, 3});
  const auto b = series("b", {1, 2, 3});
  const SyncGrid g = pairwise_refresh(a, b);
  EXPECT_EQ(g.refresh_times, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(sampled_log_prices(g, a), a.log_prices);
  EXPECT_EQ(sampled_log_prices(g, b), b.log_prices);
}

TEST(PairwiseRefresh, LateSingleTick) {
  const auto a = series("a", {1, 2, 3, 4, 5});
  const auto b = series("b", {6});
  const SyncGrid g = pairwise_refresh(a, b);
  EXPECT_EQ(g.refresh_times, (std::vector<double>{6}));
  EXPECT_EQ(g.n_refresh(), 1u);
  EXPECT_EQ(times_at(a, g.sample_indices[0]), (std::vector<double>{5}));
}

TEST(PairwiseRefresh, EmptySeriesRejected) {
  const auto a = series("a", {1, 2});
  const auto b = series("b", {});
  EXPECT_THROW(pairwise_refresh(a, b), InsufficientDataError);
}

TEST(PairwiseRefresh, TickAtZeroIsNotAfterOrigin) {
  const auto a = series("a", {0, 2});
  const auto b = series("b", {1});
  EXPECT_EQ(pairwise_refresh(a, b).refresh_times, (std::vector<double>{2}));
}

TEST(AllRefresh, ThreeAssets) {
  TickPanel p{10.0, {series("x", {1, 4}), series("y", {2, 5}), series("z", {3, 6})}};
  const SyncGrid g = all_refresh(p);
  EXPECT_EQ(g.refresh_times, (std::vector<double>{3, 6}));
}

TEST(AllRefresh, SingleAssetOwnTimes) {
  TickPanel p{10.0, {series("x", {0.5, 1.5, 7})}};
  EXPECT_EQ(all_refresh(p).refresh_times, (std::vector<double>{0.5, 1.5, 7}));
}

TEST(AllRefresh, SlowAssetDominates) {
  TickPanel p{20.0, {series("x", {1, 2, 3}), series("y", {10})}};
  const SyncGrid g = all_refresh(p);
  EXPECT_EQ(g.refresh_times, (std::vector<double>{10}));
}

TEST(AllRefresh, EmptyAssetNamed) {
  TickPanel p{20.0, {series("x", {1, 2, 3}), series("quiet", {})}};
  try {
    all_refresh(p);
    FAIL() << "expected InsufficientDataError";
  } catch (const InsufficientDataError& e) {
    EXPECT_NE(std::string(e.what()).find("quiet"), std::string::npos);
  }
}

TEST(SampledLogPrices, PreviousTick) {
  SyncGrid g;
  g.refresh_times = {2, 4};
  g.asset_ids = {"s"};
  TickSeries s{"s", {1, 3}, {0.0, 0.5}};
  g.sample_indices = {{0, 1}};
  EXPECT_EQ(sampled_log_prices(g, s), (std::vector<double>{0.0, 0.5}));
}

TEST(SampledLogPrices, EmptyGridGivesEmpty) {
  SyncGrid g;
  g.asset_ids = {"s"};
  g.sample_indices = {{}};
  TickSeries s{"s", {1}, {0.0}};
  EXPECT_TRUE(sampled_log_prices(g, s).empty());
}

TEST(SampledLogPrices, ForeignSeriesRejected) {
  const auto a = series("a", {1, 3});
  const auto b = series("b", {2, 4});
  const auto c = series("c", {2, 4});
  EXPECT_THROW(sampled_log_prices(pairwise_refresh(a, b), c), ArgumentError);
}

TEST(SyncProperties, RandomPanelsMatchReferenceAndInvariants) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 30; ++rep) {
    TickPanel p;
    p.window_length_seconds = 1000.0;
    for (int i = 0; i < 4; ++i)
      p.series.push_back(random_series("s" + std::to_string(i), rng, 0.05 * (i + 1), 1000.0));
    const SyncGrid all = all_refresh(p);
    std::vector<const TickSeries*> ptrs;
    for (const auto& s : p.series) ptrs.push_back(&s);
    EXPECT_EQ(all.refresh_times, reference_refresh(ptrs));

    const Eigen::MatrixXi counts = pairwise_refresh_counts(p, 1);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_LE(all.n_refresh(), p.series[i].size());
      EXPECT_EQ(counts(i, i), static_cast<int>(p.series[i].size()));
      for (std::size_t j = i + 1; j < 4; ++j) {
        const SyncGrid g = pairwise_refresh(p.series[i], p.series[j]);
        EXPECT_EQ(g.refresh_times, reference_refresh({&p.series[i], &p.series[j]}));
        EXPECT_GE(g.n_refresh(), all.n_refresh());
        EXPECT_EQ(counts(i, j), static_cast<int>(g.n_refresh()));
        EXPECT_EQ(counts(j, i), counts(i, j));

        for (int k = 0; k < 2; ++k) {
          const auto& s = k == 0 ? p.series[i] : p.series[j];
          const auto& idx = g.sample_indices[k];
          double prev_v = 0.0;
          for (std::size_t r = 0; r < g.n_refresh(); ++r) {
            EXPECT_LE(s.times[idx[r]], g.refresh_times[r]);
            if (idx[r] + 1 < s.size()) EXPECT_GT(s.times[idx[r] + 1], g.refresh_times[r]);
            EXPECT_GT(s.times[idx[r]], prev_v);
            if (r > 0) EXPECT_GT(g.refresh_times[r], g.refresh_times[r - 1]);
            prev_v = g.refresh_times[r];
          }
          EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
        }

        // Re-synchronizing the sampled series yields the same count.
        TickSeries ai{"a", g.refresh_times, sampled_log_prices(g, p.series[i])};
        TickSeries bj{"b", g.refresh_times, sampled_log_prices(g, p.series[j])};
        EXPECT_EQ(pairwise_refresh(ai, bj).n_refresh(), g.n_refresh());
      }
    }
  }
}

TEST(SyncProperties, CountsIndependentOfWorkers) {
  std::mt19937_64 rng(5);
  TickPanel p;
  p.window_length_seconds = 500.0;
  for (int i = 0; i < 7; ++i) p.series.push_back(random_series(std::to_string(i), rng, 0.2, 500.0));
  EXPECT_EQ(pairwise_refresh_counts(p, 1), pairwise_refresh_counts(p, 3));
}

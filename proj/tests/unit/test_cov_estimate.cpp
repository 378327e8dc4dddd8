#include <gtest/gtest.h>

#include "hfcov/cov_estimate.hpp"
#include "hfcov/error.hpp"
#include "test_util.hpp"

using namespace hfcov;

TEST(CovEstimateIo, RoundTripKeepsMatrixAndMetadata) {
  testutil::TempDir dir;
  CovEstimate est;
  est.asset_ids = {"X", "Y", "Z"};
  est.matrix.resize(3, 3);
  est.matrix << 0.0004, 1.0 / 3.0 * 1e-4, 0.0, 1.0 / 3.0 * 1e-4, 0.0009, -2e-5, 0.0, -2e-5, 1e-3;
  est.method = CovMethod::AllRefreshRK;
  est.pair_counts = Eigen::MatrixXi::Constant(3, 3, 1234);
  est.n_min = 1234;
  est.window_days = 10.0;
  est.projections = {"shift"};
  est.rejections.push_back({"X", "Z", 3, "fewer than 8 refresh times"});
  write_cov(dir / "m.csv", est);
  EXPECT_TRUE(std::filesystem::exists(dir / "m.meta.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "m.counts.csv"));

  const CovEstimate back = read_cov(dir / "m.csv");
  EXPECT_EQ(back.asset_ids, est.asset_ids);
  EXPECT_EQ(back.matrix, est.matrix);
  EXPECT_EQ(back.method, est.method);
  EXPECT_EQ(back.pair_counts, est.pair_counts);
  EXPECT_EQ(back.n_min, 1234);
  EXPECT_EQ(back.window_days, 10.0);
  EXPECT_EQ(back.projections, est.projections);
  ASSERT_EQ(back.rejections.size(), 1u);
  EXPECT_EQ(back.rejections[0].asset_b, "Z");
  EXPECT_EQ(back.rejections[0].n_refresh, 3);
}

TEST(CovEstimateIo, BareMatrixFileIsAccepted) {
  testutil::TempDir dir;
  testutil::write_text(dir / "m.csv", "a,b\n2,0.5\n0.5,1\n");
  const CovEstimate est = read_cov(dir / "m.csv");
  EXPECT_EQ(est.p(), 2);
  EXPECT_EQ(est.matrix(0, 1), 0.5);
  EXPECT_EQ(est.pair_counts, Eigen::MatrixXi::Zero(2, 2));
}

TEST(CovEstimateIo, MethodNames) {
  for (auto m : {CovMethod::PairwiseTSCV, CovMethod::AllRefreshTSCV, CovMethod::AllRefreshRK,
                 CovMethod::LowFreqSample, CovMethod::LatentOracle})
    EXPECT_EQ(cov_method_from_string(to_string(m)), m);
  EXPECT_THROW(cov_method_from_string("tsrv"), ArgumentError);
}

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "hfcov/error.hpp"
#include "hfcov/psdproject.hpp"

using namespace hfcov;

namespace {

CovEstimate make_est(const Eigen::MatrixXd& m) {
  CovEstimate e;
  e.matrix = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) e.asset_ids.push_back("a" + std::to_string(i));
  e.pair_counts = Eigen::MatrixXi::Constant(m.rows(), m.rows(), 100);
  e.n_min = 100;
  return e;
}

Eigen::MatrixXd random_indefinite_corr(std::mt19937_64& rng, int p) {
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

double lmin(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST(CovToCorr, DiagonalInput) {
  Eigen::MatrixXd m(2, 2);
  m << 4, 0, 0, 9;
  const auto d = cov_to_corr(make_est(m));
  EXPECT_DOUBLE_EQ(d.vols(0), 2.0);
  EXPECT_DOUBLE_EQ(d.vols(1), 3.0);
  EXPECT_EQ(d.corr, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(d.n_exceeding_one, 0);
}

TEST(CovToCorr, FlagsCorrelationAboveOne) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 2, 1;
  const auto d = cov_to_corr(make_est(m));
  EXPECT_DOUBLE_EQ(d.corr(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(d.corr(1, 0), 2.0);
  EXPECT_EQ(d.n_exceeding_one, 1);
}

TEST(CovToCorr, FloorsNegativeVariance) {
  Eigen::MatrixXd m(2, 2);
  m << -0.001, 0, 0, 1;
  const auto d = cov_to_corr(make_est(m), 1e-10);
  EXPECT_NEAR(d.vols(0), 1e-5, 1e-20);
  EXPECT_TRUE(d.floored[0]);
  EXPECT_FALSE(d.floored[1]);
  EXPECT_EQ(d.corr(0, 0), 1.0);
}

TEST(ProjectClip, PsdFixedPoint) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  Eigen::MatrixXd g(6, 8);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = z(rng);
  const Eigen::MatrixXd a = g * g.transpose();
  EXPECT_LE((project_clip(a) - a).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ProjectClip, DiagonalClip) {
  Eigen::MatrixXd a(2, 2);
  a << 2, 0, 0, -1;
  Eigen::MatrixXd expect(2, 2);
  expect << 2, 0, 0, 0;
  EXPECT_LE((project_clip(a) - expect).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectClip, TwoByTwoHandExample) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1.5, 1.5, 1;
  EXPECT_LE((project_clip(a) - Eigen::MatrixXd::Constant(2, 2, 1.25)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ProjectShift, TwoByTwoHandExample) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1.5, 1.5, 1;
  const Eigen::MatrixXd s = project_shift(a);
  EXPECT_LE((s - Eigen::MatrixXd::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(s(0, 0), 1.0);
  EXPECT_EQ(s(1, 1), 1.0);
}

TEST(ProjectShift, FixedPoints) {
  EXPECT_EQ(project_shift(Eigen::MatrixXd::Identity(4, 4)), Eigen::MatrixXd::Identity(4, 4));
  Eigen::MatrixXd a(3, 3);
  a << 1, 0.3, 0.2, 0.3, 1, 0.1, 0.2, 0.1, 1;
  EXPECT_EQ(project_shift(a), a);
}

TEST(Projections, ContractsOnRandomIndefiniteMatrices) {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 3 + rep % 10;
    const Eigen::MatrixXd a = random_indefinite_corr(rng, p);
    const Eigen::MatrixXd s = project_shift(a);
    const Eigen::MatrixXd c = project_clip(a);
    EXPECT_GE(lmin(s), -1e-10);
    EXPECT_GE(lmin(c), -1e-10);
    for (int i = 0; i < p; ++i) EXPECT_EQ(s(i, i), 1.0);
    EXPECT_LE((project_shift(s) - s).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((project_clip(c) - c).cwiseAbs().maxCoeff(), 1e-10);
    // Same eigenvectors: the projections commute with A.
    EXPECT_LE((s * a - a * s).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((c * a - a * c).cwiseAbs().maxCoeff(), 1e-10);
    // Shift is an increasing affine map of the spectrum.
    const double l = std::max(-lmin(a), 0.0);
    const Eigen::VectorXd ea = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues();
    const Eigen::VectorXd es = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues();
    for (int i = 0; i < p; ++i) EXPECT_NEAR(es(i), (ea(i) + l) / (1 + l), 1e-12);
  }
}

TEST(CorrToCov, Examples) {
  CorrDecomposition d;
  d.vols = Eigen::Vector2d(2, 3);
  d.source = make_est(Eigen::MatrixXd::Identity(2, 2));
  Eigen::MatrixXd expect(2, 2);
  expect << 4, 0, 0, 9;
  EXPECT_EQ(corr_to_cov(d, Eigen::MatrixXd::Identity(2, 2)).matrix, expect);

  d.vols = Eigen::Vector2d(1, 1);
  const auto out = corr_to_cov(d, Eigen::MatrixXd::Ones(2, 2), "shift");
  EXPECT_EQ(out.matrix, Eigen::MatrixXd::Ones(2, 2));
  ASSERT_EQ(out.projections.size(), 1u);
  EXPECT_EQ(out.projections[0], "shift");
  EXPECT_THROW(corr_to_cov(d, Eigen::MatrixXd::Ones(3, 3)), ArgumentError);
}

TEST(CorrToCov, RoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 0.01);
  Eigen::MatrixXd g(5, 20);
  for (int i = 0; i < g.size(); ++i) g.data()[i] = z(rng);
  const Eigen::MatrixXd m = g * g.transpose();
  const auto est = make_est(m);
  const auto back = corr_to_cov(cov_to_corr(est), cov_to_corr(est).corr);
  EXPECT_LE((back.matrix - m).cwiseAbs().maxCoeff(), 1e-12 * m.cwiseAbs().maxCoeff());
  EXPECT_EQ(back.asset_ids, est.asset_ids);
  EXPECT_EQ(back.n_min, est.n_min);
}

TEST(ProjectCov, ShiftKeepsVolatilities) {
  Eigen::MatrixXd m(3, 3);
  m << 4, 5, 0, 5, 4, 0, 0, 0, 1;
  const auto out = project_cov(make_est(m), Projection::Shift);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(out.matrix(i, i), m(i, i), 1e-14);
  EXPECT_GE(lmin(out.matrix), -1e-10);
  EXPECT_EQ(project_cov(make_est(m), Projection::None).matrix, m);
}

TEST(ConditionDiagnostics, Examples) {
  const auto id = condition_diagnostics(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_DOUBLE_EQ(id.min_eig, 1.0);
  EXPECT_DOUBLE_EQ(id.max_eig, 1.0);
  EXPECT_DOUBLE_EQ(id.condition_number, 1.0);

  Eigen::MatrixXd d = Eigen::Vector2d(0.0004, 0.0838).asDiagonal();
  EXPECT_NEAR(condition_diagnostics(d).condition_number, 209.5, 1e-9);

  Eigen::MatrixXd ind = Eigen::Vector2d(1, -1).asDiagonal();
  const auto c = condition_diagnostics(ind);
  EXPECT_DOUBLE_EQ(c.min_eig, -1.0);
  EXPECT_TRUE(std::isinf(c.condition_number));
}

TEST(SupNormDistance, Basic) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2), b = a;
  b(1, 0) = -0.25;
  EXPECT_DOUBLE_EQ(sup_norm_distance(a, b), 0.25);
}

TEST(ProjectionNames, RoundTrip) {
  for (auto p : {Projection::Shift, Projection::Clip, Projection::None})
    EXPECT_EQ(projection_from_string(to_string(p)), p);
  EXPECT_THROW(projection_from_string("higham"), ArgumentError);
}

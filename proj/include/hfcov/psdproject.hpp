#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hfcov/cov_estimate.hpp"

namespace hfcov {

inline constexpr double kDefaultVarianceFloor = 1e-10;

/// Covariance split into volatilities and a unit-diagonal correlation matrix.
struct CorrDecomposition {
  Eigen::VectorXd vols;
  Eigen::MatrixXd corr;
  /// Assets whose variance estimate was below the floor.
  std::vector<bool> floored;
  /// Number of off-diagonal pairs with |corr| > 1 before projection.
  int n_exceeding_one = 0;
  /// Estimate the decomposition came from; its metadata is carried over.
  CovEstimate source;
};

enum class Projection { Shift, Clip, None };

std::string to_string(Projection p);
Projection projection_from_string(const std::string& s);

CorrDecomposition cov_to_corr(const CovEstimate& est, double floor = kDefaultVarianceFloor);

/// Eigenvalue clipping: Gamma^T diag(max(lambda, 0)) Gamma.
Eigen::MatrixXd project_clip(const Eigen::MatrixXd& corr);

/// (A + lambda_min^- I) / (1 + lambda_min^-); keeps a unit diagonal.
Eigen::MatrixXd project_shift(const Eigen::MatrixXd& corr);

CovEstimate corr_to_cov(const CorrDecomposition& dec, const Eigen::MatrixXd& projected_corr,
                        const std::string& projection_name = "none");

/// cov_to_corr -> projection -> corr_to_cov. Projection::None returns the
/// input unchanged.
CovEstimate project_cov(const CovEstimate& est, Projection projection,
                        double floor = kDefaultVarianceFloor);

struct ConditionDiagnostics {
  double min_eig = 0.0;
  double max_eig = 0.0;
  /// max / min when min > 0, +infinity otherwise.
  double condition_number = 0.0;
};

ConditionDiagnostics condition_diagnostics(const Eigen::MatrixXd& m);
inline ConditionDiagnostics condition_diagnostics(const CovEstimate& est) {
  return condition_diagnostics(est.matrix);
}

/// Smallest eigenvalue of the symmetrized matrix.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// max_ij |a_ij - b_ij|.
double sup_norm_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace hfcov

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hfcov/cov_estimate.hpp"

namespace hfcov {

inline constexpr double kTradingDaysPerYear = 252.0;
/// Weight magnitude above which a position counts as long or short.
inline constexpr double kPositionThreshold = 0.001;

struct PortfolioWeights {
  Eigen::VectorXd w;
  double gross_exposure = 0.0;
  int n_long = 0;
  int n_short = 0;
  double max_weight = 0.0;
  double min_weight = 0.0;

  /// Fills the summary fields from `w`.
  static PortfolioWeights from_vector(Eigen::VectorXd w);
  /// Total short proportion w^- = sum of |w_i| over negative entries.
  double short_proportion() const;
};

struct SolverDiagnostics {
  int iterations = 0;
  /// max of primal infeasibility, dual infeasibility and complementarity,
  /// measured on the trace-normalized problem.
  double kkt_residual = 0.0;
  /// w^T Sigma w at the returned weights.
  double objective = 0.0;
};

/// min w^T Sigma w  s.t.  1^T w = 1, ||w||_1 <= c.
/// Solved in split form w = u - v with a primal-dual interior-point method.
/// Throws InfeasibleError for c < 1 and IndefiniteError when Sigma has an
/// eigenvalue below -1e-8 after trace normalization.
PortfolioWeights solve_min_variance(const Eigen::MatrixXd& sigma, double c,
                                    SolverDiagnostics* diag = nullptr);
inline PortfolioWeights solve_min_variance(const CovEstimate& sigma, double c,
                                           SolverDiagnostics* diag = nullptr) {
  return solve_min_variance(sigma.matrix, c, diag);
}

/// w^T Sigma w; throws IndefiniteError when it is materially negative.
double quadratic_risk(const Eigen::VectorXd& w, const Eigen::MatrixXd& sigma);

/// sqrt(w^T Sigma w), times sqrt(252 / window_days) when annualizing.
double portfolio_risk(const PortfolioWeights& w, const CovEstimate& sigma, bool annualize);

/// a_p = max_ij |est_ij - oracle_ij|.
double max_elementwise_error(const CovEstimate& est, const CovEstimate& oracle);

struct RiskReport {
  /// Window variances: R_hat(w_hat), R(w_hat), R(w_opt).
  double perceived_var = 0.0;
  double actual_var = 0.0;
  double oracle_var = 0.0;
  /// The same three as annualized standard deviations.
  double perceived_risk = 0.0;
  double actual_risk = 0.0;
  double oracle_risk = 0.0;
  double a_p = 0.0;
  double c = 1.0;
  double bound_2apc2 = 0.0;
  PortfolioWeights estimated_weights;
  PortfolioWeights oracle_weights;
};

/// Solves the allocation under both matrices and checks
/// |R(w_hat)-R(w_opt)| <= 2 a_p c^2, |R(w_hat)-R_hat(w_hat)| <= a_p c^2 and
/// |R(w_opt)-R_hat(w_hat)| <= a_p c^2; a violation raises NumericError.
RiskReport risk_gap_report(const CovEstimate& sigma_est, const CovEstimate& sigma_oracle, double c);

/// CSV `asset_id,weight`.
void write_weights(const std::filesystem::path& path, const std::vector<std::string>& ids,
                   const PortfolioWeights& w);
PortfolioWeights read_weights(const std::filesystem::path& path,
                              std::vector<std::string>* ids = nullptr);

/// `key=value` lines.
void write_risk_report(const std::filesystem::path& path, const RiskReport& rep);

}  // namespace hfcov

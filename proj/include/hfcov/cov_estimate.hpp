#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hfcov {

enum class CovMethod { PairwiseTSCV, AllRefreshTSCV, AllRefreshRK, LowFreqSample, LatentOracle };

std::string to_string(CovMethod m);
CovMethod cov_method_from_string(const std::string& s);

/// A pair whose entry could not be estimated; the matrix holds 0 there.
struct PairRejection {
  std::string asset_a;
  std::string asset_b;
  long n_refresh = 0;
  std::string reason;
};

/// Integrated covariance over a window of `window_days` trading days
/// (units: squared log-return over the whole window).
struct CovEstimate {
  std::vector<std::string> asset_ids;
  Eigen::MatrixXd matrix;
  CovMethod method = CovMethod::PairwiseTSCV;
  Eigen::MatrixXi pair_counts;
  long n_min = 0;
  double window_days = 1.0;
  /// Projection steps applied after estimation, e.g. {"shift"}.
  std::vector<std::string> projections;
  /// Entries replaced by 0 because the pair had too little data.
  std::vector<PairRejection> rejections;

  Eigen::Index p() const noexcept { return matrix.rows(); }
};

/// Matrix CSV (header row of asset ids) plus `<stem>.meta.json` and
/// `<stem>.counts.csv` sidecars next to it.
void write_cov(const std::filesystem::path& matrix_path, const CovEstimate& est);
CovEstimate read_cov(const std::filesystem::path& matrix_path);

/// Plain labelled-matrix CSV helpers shared by the writers above.
void write_labelled_matrix(const std::filesystem::path& path, const std::vector<std::string>& ids,
                           const Eigen::MatrixXd& m);
Eigen::MatrixXd read_labelled_matrix(const std::filesystem::path& path,
                                     std::vector<std::string>* ids = nullptr);

}  // namespace hfcov

#include "hfcov/psdproject.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "hfcov/error.hpp"

namespace hfcov {

std::string to_string(Projection p) {
  switch (p) {
    case Projection::Shift: return "shift";
    case Projection::Clip: return "clip";
    case Projection::None: return "none";
  }
  return "none";
}

Projection projection_from_string(const std::string& s) {
  if (s == "shift") return Projection::Shift;
  if (s == "clip") return Projection::Clip;
  if (s == "none") return Projection::None;
  throw ArgumentError("unknown projection '" + s + "' (expected shift, clip or none)");
}

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> decompose(const Eigen::MatrixXd& a, bool vectors) {
  if (a.rows() != a.cols()) throw ArgumentError("matrix is not square");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      sym, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigendecomposition failed");
  return es;
}

}  // namespace

CorrDecomposition cov_to_corr(const CovEstimate& est, double floor) {
  const Eigen::Index p = est.p();
  CorrDecomposition dec;
  dec.vols.resize(p);
  dec.floored.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double v = est.matrix(i, i);
    if (!(v >= floor)) dec.floored[static_cast<std::size_t>(i)] = true;
    dec.vols(i) = std::sqrt(std::max(v, floor));
  }
  dec.corr.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i == j) {
        dec.corr(i, j) = 1.0;
        continue;
      }
      const double c = 0.5 * (est.matrix(i, j) + est.matrix(j, i)) / (dec.vols(i) * dec.vols(j));
      dec.corr(i, j) = c;
      if (i < j && std::abs(c) > 1.0) ++dec.n_exceeding_one;
    }
  }
  dec.source = est;
  return dec;
}

Eigen::MatrixXd project_clip(const Eigen::MatrixXd& corr) {
  const auto es = decompose(corr, true);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd project_shift(const Eigen::MatrixXd& corr) {
  const auto es = decompose(corr, false);
  const double neg = std::max(-es.eigenvalues()(0), 0.0);
  Eigen::MatrixXd out = 0.5 * (corr + corr.transpose());
  if (neg == 0.0) return out;
  out.diagonal().array() += neg;
  out /= (1.0 + neg);
  // (1 + neg) / (1 + neg) is 1 in exact arithmetic; pin it.
  out.diagonal() = corr.diagonal();
  return out;
}

CovEstimate corr_to_cov(const CorrDecomposition& dec, const Eigen::MatrixXd& projected_corr,
                        const std::string& projection_name) {
  const Eigen::Index p = dec.vols.size();
  if (projected_corr.rows() != p || projected_corr.cols() != p)
    throw ArgumentError("corr_to_cov: dimension mismatch");
  CovEstimate out = dec.source;
  out.matrix = dec.vols.asDiagonal() * projected_corr * dec.vols.asDiagonal();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.projections.push_back(projection_name);
  return out;
}

CovEstimate project_cov(const CovEstimate& est, Projection projection, double floor) {
  if (projection == Projection::None) return est;
  const CorrDecomposition dec = cov_to_corr(est, floor);
  const Eigen::MatrixXd projected =
      projection == Projection::Shift ? project_shift(dec.corr) : project_clip(dec.corr);
  return corr_to_cov(dec, projected, to_string(projection));
}

ConditionDiagnostics condition_diagnostics(const Eigen::MatrixXd& m) {
  const auto es = decompose(m, false);
  ConditionDiagnostics d;
  d.min_eig = es.eigenvalues()(0);
  d.max_eig = es.eigenvalues()(es.eigenvalues().size() - 1);
  d.condition_number =
      d.min_eig > 0.0 ? d.max_eig / d.min_eig : std::numeric_limits<double>::infinity();
  return d;
}

double min_eigenvalue(const Eigen::MatrixXd& m) { return decompose(m, false).eigenvalues()(0); }

double sup_norm_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ArgumentError("sup_norm_distance: dimension mismatch");
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace hfcov

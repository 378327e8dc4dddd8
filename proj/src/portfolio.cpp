#include "hfcov/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "hfcov/error.hpp"
#include "hfcov/psdproject.hpp"

namespace hfcov {

PortfolioWeights PortfolioWeights::from_vector(Eigen::VectorXd w) {
  PortfolioWeights out;
  out.gross_exposure = w.lpNorm<1>();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > kPositionThreshold) ++out.n_long;
    if (w[i] < -kPositionThreshold) ++out.n_short;
  }
  if (w.size() > 0) {
    out.max_weight = w.maxCoeff();
    out.min_weight = w.minCoeff();
  }
  out.w = std::move(w);
  return out;
}

double PortfolioWeights::short_proportion() const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] < 0.0) s -= w[i];
  return s;
}

namespace {

constexpr double kPsdTolerance = 1e-8;
constexpr double kTieBreakRidge = 1e-11;
constexpr double kIpmTolerance = 1e-12;
constexpr double kAcceptTolerance = 1e-9;
constexpr int kMaxIterations = 200;

struct QpResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;
};

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

// Mehrotra predictor-corrector for min 1/2 x'Qx s.t. Ax = b, x >= 0.
QpResult solve_qp(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Eigen::Index n = Q.rows();
  const Eigen::Index m = A.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  const double qscale = 1.0 + Q.cwiseAbs().maxCoeff();
  const double bscale = 1.0 + b.cwiseAbs().maxCoeff();

  QpResult best;
  double best_res = std::numeric_limits<double>::infinity();

  for (int it = 0; it < kMaxIterations; ++it) {
    const Eigen::VectorXd rd = Q * x - A.transpose() * y - z;
    const Eigen::VectorXd rp = A * x - b;
    const double mu = x.dot(z) / static_cast<double>(n);
    const double res = std::max({rd.cwiseAbs().maxCoeff() / qscale,
                                 rp.cwiseAbs().maxCoeff() / bscale, mu});
    if (res < best_res) {
      best_res = res;
      best.x = x;
      best.iterations = it;
      best.residual = res;
    }
    if (res <= kIpmTolerance) break;

    Eigen::MatrixXd H = Q;
    H.diagonal() += z.cwiseQuotient(x);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) break;
    const Eigen::MatrixXd HinvAt = llt.solve(A.transpose());
    const Eigen::MatrixXd M = A * HinvAt;
    const Eigen::FullPivLU<Eigen::MatrixXd> mlu(M);
    if (!mlu.isInvertible()) break;

    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                         Eigen::VectorXd& dz) {
      const Eigen::VectorXd rhs1 = -rd + rc.cwiseQuotient(x);
      const Eigen::VectorXd h1 = llt.solve(rhs1);
      dy = mlu.solve(-rp - A * h1);
      dx = h1 + HinvAt * dy;
      dz = (rc - z.cwiseProduct(dx)).cwiseQuotient(x);
    };

    Eigen::VectorXd dxa, dya, dza;
    direction(-x.cwiseProduct(z), dxa, dya, dza);
    const double aa = std::min(max_step(x, dxa), max_step(z, dza));
    const double mu_aff = (x + aa * dxa).dot(z + aa * dza) / static_cast<double>(n);
    const double sigma = std::pow(mu_aff / mu, 3);

    Eigen::VectorXd dx, dy, dz;
    const Eigen::VectorXd rc =
        (Eigen::VectorXd::Constant(n, sigma * mu) - x.cwiseProduct(z) - dxa.cwiseProduct(dza));
    direction(rc, dx, dy, dz);
    const double alpha = std::min(1.0, 0.995 * std::min(max_step(x, dx), max_step(z, dz)));
    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    if (!x.allFinite() || !z.allFinite()) break;
  }
  return best;
}

}  // namespace

PortfolioWeights solve_min_variance(const Eigen::MatrixXd& sigma, double c,
                                    SolverDiagnostics* diag) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
    throw ArgumentError("covariance matrix must be square and non-empty");
  if (!sigma.allFinite()) throw ArgumentError("covariance matrix has non-finite entries");
  if (!std::isfinite(c) || c < 1.0)
    throw InfeasibleError("gross-exposure bound c = " + std::to_string(c) +
                          " is infeasible: fully invested portfolios have ||w||_1 >= 1");
  const Eigen::Index p = sigma.rows();
  Eigen::MatrixXd S = 0.5 * (sigma + sigma.transpose());
  double scale = S.trace() / static_cast<double>(p);
  if (!(scale > 0.0)) scale = 1.0;
  S /= scale;
  const double lmin = min_eigenvalue(S);
  if (lmin < -kPsdTolerance)
    throw IndefiniteError("covariance matrix is indefinite (normalized min eigenvalue " +
                          std::to_string(lmin) + "); project it to PSD before allocating");

  const bool long_only = c - 1.0 <= 1e-12;
  Eigen::VectorXd w(p);
  QpResult r;
  if (long_only) {
    Eigen::MatrixXd Q = 2.0 * S;
    Q.diagonal().array() += 2.0 * kTieBreakRidge;
    const Eigen::MatrixXd A = Eigen::MatrixXd::Ones(1, p);
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(1);
    r = solve_qp(Q, A, b);
    w = r.x;
  } else {
    const Eigen::Index n = 2 * p + 1;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
    Q.block(0, 0, p, p) = 2.0 * S;
    Q.block(p, p, p, p) = 2.0 * S;
    Q.block(0, p, p, p) = -2.0 * S;
    Q.block(p, 0, p, p) = -2.0 * S;
    Q.diagonal().head(2 * p).array() += 2.0 * kTieBreakRidge;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, n);
    A.block(0, 0, 1, p).setOnes();
    A.block(0, p, 1, p).setConstant(-1.0);
    A.row(1).setOnes();
    Eigen::VectorXd b(2);
    b << 1.0, c;
    r = solve_qp(Q, A, b);
    w = r.x.head(p) - r.x.segment(p, p);
  }
  if (r.x.size() == 0 || !(r.residual <= kAcceptTolerance))
    throw NumericError("minimum-variance solver did not converge (residual " +
                       std::to_string(r.residual) + ")");
  if (diag) {
    diag->iterations = r.iterations;
    diag->kkt_residual = r.residual;
    diag->objective = w.dot(sigma * w);
  }
  return PortfolioWeights::from_vector(std::move(w));
}

double quadratic_risk(const Eigen::VectorXd& w, const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != w.size())
    throw ArgumentError("weight vector length " + std::to_string(w.size()) +
                        " does not match covariance dimension " + std::to_string(sigma.rows()));
  const double q = w.dot(sigma * w);
  const double tol = 1e-12 * (sigma.cwiseAbs().maxCoeff() + 1e-300) * w.squaredNorm() *
                     static_cast<double>(w.size());
  if (q < -tol)
    throw IndefiniteError("negative portfolio variance " + std::to_string(q) +
                          ": covariance matrix is indefinite");
  return std::max(q, 0.0);
}

double portfolio_risk(const PortfolioWeights& w, const CovEstimate& sigma, bool annualize) {
  double r = std::sqrt(quadratic_risk(w.w, sigma.matrix));
  if (annualize) {
    if (!(sigma.window_days > 0.0)) throw ArgumentError("window_days must be positive");
    r *= std::sqrt(kTradingDaysPerYear / sigma.window_days);
  }
  return r;
}

double max_elementwise_error(const CovEstimate& est, const CovEstimate& oracle) {
  if (est.matrix.rows() != oracle.matrix.rows() || est.matrix.cols() != oracle.matrix.cols())
    throw ArgumentError("matrix dimensions differ");
  if (est.matrix.size() == 0) return 0.0;
  return (est.matrix - oracle.matrix).cwiseAbs().maxCoeff();
}

RiskReport risk_gap_report(const CovEstimate& sigma_est, const CovEstimate& sigma_oracle,
                           double c) {
  RiskReport rep;
  rep.c = c;
  rep.estimated_weights = solve_min_variance(sigma_est, c);
  rep.oracle_weights = solve_min_variance(sigma_oracle, c);
  rep.a_p = max_elementwise_error(sigma_est, sigma_oracle);
  rep.bound_2apc2 = 2.0 * rep.a_p * c * c;
  rep.perceived_var = quadratic_risk(rep.estimated_weights.w, sigma_est.matrix);
  rep.actual_var = quadratic_risk(rep.estimated_weights.w, sigma_oracle.matrix);
  rep.oracle_var = quadratic_risk(rep.oracle_weights.w, sigma_oracle.matrix);
  const double ann = std::sqrt(kTradingDaysPerYear / sigma_oracle.window_days);
  rep.perceived_risk = std::sqrt(rep.perceived_var) * std::sqrt(kTradingDaysPerYear / sigma_est.window_days);
  rep.actual_risk = std::sqrt(rep.actual_var) * ann;
  rep.oracle_risk = std::sqrt(rep.oracle_var) * ann;

  const double g1 = rep.estimated_weights.gross_exposure;
  const double g2 = rep.oracle_weights.gross_exposure;
  const double slack =
      1e-8 * (1.0 + sigma_oracle.matrix.cwiseAbs().maxCoeff()) * c * c;
  const double apc2 = rep.a_p * std::max({c, g1, g2}) * std::max({c, g1, g2});
  const bool ok = std::abs(rep.actual_var - rep.oracle_var) <= 2.0 * apc2 + slack &&
                  std::abs(rep.actual_var - rep.perceived_var) <= apc2 + slack &&
                  std::abs(rep.oracle_var - rep.perceived_var) <= apc2 + slack;
  if (!ok) throw NumericError("risk-gap inequalities violated: allocation solver is inaccurate");
  return rep;
}

void write_weights(const std::filesystem::path& path, const std::vector<std::string>& ids,
                   const PortfolioWeights& w) {
  if (static_cast<Eigen::Index>(ids.size()) != w.w.size())
    throw ArgumentError("asset id count does not match weight vector length");
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "asset_id,weight\n";
  char buf[64];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", w.w[static_cast<Eigen::Index>(i)]);
    out << ids[i] << ',' << buf << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

PortfolioWeights read_weights(const std::filesystem::path& path, std::vector<std::string>* ids) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("asset_id,weight", 0) != 0)
    throw ParseError("expected header asset_id,weight", lineno);
  std::vector<std::string> names;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected asset_id,weight", lineno);
    names.push_back(line.substr(0, comma));
    try {
      std::size_t used = 0;
      const std::string num = line.substr(comma + 1);
      vals.push_back(std::stod(num, &used));
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::logic_error&) {
      throw ParseError("malformed weight", lineno);
    }
  }
  if (ids) *ids = names;
  return PortfolioWeights::from_vector(
      Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
}

void write_risk_report(const std::filesystem::path& path, const RiskReport& rep) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  char buf[128];
  auto kv = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", k, v);
    out << buf;
  };
  kv("c", rep.c);
  kv("perceived_risk", rep.perceived_risk);
  kv("actual_risk", rep.actual_risk);
  kv("oracle_risk", rep.oracle_risk);
  kv("perceived_var", rep.perceived_var);
  kv("actual_var", rep.actual_var);
  kv("oracle_var", rep.oracle_var);
  kv("a_p", rep.a_p);
  kv("bound_2apc2", rep.bound_2apc2);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace hfcov

// Acceptance checks. Each criterion prints one PASS/FAIL line; the process
// exits non-zero when any selected criterion fails.
//
//   acceptance            run every criterion
//   acceptance 3 5        run criteria 3 and 5

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "hfcov/backtest.hpp"
#include "hfcov/cli.hpp"
#include "hfcov/concentration.hpp"
#include "hfcov/estimators.hpp"
#include "hfcov/portfolio.hpp"
#include "hfcov/psdproject.hpp"
#include "hfcov/simengine.hpp"
#include "hfcov/sync.hpp"

using namespace hfcov;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string format(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[2048];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ------------------------------------------------------------------------ 1

TickPanel random_panel(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> p_dist(2, 10);
  std::uniform_int_distribution<int> n_dist(1, 200);
  std::uniform_real_distribution<double> t_dist(0.0, 1000.0);
  std::normal_distribution<double> z;
  TickPanel panel;
  panel.window_length_seconds = 1000.0;
  const int p = p_dist(rng);
  for (int i = 0; i < p; ++i) {
    TickSeries s;
    s.asset_id = "S" + std::to_string(i);
    const int n = n_dist(rng);
    for (int k = 0; k < n; ++k) s.times.push_back(std::floor(t_dist(rng) * 100.0) / 100.0);
    std::sort(s.times.begin(), s.times.end());
    s.times.erase(std::unique(s.times.begin(), s.times.end()), s.times.end());
    double x = 0.0;
    for (std::size_t k = 0; k < s.times.size(); ++k) s.log_prices.push_back(x += 0.01 * z(rng));
    panel.series.push_back(std::move(s));
  }
  return panel;
}

/// Every interval (v_{i-1}, v_i] (with [0, v_1] first) holds a tick of every
/// listed series, and the sample index is the last tick at or before v_i.
bool grid_is_refresh(const SyncGrid& g, const std::vector<const TickSeries*>& series) {
  for (std::size_t a = 0; a < series.size(); ++a) {
    const auto& t = series[a]->times;
    for (std::size_t i = 0; i < g.n_refresh(); ++i) {
      const double hi = g.refresh_times[i];
      const double lo = i == 0 ? -std::numeric_limits<double>::infinity() : g.refresh_times[i - 1];
      const bool any = std::any_of(t.begin(), t.end(), [&](double x) { return x > lo && x <= hi; });
      if (!any) return false;
      const std::size_t idx = g.sample_indices[a][i];
      if (t[idx] > hi || (idx + 1 < t.size() && t[idx + 1] <= hi)) return false;
    }
  }
  return true;
}

Outcome criterion1() {
  std::mt19937_64 rng(1);
  long pairs = 0, bad_count = 0, bad_grid = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const TickPanel panel = random_panel(rng);
    std::vector<const TickSeries*> all;
    for (const auto& s : panel.series) all.push_back(&s);
    const SyncGrid g = all_refresh(panel);
    if (!grid_is_refresh(g, all)) ++bad_grid;
    for (std::size_t i = 0; i < all.size(); ++i)
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        ++pairs;
        const SyncGrid pg = pairwise_refresh(*all[i], *all[j]);
        if (pg.n_refresh() < g.n_refresh()) ++bad_count;
        if (!grid_is_refresh(pg, {all[i], all[j]})) ++bad_grid;
      }
  }
  return {bad_count == 0 && bad_grid == 0,
          format("1000 panels, %ld pairs: %ld pairwise < all-refresh, %ld grids violating the "
                 "refresh property",
                 pairs, bad_count, bad_grid)};
}

// ------------------------------------------------------------------------ 2

/// Two-scale covariance written as the average over the K offset subgrids,
/// each summed with its own loop.
double subgrid_rcov(const std::vector<double>& a, const std::vector<double>& b, int K) {
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    double sub = 0.0;
    for (std::size_t i = static_cast<std::size_t>(k + K); i < a.size(); i += static_cast<std::size_t>(K))
      sub += (a[i] - a[i - K]) * (b[i] - b[i - K]);
    total += sub;
  }
  return total / K;
}

double brute_tscv(const std::vector<double>& a, const std::vector<double>& b, int K, int J) {
  const double n = static_cast<double>(a.size() - 1);
  const double nbar_k = (n - K + 1) / K;
  const double nbar_j = (n - J + 1) / J;
  return subgrid_rcov(a, b, K) - nbar_k / nbar_j * subgrid_rcov(a, b, J);
}

Outcome criterion2() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::uniform_int_distribution<int> len(20, 400);
  double worst = 0.0;
  int not_exact = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n1 = len(rng);
    std::vector<double> a(n1), b(n1);
    double x = 0.0, y = 0.0;
    for (int i = 0; i < n1; ++i) {
      const double common = z(rng);
      x += 0.01 * common;
      y += 0.01 * (0.5 * common + 0.8 * z(rng));
      a[i] = x + 0.0005 * z(rng);
      b[i] = y + 0.0005 * z(rng);
    }
    const int K = std::uniform_int_distribution<int>(2, n1 / 2)(rng);
    const int J = std::uniform_int_distribution<int>(1, std::max(1, K - 1))(rng);
    const TwoScaleConfig cfg{K, J};
    worst = std::max(worst, std::abs(tscv(a, b, cfg) - brute_tscv(a, b, K, J)));
    worst = std::max(worst, std::abs(tsrv(a, cfg) - brute_tscv(a, a, K, J)));
    if (tscv(a, a, cfg) != tsrv(a, cfg)) ++not_exact;
  }
  return {worst <= 1e-12 && not_exact == 0,
          format("100 inputs: max |impl - brute force| = %.2e (limit 1e-12); tscv(a,a) != "
                 "tsrv(a) in %d",
                 worst, not_exact)};
}

// ------------------------------------------------------------------------ 3

Outcome criterion3() {
  ConstantVolModel m;
  m.daily_sigma = Eigen::VectorXd::Constant(1, 0.02);
  m.factor_loading = Eigen::VectorXd::Ones(1);
  m.noise_std = 0.0005;
  const double iv = 0.0004;
  std::mt19937_64 rng(3);
  int rv_biased = 0;
  std::vector<double> rel;
  for (int rep = 0; rep < 200; ++rep) {
    const TickPanel panel = simulate_constant_vol_panel(m, {23400}, rng);
    const auto& x = panel.series[0].log_prices;
    if (realized_variance(x) > 10.0 * iv) ++rv_biased;
    rel.push_back(std::abs(tsrv(x, choose_two_scale(x.size())) - iv) / iv);
  }
  const double med = median_of(rel);
  return {rv_biased >= 190 && med <= 0.20,
          format("RV > 10x IV in %d/200 (need >= 190); TSRV median |rel err| %.4f (limit 0.20)",
                 rv_biased, med)};
}

// ------------------------------------------------------------------------ 4

Outcome criterion4() {
  RateConfig cfg;
  cfg.seed = 1;
  cfg.target = RateTarget::TSRV;
  const RateExperiment a = run_rate_experiment(cfg);
  cfg.target = RateTarget::TSCV;
  const RateExperiment b = run_rate_experiment(cfg);
  auto in = [](double s) { return s >= -0.28 && s <= -0.08; };
  return {in(a.fitted_slope) && in(b.fitted_slope),
          format("n 500..16000, 200 reps: TSRV slope %.4f, TSCV slope %.4f (band [-0.28, -0.08])",
                 a.fitted_slope, b.fitted_slope)};
}

// ------------------------------------------------------------------------ 5

Outcome criterion5() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> z;
  double worst_min_eig = 0.0, worst_idem = 0.0, worst_diag = 0.0, worst_fixed_shift = 0.0,
         worst_fixed_clip = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int p = 2 + rep % 29;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) A(i, j) = A(j, i) = 1.2 * u(rng);
    for (const bool shift : {true, false}) {
      const Eigen::MatrixXd P = shift ? project_shift(A) : project_clip(A);
      const Eigen::MatrixXd PP = shift ? project_shift(P) : project_clip(P);
      worst_min_eig = std::min(worst_min_eig, min_eigenvalue(P));
      worst_idem = std::max(worst_idem, sup_norm_distance(P, PP));
      if (shift) worst_diag = std::max(worst_diag, (P.diagonal().array() - 1.0).abs().maxCoeff());
    }
    Eigen::MatrixXd G(p, p + 3);
    for (Eigen::Index k = 0; k < G.size(); ++k) G.data()[k] = z(rng);
    Eigen::MatrixXd C = G * G.transpose();
    C = (0.5 * (C + C.transpose())).eval();
    const Eigen::VectorXd d = C.diagonal().cwiseSqrt().cwiseInverse();
    C = (d.asDiagonal() * C * d.asDiagonal()).eval();
    C = (0.5 * (C + C.transpose())).eval();
    C.diagonal().setOnes();
    worst_fixed_shift = std::max(worst_fixed_shift, sup_norm_distance(project_shift(C), C));
    worst_fixed_clip = std::max(worst_fixed_clip, sup_norm_distance(project_clip(C), C));
  }
  Eigen::Matrix2d ex;
  ex << 1.0, 1.5, 1.5, 1.0;
  const double ex_err = sup_norm_distance(project_shift(ex), Eigen::Matrix2d::Ones());
  const bool pass = worst_min_eig >= -1e-10 && worst_idem <= 1e-10 && worst_diag <= 1e-12 &&
                    worst_fixed_shift == 0.0 && worst_fixed_clip <= 1e-12 && ex_err <= 1e-12;
  return {pass, format("200 matrices: min eig %.2e, idempotence %.2e, shift diag %.2e, PSD fixed "
                       "point shift %.2e clip %.2e, 2x2 example %.2e",
                       worst_min_eig, worst_idem, worst_diag, worst_fixed_shift, worst_fixed_clip,
                       ex_err)};
}

// ------------------------------------------------------------------------ 6

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int p, int rank) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd g(p, rank);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = z(rng);
  return g * g.transpose() / rank;
}

/// Exhaustive search over (w1, w2) on the 1e-3 lattice with w3 = 1 - w1 - w2.
/// Feasibility is tested in integer units so lattice points on the
/// ||w||_1 = c boundary are kept.
double grid_search_p3(const Eigen::Matrix3d& S, double c) {
  const long C = std::lround(c * 1000.0);
  const long lo = -(C - 1000) / 2 - 1, hi = (C + 1000) / 2 + 1;
  double best = std::numeric_limits<double>::infinity();
  for (long i = lo; i <= hi; ++i)
    for (long j = lo; j <= hi; ++j) {
      const long k = 1000 - i - j;
      if (std::labs(i) + std::labs(j) + std::labs(k) > C) continue;
      const Eigen::Vector3d w(i / 1000.0, j / 1000.0, k / 1000.0);
      best = std::min(best, w.dot(S * w));
    }
  return best;
}

Outcome criterion6() {
  std::mt19937_64 rng(6);
  double worst_closed = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 3 + rep % 8;
    const Eigen::MatrixXd S = random_psd(rng, p, 2 * p) + 0.05 * Eigen::MatrixXd::Identity(p, p);
    const Eigen::VectorXd x = S.fullPivLu().solve(Eigen::VectorXd::Ones(p));
    const Eigen::VectorXd gmv = x / x.sum();
    const auto w = solve_min_variance(S, gmv.lpNorm<1>() + 0.5);
    worst_closed = std::max(worst_closed, (w.w - gmv).cwiseAbs().maxCoeff());
  }
  double worst_grid = 0.0, worst_short = -1.0, worst_monotone = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Matrix3d S = random_psd(rng, 3, 1 + rep % 5);
    double prev = std::numeric_limits<double>::infinity();
    for (double c : {1.0, 1.3, 1.7, 2.2}) {
      const auto w = solve_min_variance(S, c);
      const double obj = w.w.dot(S * w.w);
      worst_grid = std::max(worst_grid, std::abs(obj - grid_search_p3(S, c)));
      worst_monotone = std::max(worst_monotone, obj - prev);
      prev = obj;
      worst_short = std::max(worst_short, w.short_proportion() - (c - 1.0) / 2.0);
    }
  }
  const bool pass =
      worst_closed <= 1e-6 && worst_grid <= 1e-5 && worst_monotone <= 1e-10 && worst_short <= 1e-8;
  return {pass, format("closed form %.2e (limit 1e-6); grid oracle %.2e (limit 1e-5); max "
                       "objective increase in c %.2e (limit 1e-10); max w- - (c-1)/2 %.2e",
                       worst_closed, worst_grid, worst_monotone, worst_short)};
}

// ------------------------------------------------------------------------ 7

Outcome criterion7() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long checks = 0, violations = 0;
  double worst_ratio = 0.0;
  auto check = [&](double lhs, double bound) {
    ++checks;
    if (lhs > bound + 1e-8) ++violations;
    if (bound > 0) worst_ratio = std::max(worst_ratio, lhs / bound);
  };
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 5 + rep % 16;
    const Eigen::MatrixXd S = random_psd(rng, p, 2 * p) + 0.2 * Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd E(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) E(i, j) = E(j, i) = 0.01 * z(rng);
    const Eigen::MatrixXd Sh = S + E;
    const double a_p = E.cwiseAbs().maxCoeff();
    const double c = 1.0 + 2.0 * u(rng);
    for (int t = 0; t < 20; ++t) {
      const double s = 1.0 + (c - 1.0) * u(rng);
      Eigen::VectorXd pos(p), neg(p);
      for (int i = 0; i < p; ++i) {
        pos[i] = u(rng);
        neg[i] = u(rng);
      }
      const Eigen::VectorXd w = (1.0 + s) / 2.0 * pos / pos.sum() - (s - 1.0) / 2.0 * neg / neg.sum();
      check(std::abs(w.dot(Sh * w) - w.dot(S * w)), a_p * c * c);
    }
    const Eigen::VectorXd wh = solve_min_variance(Sh, c).w;
    const Eigen::VectorXd wo = solve_min_variance(S, c).w;
    const double R_wh = wh.dot(S * wh), Rh_wh = wh.dot(Sh * wh), R_wo = wo.dot(S * wo);
    check(std::abs(R_wh - R_wo), 2.0 * a_p * c * c);
    check(std::abs(R_wh - Rh_wh), a_p * c * c);
    check(std::abs(R_wo - Rh_wh), a_p * c * c);
  }
  return {violations == 0, format("100 instances, %ld bound checks: %ld violations; largest "
                                  "gap / bound %.3f",
                                  checks, violations, worst_ratio)};
}

// ------------------------------------------------------------------------ 8

Outcome criterion8() {
  SimulatedSourceOptions so;
  so.with_oracle = true;
  SimulatedDaySource src(default_params(50, 1), SimConfig{}, 1, so);
  InSampleConfig cfg;
  cfg.n_reps = 50;
  const InSampleReport rep = in_sample_study(src, cfg);
  double ap[kStudyMethods];
  for (int m = 0; m < kStudyMethods; ++m) ap[m] = rep.a_p[m].median;
  // study_method: 0 AllRefreshTSCV, 1 AllRefreshRK, 2 PairwiseTSCV.
  const double rk = ap[1], pw = ap[2], all = ap[0];
  const double w1 = rep.oracle_risk[0].median;
  const bool pass = rk < pw && pw < all && w1 >= 0.39 && w1 <= 0.49;
  return {pass, format("p=50, 50 reps, seed 1: median a_p RK %.4f < pairwise %.4f < all-refresh "
                       "TSCV %.4f; latent risk of w1 %.4f (band [0.39, 0.49])",
                       rk, pw, all, w1)};
}

// ------------------------------------------------------------------------ 9

Outcome criterion9() {
  const std::vector<double> grid{1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.5, 3.0};
  const StrategyKind hf[] = {StrategyKind::PairwiseTSCV10d, StrategyKind::AllRefreshTSCV10d,
                             StrategyKind::AllRefreshRK10d};
  int wins = 0, bad_argmin = 0;
  std::vector<double> pw_std;
  std::string per_rep;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimulatedDaySource src(default_params(50, seed), SimConfig{}, seed);
    BacktestConfig cfg;
    for (auto k : {StrategyKind::LowFreq100d, hf[0], hf[1], hf[2]}) {
      StrategySpec s;
      s.estimator = k;
      s.c_grid = grid;
      cfg.strategies.push_back(s);
    }
    const BacktestReport report = out_of_sample_run(src, cfg);
    const double lf = report.find(StrategyKind::LowFreq100d, 2.0).annualized_std;
    const double pw = report.find(StrategyKind::PairwiseTSCV10d, 2.0).annualized_std;
    pw_std.push_back(pw);
    if (pw < lf) ++wins;
    std::string argmins;
    for (const auto& cv : risk_curve(report)) {
      if (cv.estimator == StrategyKind::LowFreq100d) continue;
      if (cv.argmin_c < 1.0 || cv.argmin_c > 1.8) ++bad_argmin;
      argmins += format(" %g", cv.argmin_c);
    }
    const std::string line =
        format("    seed %2llu: c=2 pairwise %.4f lowfreq %.4f; HF argmin c:%s\n",
               static_cast<unsigned long long>(seed), pw, lf, argmins.c_str());
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
  }
  const double med = median_of(pw_std);
  const bool pass = wins >= 7 && bad_argmin == 0 && med >= 0.10 && med <= 0.16;
  return {pass, format("10 replicates: pairwise < lowfreq at c=2 in %d/10 (need >= 7); %d HF "
                       "curves with argmin outside [1.0, 1.8]; median pairwise c=2 risk %.4f "
                       "(band [0.10, 0.16])",
                       wins, bad_argmin, med)};
}

// ----------------------------------------------------------------------- 10

std::string run_cli(const std::vector<std::string>& args, int* code) {
  std::ostringstream out, err;
  *code = cli::run(args, out, err);
  return out.str();
}

/// Names and bytes of every file under `dir`, in path order.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files.emplace_back(fs::relative(e.path(), dir).string(),
                       std::string(std::istreambuf_iterator<char>(in), {}));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / ("hfcov_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  struct Command {
    std::string name;
    std::function<std::vector<std::string>(const fs::path& out, const std::string& workers)> args;
  };
  const fs::path data = root / "data";
  const std::vector<Command> commands = {
      {"simulate",
       [](const fs::path& o, const std::string& w) {
         return std::vector<std::string>{"simulate", "--p", "8", "--n-days", "16", "--seed", "4",
                                         "--latent-stride", "1", "--workers", w, "--out",
                                         o.string()};
       }},
      {"estimate",
       [&](const fs::path& o, const std::string& w) {
         return std::vector<std::string>{"estimate", "--data", data.string(), "--method",
                                         "pairwise-tscv", "--days", "10", "--project", "shift",
                                         "--workers", w, "--out", (o / "cov.csv").string()};
       }},
      {"allocate",
       [&](const fs::path& o, const std::string&) {
         return std::vector<std::string>{"allocate", "--matrix", (root / "cov.csv").string(),
                                         "--c", "1:0.5:3", "--out", o.string()};
       }},
      {"backtest (files)",
       [&](const fs::path& o, const std::string& w) {
         return std::vector<std::string>{
             "backtest", "--data", data.string(), "--seed", "4", "--strategies",
             "lowfreq,pairwise-tscv,all-refresh-tscv,all-refresh-rk,latent-oracle,equal-weight",
             "--c", "1,1.5,2", "--holding-days", "1,2", "--history-days", "10", "--invest-days",
             "6", "--window-days", "5", "--workers", w, "--out", o.string()};
       }},
      {"backtest (in-memory simulation)",
       [&](const fs::path& o, const std::string& w) {
         return std::vector<std::string>{
             "backtest", "--p", "12", "--seed", "8", "--strategies", "pairwise,all-refresh-rk",
             "--c", "1,1.4,2", "--history-days", "3", "--invest-days", "3", "--window-days",
             "3", "--workers", w, "--out", o.string()};
       }},
      {"verify-rate",
       [](const fs::path& o, const std::string& w) {
         return std::vector<std::string>{"verify-rate", "--seed", "6", "--reps", "60", "--n-grid",
                                         "250,500,1000,2000", "--workers", w, "--out",
                                         o.string()};
       }},
  };

  std::string detail;
  bool pass = true;
  int code = 0;
  for (const auto& cmd : commands) {
    std::vector<std::pair<std::string, std::string>> reference;
    std::string ref_stdout;
    bool same = true;
    for (const std::string w : {"1", "2", "4"}) {
      const fs::path out = root / (cmd.name.substr(0, cmd.name.find(' ')) + "_w" + w);
      std::string text = run_cli(cmd.args(out, w), &code);
      if (code != 0) {
        same = false;
        detail += format(" %s exit %d;", cmd.name.c_str(), code);
        break;
      }
      for (auto pos = text.find(out.string()); pos != std::string::npos;
           pos = text.find(out.string()))
        text.replace(pos, out.string().size(), "<out>");
      auto files = snapshot(out);
      if (w == "1") {
        reference = std::move(files);
        ref_stdout = text;
      } else {
        same = same && files == reference && text == ref_stdout;
      }
    }
    if (cmd.name == "simulate") fs::rename(root / "simulate_w1", data);
    if (cmd.name == "estimate") {
      fs::copy_file(root / "estimate_w1" / "cov.csv", root / "cov.csv");
      for (const char* side : {"cov.meta.json", "cov.counts.csv"})
        fs::copy_file(root / "estimate_w1" / side, root / side);
    }
    pass = pass && same;
    detail += format(" %s %s;", cmd.name.c_str(), same ? "identical" : "DIFFERS");
  }
  fs::remove_all(root);
  detail.pop_back();
  return {pass, "workers 1/2/4:" + detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "refresh-grid properties", 60, criterion1},
    {2, "estimator brute-force oracles", 60, criterion2},
    {3, "noise-bias removal", 300, criterion3},
    {4, "convergence-rate slope", 900, criterion4},
    {5, "projection contracts", 1, criterion5},
    {6, "min-variance QP solver", 300, criterion6},
    {7, "risk bound chain", 120, criterion7},
    {8, "in-sample study", 1800, criterion8},
    {9, "out-of-sample backtests", 7200, criterion9},
    {10, "determinism across worker counts", 600, criterion10},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::printf("criterion %d (%s): %s | %s | %.1f s (limit %.0f s)%s\n", c.id, c.name,
                pass ? "PASS" : "FAIL", o.detail.c_str(), secs, c.limit_seconds,
                in_time ? "" : " TOO SLOW");
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}

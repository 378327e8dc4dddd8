#include "hfcov/concentration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "hfcov/error.hpp"
#include "hfcov/estimators.hpp"
#include "hfcov/parallel.hpp"
#include "hfcov/simengine.hpp"
#include "hfcov/sync.hpp"

namespace hfcov {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(splitmix64(seed) ^ tag) + index));
}

constexpr std::uint64_t kRateTag = 0x72617465ULL;
constexpr std::uint64_t kGrowthTag = 0x67726f77ULL;

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  const double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  return out;
}

/// Shortest representation that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RateSample {
  double error = 0.0;
  double n_used = 0.0;
};

RateSample rate_sample(const RateConfig& cfg, std::size_t n, std::mt19937_64& rng) {
  const double var = cfg.daily_sigma * cfg.daily_sigma;
  ConstantVolModel model;
  model.noise_std = cfg.noise_std;
  if (cfg.target == RateTarget::TSRV) {
    model.daily_sigma = Eigen::VectorXd::Constant(1, cfg.daily_sigma);
    model.factor_loading = Eigen::VectorXd::Ones(1);
    const TickPanel panel = simulate_constant_vol_panel(model, {n}, rng);
    const auto& s = panel.series[0];
    const double est = tsrv(s.log_prices, choose_two_scale(s.size()));
    return {(est - var) / var, static_cast<double>(s.size())};
  }
  model.daily_sigma = Eigen::VectorXd::Constant(2, cfg.daily_sigma);
  model.factor_loading.resize(2);
  model.factor_loading << 1.0, cfg.rho;
  const auto ticks = static_cast<std::size_t>(std::llround(1.5 * static_cast<double>(n)));
  const TickPanel panel = simulate_constant_vol_panel(model, {ticks, ticks}, rng);
  const SyncGrid grid = pairwise_refresh(panel.series[0], panel.series[1]);
  const auto xa = sampled_log_prices(grid, panel.series[0]);
  const auto xb = sampled_log_prices(grid, panel.series[1]);
  const double est = tscv(xa, xb, choose_two_scale(grid.n_refresh()));
  return {(est - var * cfg.rho) / var, static_cast<double>(grid.n_refresh())};
}

}  // namespace

std::string to_string(RateTarget t) { return t == RateTarget::TSRV ? "tsrv" : "tscv"; }

RateTarget rate_target_from_string(const std::string& s) {
  if (s == "tsrv" || s == "TSRV") return RateTarget::TSRV;
  if (s == "tscv" || s == "TSCV") return RateTarget::TSCV;
  throw ArgumentError("unknown rate target '" + s + "' (expected tsrv or tscv)");
}

Eigen::MatrixXd ConstantVolModel::integrated_cov() const {
  validate();
  const Eigen::VectorXd s = daily_sigma.cwiseProduct(factor_loading);
  Eigen::MatrixXd cov = s * s.transpose();
  cov.diagonal() = daily_sigma.cwiseAbs2();
  return cov;
}

void ConstantVolModel::validate() const {
  if (daily_sigma.size() == 0) throw ArgumentError("constant-vol model needs at least one asset");
  if (factor_loading.size() != daily_sigma.size())
    throw ArgumentError("factor_loading and daily_sigma differ in length");
  if ((daily_sigma.array() <= 0.0).any() || !daily_sigma.allFinite())
    throw ArgumentError("daily_sigma must be positive");
  if ((factor_loading.array().abs() > 1.0).any() || !factor_loading.allFinite())
    throw ArgumentError("factor loadings must lie in [-1, 1]");
  if (!(noise_std >= 0.0)) throw ArgumentError("noise_std must be >= 0");
  if (!(seconds_per_day > 0.0)) throw ArgumentError("seconds_per_day must be positive");
}

TickPanel simulate_constant_vol_panel(const ConstantVolModel& model,
                                      const std::vector<std::size_t>& tick_counts,
                                      std::mt19937_64& rng) {
  model.validate();
  const auto p = static_cast<std::size_t>(model.p());
  if (tick_counts.size() != p) throw ArgumentError("one tick count per asset is required");
  const double T = model.seconds_per_day;
  std::uniform_real_distribution<double> unif(0.0, T);
  std::normal_distribution<double> normal(0.0, 1.0);

  TickPanel panel;
  panel.window_length_seconds = T;
  panel.series.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    auto& s = panel.series[i];
    s.asset_id = default_asset_id(static_cast<int>(i));
    s.times.resize(tick_counts[i]);
    for (auto& t : s.times) t = unif(rng);
    std::sort(s.times.begin(), s.times.end());
    s.times.erase(std::unique(s.times.begin(), s.times.end()), s.times.end());
    if (s.times.empty()) throw ArgumentError("every asset needs at least one tick");
  }

  struct Event {
    double t;
    std::size_t asset;
    std::size_t idx;
  };
  std::vector<Event> events;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < panel.series[i].size(); ++k)
      events.push_back({panel.series[i].times[k], i, k});
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.t < b.t || (a.t == b.t && a.asset < b.asset);
  });

  std::vector<std::vector<double>> factor(p);
  for (std::size_t i = 0; i < p; ++i) factor[i].resize(panel.series[i].size());
  double w = 0.0;
  double t_prev = 0.0;
  for (const auto& e : events) {
    w += std::sqrt((e.t - t_prev) / T) * normal(rng);
    t_prev = e.t;
    factor[e.asset][e.idx] = w;
  }

  for (std::size_t i = 0; i < p; ++i) {
    auto& s = panel.series[i];
    const double a = model.factor_loading[static_cast<Eigen::Index>(i)];
    const double b = std::sqrt(std::max(0.0, 1.0 - a * a));
    const double sigma = model.daily_sigma[static_cast<Eigen::Index>(i)];
    s.log_prices.resize(s.size());
    double bm = 0.0;
    t_prev = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      bm += std::sqrt((s.times[k] - t_prev) / T) * normal(rng);
      t_prev = s.times[k];
      s.log_prices[k] = sigma * (a * factor[i][k] + b * bm);
    }
    if (model.noise_std > 0.0)
      for (auto& x : s.log_prices) x += model.noise_std * normal(rng);
  }
  return panel;
}

double RateExperiment::decreasing_fraction() const {
  if (rmse.size() < 2) return 0.0;
  std::size_t dec = 0;
  for (std::size_t i = 1; i < rmse.size(); ++i)
    if (rmse[i] < rmse[i - 1]) ++dec;
  return static_cast<double>(dec) / static_cast<double>(rmse.size() - 1);
}

std::vector<ExceedancePoint> exceedance_curve(const std::vector<double>& normalized, double x_max,
                                              double x_step) {
  if (!(x_step > 0.0) || !(x_max >= 0.0)) throw ArgumentError("exceedance grid needs step > 0");
  if (normalized.empty()) throw ArgumentError("exceedance curve needs at least one error");
  std::vector<double> sorted = normalized;
  std::sort(sorted.begin(), sorted.end());
  const auto steps = static_cast<std::size_t>(std::floor(x_max / x_step + 1e-9));
  std::vector<ExceedancePoint> curve;
  curve.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double x = std::round(static_cast<double>(k) * x_step * 1e12) / 1e12;
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
    curve.push_back({x, static_cast<double>(above) / static_cast<double>(sorted.size())});
  }
  return curve;
}

RateExperiment run_rate_experiment(const RateConfig& cfg) {
  if (cfg.n_grid.size() < 4) throw ArgumentError("rate experiment needs an n grid of length >= 4");
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    if (cfg.n_grid[i] < 16) throw ArgumentError("rate experiment needs n >= 16");
    if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1])
      throw ArgumentError("rate experiment n grid must be strictly increasing");
  }
  if (cfg.n_reps < 1) throw ArgumentError("rate experiment needs n_reps >= 1");
  if (!(cfg.daily_sigma > 0.0)) throw ArgumentError("daily_sigma must be positive");
  if (!(cfg.noise_std >= 0.0)) throw ArgumentError("noise_std must be >= 0");
  if (!(std::abs(cfg.rho) <= 1.0)) throw ArgumentError("rho must lie in [-1, 1]");

  const std::size_t G = cfg.n_grid.size();
  const std::size_t R = cfg.n_reps;
  RateExperiment exp;
  exp.target = cfg.target;
  exp.n_grid = cfg.n_grid;
  exp.n_reps = R;
  exp.seed = cfg.seed;
  exp.unstable = R < kMinStableReps;
  exp.errors.resize(static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(R));
  Eigen::MatrixXd n_used(exp.errors.rows(), exp.errors.cols());

  parallel_for(G * R, cfg.workers, [&](std::size_t job) {
    const std::size_t g = job / R;
    const std::size_t r = job % R;
    std::mt19937_64 rng = stream(cfg.seed, kRateTag + static_cast<std::uint64_t>(cfg.target), job);
    const RateSample s = rate_sample(cfg, cfg.n_grid[g], rng);
    exp.errors(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(r)) = s.error;
    n_used(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(r)) = s.n_used;
  });

  Eigen::VectorXd lx(static_cast<Eigen::Index>(G));
  Eigen::VectorXd ly(static_cast<Eigen::Index>(G));
  for (std::size_t g = 0; g < G; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    exp.n_effective.push_back(n_used.row(gi).mean());
    exp.rmse.push_back(std::sqrt(exp.errors.row(gi).squaredNorm() / static_cast<double>(R)));
    lx[gi] = std::log(exp.n_effective.back());
    ly[gi] = std::log(exp.rmse.back());
  }
  const Eigen::VectorXd dx = lx.array() - lx.mean();
  exp.fitted_slope = dx.dot(ly.array().matrix() - Eigen::VectorXd::Constant(ly.size(), ly.mean())) /
                     dx.squaredNorm();

  const auto last = static_cast<Eigen::Index>(G - 1);
  std::vector<double> normalized(R);
  for (std::size_t r = 0; r < R; ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    normalized[r] = std::pow(n_used(last, ri), 1.0 / 6.0) * std::abs(exp.errors(last, ri));
  }
  exp.exceedance_curve = exceedance_curve(normalized, cfg.x_max, cfg.x_step);
  return exp;
}

TailShapeReport tail_shape_report(const std::vector<ExceedancePoint>& curve,
                                  const TailShapeOptions& opts) {
  TailShapeReport rep;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& pt : curve) {
    if (pt.x < opts.fit_lo - 1e-12 || pt.x > opts.fit_hi + 1e-12 || !(pt.exceedance > 0.0))
      continue;
    const double u = pt.x * pt.x;
    const double y = std::log(pt.exceedance);
    sx += u;
    sy += y;
    sxx += u * u;
    sxy += u * y;
    ++rep.fit_points;
  }
  const double m = static_cast<double>(rep.fit_points);
  const double denom = m * sxx - sx * sx;
  if (rep.fit_points < 3 || !(denom > 0.0)) {
    rep.degenerate = true;
    rep.C = nan;
    rep.prefactor = nan;
    rep.warning = "tail fit degenerate: " + std::to_string(rep.fit_points) +
                  " positive exceedance points in the fit range";
  } else {
    const double slope = (m * sxy - sx * sy) / denom;
    rep.C = -slope;
    rep.prefactor = std::exp((sy - slope * sx) / m);
  }
  for (const auto& pt : curve)
    rep.rows.push_back({pt.x, pt.exceedance,
                        rep.degenerate ? nan : rep.prefactor * std::exp(-rep.C * pt.x * pt.x)});

  std::vector<double> logs;
  const std::size_t stride = std::max<std::size_t>(1, opts.stride);
  for (std::size_t k = 0; k < curve.size(); k += stride) {
    if (!(curve[k].exceedance >= opts.min_exceedance) || !(curve[k].exceedance > 0.0)) break;
    logs.push_back(std::log(curve[k].exceedance));
  }
  rep.max_second_difference = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k < logs.size(); ++k)
    rep.max_second_difference =
        std::max(rep.max_second_difference, logs[k] - 2.0 * logs[k - 1] + logs[k - 2]);
  if (logs.size() < 3) rep.max_second_difference = 0.0;
  rep.log_concave = rep.max_second_difference <= opts.tolerance;
  return rep;
}

void write_rate_table(const std::filesystem::path& path, const RateExperiment& exp) {
  auto out = open_out(path);
  out << "target,n,n_effective,rmse\n";
  for (std::size_t g = 0; g < exp.n_grid.size(); ++g)
    out << to_string(exp.target) << ',' << exp.n_grid[g] << ',' << num(exp.n_effective[g]) << ','
        << num(exp.rmse[g]) << '\n';
}

void write_tail_table(const std::filesystem::path& path, const TailShapeReport& rep) {
  auto out = open_out(path);
  out << "x,exceedance,fitted\n";
  for (const auto& r : rep.rows)
    out << num(r.x) << ',' << num(r.exceedance) << ',' << num(r.fitted) << '\n';
}

RefreshComparison compare_refresh_schemes(int p, std::size_t n_days, std::uint64_t seed,
                                          unsigned workers) {
  if (p < 2) throw ArgumentError("refresh comparison needs p >= 2");
  if (n_days < 1) throw ArgumentError("refresh comparison needs at least one day");
  SimConfig cfg;
  cfg.daily_oracle = true;
  cfg.workers = workers;
  Simulator sim(default_params(p, seed), cfg, seed);
  const Eigen::Index P = p;
  std::vector<std::vector<double>> err_pw(static_cast<std::size_t>(P * P));
  std::vector<std::vector<double>> err_all(static_cast<std::size_t>(P * P));
  std::vector<double> n_all;
  RefreshComparison out;
  out.asset_ids = sim.asset_ids();
  out.pair_counts = Eigen::MatrixXi::Zero(P, P);
  for (std::size_t d = 0; d < n_days; ++d) {
    const DayPaths day = sim.next_day();
    MatrixOptions mo;
    mo.workers = workers;
    const CovEstimate pw = estimate_matrix_pairwise(day.ticks, 1.0, mo);
    const CovEstimate all = estimate_matrix_allrefresh(day.ticks, 1.0, AllRefreshMode::TSCV, 1, mo);
    out.pair_counts += pw.pair_counts;
    n_all.push_back(static_cast<double>(all.n_min));
    for (Eigen::Index i = 0; i < P; ++i)
      for (Eigen::Index j = 0; j < P; ++j) {
        const auto k = static_cast<std::size_t>(i * P + j);
        err_pw[k].push_back(std::abs(pw.matrix(i, j) - day.oracle.matrix(i, j)));
        err_all[k].push_back(std::abs(all.matrix(i, j) - day.oracle.matrix(i, j)));
      }
  }
  out.median_abs_error_pairwise.resize(P, P);
  out.median_abs_error_allrefresh.resize(P, P);
  for (Eigen::Index i = 0; i < P; ++i)
    for (Eigen::Index j = 0; j < P; ++j) {
      const auto k = static_cast<std::size_t>(i * P + j);
      out.median_abs_error_pairwise(i, j) = median_of(err_pw[k]);
      out.median_abs_error_allrefresh(i, j) = median_of(err_all[k]);
    }
  out.pair_counts /= static_cast<int>(n_days);
  out.n_all_refresh_median = std::lround(median_of(n_all));
  return out;
}

std::vector<ApGrowthPoint> ap_growth_experiment(const std::vector<int>& p_grid,
                                                std::size_t ticks_per_asset, std::size_t n_reps,
                                                std::uint64_t seed, unsigned workers) {
  if (p_grid.empty()) throw ArgumentError("a_p growth needs a non-empty p grid");
  if (n_reps < 1) throw ArgumentError("a_p growth needs n_reps >= 1");
  if (ticks_per_asset < 16) throw ArgumentError("a_p growth needs at least 16 ticks per asset");
  std::vector<ApGrowthPoint> out;
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    const int p = p_grid[g];
    if (p < 2) throw ArgumentError("a_p growth needs p >= 2");
    ConstantVolModel model;
    model.daily_sigma.resize(p);
    for (int i = 0; i < p; ++i) model.daily_sigma[i] = 0.015 + 0.01 * i / (p - 1);
    model.factor_loading = Eigen::VectorXd::Constant(p, 0.6);
    const Eigen::MatrixXd truth = model.integrated_cov();
    std::vector<double> a_p(n_reps);
    parallel_for(n_reps, workers, [&](std::size_t r) {
      std::mt19937_64 rng = stream(seed, kGrowthTag + static_cast<std::uint64_t>(p), r);
      const TickPanel panel = simulate_constant_vol_panel(
          model, std::vector<std::size_t>(static_cast<std::size_t>(p), ticks_per_asset), rng);
      const CovEstimate est = estimate_matrix_pairwise(panel, 1.0);
      a_p[r] = (est.matrix - truth).cwiseAbs().maxCoeff();
    });
    out.push_back({p, median_of(a_p)});
  }
  return out;
}

}  // namespace hfcov

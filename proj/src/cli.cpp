#include "hfcov/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "hfcov/backtest.hpp"
#include "hfcov/concentration.hpp"
#include "hfcov/error.hpp"
#include "hfcov/estimators.hpp"
#include "hfcov/portfolio.hpp"
#include "hfcov/psdproject.hpp"
#include "hfcov/simengine.hpp"
#include "hfcov/sync.hpp"
#include "hfcov/tickdata.hpp"

namespace hfcov::cli {

namespace {

std::string format(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  char buf[1024];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  return parts;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ArgumentError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ArgumentError("not a number: '" + s + "'");
  return v;
}

std::vector<std::size_t> parse_count_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  for (double v : parse_number_list(text)) {
    if (v < 1.0 || v != std::floor(v))
      throw ArgumentError(std::string(what) + " must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string c_label(double c) { return format("%g", c); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ArgumentError("output directory " + dir.string() + " is not writable");
}

void ensure_parent(const std::filesystem::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

/// Config entries become `--key=value` tokens placed before the user's own
/// arguments, so flags given on the command line win.
std::vector<std::string> with_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::vector<std::string> out{args[0]};
  for (const auto& [key, value] : read_config_file(path)) {
    std::string k = key;
    if (k.rfind("--", 0) == 0) k = k.substr(2);
    std::replace(k.begin(), k.end(), '_', '-');
    if (k == "config") continue;
    out.push_back("--" + k + "=" + value);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

Projection parse_projection(const std::string& s) {
  if (s == "shift") return Projection::Shift;
  if (s == "clip") return Projection::Clip;
  if (s == "none") return Projection::None;
  throw ArgumentError("unknown projection '" + s + "' (expected shift, clip or none)");
}

// ------------------------------------------------------------------ simulate

struct SimulateOpts {
  int p = 0;
  int n_days = 1;
  std::uint64_t seed = 0;
  double noise_std = 0.0005;
  double vol_of_vol_scale = 0.30;
  int latent_stride = 1;
  int assessment_interval = 900;
  unsigned workers = 1;
  std::string out_dir;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  if (o.p < 1) throw ArgumentError("--p must be >= 1");
  if (o.n_days < 1) throw ArgumentError("--n-days must be >= 1");
  if (o.latent_stride < 0) throw ArgumentError("--latent-stride must be >= 0");
  const std::filesystem::path dir(o.out_dir);
  ensure_dir(dir);
  SimConfig cfg;
  cfg.noise_std = o.noise_std;
  cfg.vol_of_vol_scale = o.vol_of_vol_scale;
  cfg.assessment_interval = o.assessment_interval;
  cfg.keep_grid = o.latent_stride > 0;
  cfg.workers = o.workers;
  const auto params = default_params(o.p, o.seed);
  Simulator sim(params, cfg, o.seed);
  const auto ids = sim.asset_ids();
  write_sim_params(dir, params, cfg, o.seed, static_cast<std::size_t>(o.n_days));
  for (int d = 0; d < o.n_days; ++d) {
    const DayPaths day = sim.next_day();
    write_day_files(dir, day, ids, std::max(1, o.latent_stride));
    std::vector<double> counts;
    for (const auto& s : day.ticks.series) counts.push_back(static_cast<double>(s.size()));
    std::sort(counts.begin(), counts.end());
    const std::size_t m = counts.size() / 2;
    const double median = counts.size() % 2 ? counts[m] : 0.5 * (counts[m - 1] + counts[m]);
    out << format("day %d ticks min %.0f median %g max %.0f\n", d, counts.front(), median,
                  counts.back());
  }
  out << format("wrote %d day(s) for %d assets to %s\n", o.n_days, o.p, dir.string().c_str());
  return kExitOk;
}

// ------------------------------------------------------------------ estimate

struct EstimateOpts {
  std::string data_dir;
  std::string method;
  int first_day = 0;
  int days = 1;
  std::string project = "none";
  int kernel_H = 1;
  std::string oracle;
  std::string out_path;
  double seconds_per_day = kSecondsPerDay;
  unsigned workers = 1;
};

StrategyKind parse_estimate_method(const std::string& s) {
  const StrategyKind k = strategy_from_string(s);
  if (k == StrategyKind::LatentOracle1d || k == StrategyKind::EqualWeight)
    throw ArgumentError("estimate supports pairwise-tscv, all-refresh-tscv, all-refresh-rk and "
                        "lowfreq, not '" + s + "'");
  return k;
}

TickPanel load_day(const std::filesystem::path& dir, std::size_t day, double spd,
                   const std::vector<std::string>& ids) {
  const auto path = dir / tick_file_name(day);
  if (!std::filesystem::exists(path)) throw InsufficientDataError("missing " + path.string());
  TickPanel raw = load_panel(path, spd);
  if (ids.empty()) return raw;
  TickPanel panel;
  panel.window_length_seconds = raw.window_length_seconds;
  for (const auto& id : ids) {
    const std::size_t a = raw.find(id);
    if (a == raw.num_assets())
      throw InsufficientDataError("asset " + id + " has no ticks in " + path.string());
    panel.series.push_back(std::move(raw.series[a]));
  }
  if (raw.num_assets() != ids.size())
    throw InsufficientDataError(path.string() + " has " + std::to_string(raw.num_assets()) +
                                " assets, expected " + std::to_string(ids.size()));
  return panel;
}

int cmd_estimate(const EstimateOpts& o, std::ostream& out, std::ostream& err) {
  const StrategyKind kind = parse_estimate_method(o.method);
  const Projection projection = parse_projection(o.project);
  if (o.first_day < 0) throw ArgumentError("--first-day must be >= 0");
  if (o.days < 1) throw ArgumentError("--days must be >= 1");
  if (o.kernel_H < 1) throw ArgumentError("--kernel-H must be >= 1");
  const std::filesystem::path dir(o.data_dir);
  if (!std::filesystem::is_directory(dir))
    throw InsufficientDataError("data directory " + dir.string() + " does not exist");
  ensure_parent(o.out_path);

  std::vector<std::string> ids;
  std::vector<CovEstimate> daily;
  Eigen::MatrixXd closes;
  long n_star = 0;
  MatrixOptions mo;
  mo.workers = o.workers;
  for (int k = 0; k < o.days; ++k) {
    const auto day = static_cast<std::size_t>(o.first_day + k);
    const TickPanel panel = load_day(dir, day, o.seconds_per_day, ids);
    if (ids.empty()) {
      ids = panel.asset_ids();
      closes.resize(o.days, static_cast<Eigen::Index>(ids.size()));
    }
    closes.row(k) = observed_close(panel).transpose();
    if (kind == StrategyKind::LowFreq100d) continue;
    n_star += static_cast<long>(all_refresh(panel).n_refresh());
    switch (kind) {
      case StrategyKind::PairwiseTSCV10d:
        daily.push_back(estimate_matrix_pairwise(panel, 1.0, mo));
        break;
      case StrategyKind::AllRefreshTSCV10d:
        daily.push_back(estimate_matrix_allrefresh(panel, 1.0, AllRefreshMode::TSCV, o.kernel_H, mo));
        break;
      default:
        daily.push_back(estimate_matrix_allrefresh(panel, 1.0, AllRefreshMode::RK, o.kernel_H, mo));
        break;
    }
  }

  CovEstimate est;
  if (kind == StrategyKind::LowFreq100d) {
    for (Eigen::Index r = 1; r < closes.rows(); ++r)
      for (Eigen::Index c = 0; c < closes.cols(); ++c)
        if (std::isnan(closes(r, c))) closes(r, c) = closes(r - 1, c);
    est = lowfreq_sample_cov(closes, ids);
  } else {
    est = combine_daily_estimates(daily);
  }

  if (!est.rejections.empty()) {
    err << "error: insufficient data for " << est.rejections.size() << " pair(s):\n";
    for (const auto& r : est.rejections)
      err << format("  %s,%s n_refresh=%ld %s\n", r.asset_a.c_str(), r.asset_b.c_str(),
                    r.n_refresh, r.reason.c_str());
    return kExitData;
  }

  out << format("method %s days %d..%d p %zu\n", to_string(est.method).c_str(), o.first_day,
                o.first_day + o.days - 1, ids.size());
  out << format("n_min %ld\n", est.n_min);
  if (kind != StrategyKind::LowFreq100d) out << format("n_star %ld\n", n_star);
  const double raw_min_eig = min_eigenvalue(est.matrix);
  out << format("raw_min_eigenvalue %.6e\n", raw_min_eig);
  if (projection != Projection::None) est = project_cov(est, projection);
  const ConditionDiagnostics diag = condition_diagnostics(est);
  out << format("projection %s\n", to_string(projection).c_str());
  out << format("min_eigenvalue %.6e\n", diag.min_eig);
  out << format("max_eigenvalue %.6e\n", diag.max_eig);
  out << format("condition_number %.6e\n", diag.condition_number);
  if (!o.oracle.empty()) {
    const CovEstimate oracle = read_cov(o.oracle);
    if (oracle.asset_ids != est.asset_ids)
      throw InsufficientDataError("oracle " + o.oracle + " lists different assets");
    out << format("a_p %.6e\n", max_elementwise_error(est, oracle));
  }
  write_cov(o.out_path, est);
  out << "wrote " << o.out_path << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ allocate

struct AllocateOpts {
  std::string matrix;
  std::string c = "1";
  std::string project = "none";
  std::string out_dir;
};

int cmd_allocate(const AllocateOpts& o, std::ostream& out, std::ostream& err) {
  const std::vector<double> cs = parse_number_list(o.c);
  for (double c : cs)
    if (c < 1.0) throw ArgumentError(format("gross exposure c = %g is below 1", c));
  const Projection projection = parse_projection(o.project);
  const std::filesystem::path dir(o.out_dir);
  ensure_dir(dir);
  CovEstimate est = read_cov(o.matrix);
  if (projection != Projection::None) est = project_cov(est, projection);
  for (double c : cs) {
    PortfolioWeights w;
    try {
      w = solve_min_variance(est, c);
    } catch (const IndefiniteError& e) {
      err << "error: " << e.what()
          << "\n  the matrix is not positive semi-definite; rerun with --project shift or "
             "--project clip\n";
      return kExitData;
    }
    const auto path = dir / ("weights_c" + c_label(c) + ".csv");
    write_weights(path, est.asset_ids, w);
    out << format("c %g gross %.6f max %.6f min %.6f long %d short %d -> %s\n", c,
                  w.gross_exposure, w.max_weight, w.min_weight, w.n_long, w.n_short,
                  path.filename().string().c_str());
  }
  return kExitOk;
}

// ------------------------------------------------------------------ backtest

struct BacktestOpts {
  std::string data_dir;
  int sim_p = 0;
  std::uint64_t seed = 0;
  std::string strategies = "lowfreq,pairwise-tscv,all-refresh-tscv,all-refresh-rk";
  std::string c = "1,1.2,1.4,1.6,1.8,2,2.5,3";
  std::string holding_days = "1";
  int history_days = 100;
  int invest_days = 100;
  std::string mode = "simulation";
  std::string project = "shift";
  int kernel_H = 1;
  int window_days = 0;
  int assessment_interval = 900;
  double seconds_per_day = kSecondsPerDay;
  unsigned workers = 1;
  std::string out_dir;
};

int cmd_backtest(const BacktestOpts& o, std::ostream& out, std::ostream& err) {
  if (o.mode != "simulation" && o.mode != "empirical")
    throw ArgumentError("--mode must be simulation or empirical");
  const bool empirical = o.mode == "empirical";
  if (o.data_dir.empty() == (o.sim_p == 0))
    throw ArgumentError("give exactly one of --data (tick files) or --p (in-memory simulation)");
  if (o.sim_p < 0) throw ArgumentError("--p must be >= 1");
  if (o.history_days < 1 || o.invest_days < 1)
    throw ArgumentError("--history-days and --invest-days must be >= 1");

  BacktestConfig cfg;
  cfg.history_days = static_cast<std::size_t>(o.history_days);
  cfg.invest_days = static_cast<std::size_t>(o.invest_days);
  cfg.empirical = empirical;
  cfg.workers = o.workers;
  const std::vector<double> cs = parse_number_list(o.c);
  for (double c : cs)
    if (c < 1.0) throw ArgumentError(format("gross exposure c = %g is below 1", c));
  const auto taus = parse_count_list(o.holding_days, "--holding-days");
  const Projection projection = parse_projection(o.project);
  bool need_oracle = false;
  for (const auto& name : split(o.strategies, ',')) {
    const StrategyKind kind = strategy_from_string(name);
    need_oracle = need_oracle || kind == StrategyKind::LatentOracle1d;
    for (std::size_t tau : taus) {
      StrategySpec spec;
      spec.estimator = kind;
      spec.holding_days = static_cast<int>(tau);
      spec.c_grid = cs;
      spec.projection = projection;
      spec.kernel_H = o.kernel_H;
      if (o.window_days > 0 && kind != StrategyKind::LatentOracle1d &&
          kind != StrategyKind::EqualWeight)
        spec.window_days = o.window_days;
      spec.validate();
      cfg.strategies.push_back(spec);
    }
  }
  const std::filesystem::path dir(o.out_dir);
  ensure_dir(dir);

  std::unique_ptr<DaySource> source;
  if (!o.data_dir.empty()) {
    source = std::make_unique<FileDaySource>(o.data_dir, empirical, o.assessment_interval,
                                             o.seconds_per_day, need_oracle);
  } else {
    SimConfig sc;
    sc.assessment_interval = o.assessment_interval;
    sc.workers = o.workers;
    SimulatedSourceOptions so;
    so.empirical = empirical;
    so.with_oracle = need_oracle;
    so.n_days = cfg.history_days + cfg.invest_days;
    source = std::make_unique<SimulatedDaySource>(default_params(o.sim_p, o.seed), sc, o.seed, so);
  }

  const BacktestReport report = out_of_sample_run(*source, cfg);
  write_backtest_report(dir / "report.csv", report);
  write_period_returns(dir / "returns.csv", report);
  for (const auto& r : report.results)
    out << format("%-22s tau %d c %-4g std %.4f mean %+.4f max_w %.4f rebalances %zu\n",
                  to_string(r.estimator).c_str(), r.holding_days, r.c, r.annualized_std,
                  r.annualized_mean, r.max_weight, r.rebalances.size());
  std::vector<double> distinct = cs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 3) {
    const auto curves = risk_curve(report);
    write_risk_curves(dir / "risk_curves.csv", curves);
    for (const auto& cv : curves)
      out << format("risk curve %s tau %d: minimum at c = %g%s\n", to_string(cv.estimator).c_str(),
                    cv.holding_days, cv.argmin_c,
                    cv.argmin_on_boundary ? " (grid boundary)" : "");
  } else {
    err << "note: fewer than 3 distinct c values, risk curves not written\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------- verify-rate

struct VerifyOpts {
  std::string target = "both";
  std::string n_grid = "500,1000,2000,4000,8000,16000";
  std::size_t reps = 200;
  std::uint64_t seed = 0;
  std::string band = "-0.28,-0.08";
  double rho = 0.5;
  double noise_std = 0.0005;
  double daily_sigma = 0.02;
  unsigned workers = 1;
  std::string out_dir;
};

int cmd_verify_rate(const VerifyOpts& o, std::ostream& out, std::ostream& err) {
  const auto band = parse_number_list(o.band);
  if (band.size() != 2 || !(band[0] <= band[1]))
    throw ArgumentError("--band needs two numbers lo,hi with lo <= hi");
  std::vector<RateTarget> targets;
  if (o.target == "both") {
    targets = {RateTarget::TSRV, RateTarget::TSCV};
  } else {
    targets = {rate_target_from_string(o.target)};
  }
  RateConfig cfg;
  cfg.n_grid = parse_count_list(o.n_grid, "--n-grid");
  cfg.n_reps = o.reps;
  cfg.seed = o.seed;
  cfg.rho = o.rho;
  cfg.noise_std = o.noise_std;
  cfg.daily_sigma = o.daily_sigma;
  cfg.workers = o.workers;
  if (o.reps < kMinStableReps)
    err << format("warning: reps = %zu is below %zu; the fitted slope is unstable\n", o.reps,
                  kMinStableReps);
  const std::filesystem::path dir(o.out_dir);
  ensure_dir(dir);
  bool in_band = true;
  for (RateTarget t : targets) {
    cfg.target = t;
    const RateExperiment exp = run_rate_experiment(cfg);
    const TailShapeReport tail = tail_shape_report(exp);
    write_rate_table(dir / ("rate_" + to_string(t) + ".csv"), exp);
    write_tail_table(dir / ("tail_" + to_string(t) + ".csv"), tail);
    const bool ok = exp.fitted_slope >= band[0] && exp.fitted_slope <= band[1];
    in_band = in_band && ok;
    out << format("%s slope %.4f band [%g, %g] %s\n", to_string(t).c_str(), exp.fitted_slope,
                  band[0], band[1], ok ? "ok" : "OUT OF BAND");
    for (std::size_t g = 0; g < exp.n_grid.size(); ++g)
      out << format("  n %zu n_eff %.1f rmse %.6f\n", exp.n_grid[g], exp.n_effective[g],
                    exp.rmse[g]);
    if (tail.degenerate)
      err << "warning: " << tail.warning << '\n';
    else
      out << format("  tail fit C %.4f prefactor %.4f log-concave %s\n", tail.C, tail.prefactor,
                    tail.log_concave ? "yes" : "no");
  }
  return in_band ? kExitOk : kExitBand;
}

template <typename T>
CLI::Option* add_seed(CLI::App* sub, T& seed) {
  return sub->add_option("--seed", seed, "RNG seed (required)")->required();
}

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariance estimation and portfolio allocation from high-frequency tick data",
               "hfcov"};
  app.require_subcommand(1);
  std::string config_path;

  SimulateOpts so;
  auto* sim = app.add_subcommand("simulate", "Simulate tick data, latent grids and parameters");
  EstimateOpts eo;
  auto* est = app.add_subcommand("estimate", "Estimate a covariance matrix from tick files");
  AllocateOpts ao;
  auto* alloc = app.add_subcommand("allocate", "Gross-exposure constrained minimum-variance weights");
  BacktestOpts bo;
  auto* bt = app.add_subcommand("backtest", "Out-of-sample backtest of rebalancing strategies");
  VerifyOpts vo;
  auto* vr = app.add_subcommand("verify-rate", "Monte Carlo check of the TSRV/TSCV error rate");

  for (auto* sub : {sim, est, alloc, bt, vr}) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--config", config_path, "key = value file; flags override it");
  }

  sim->add_option("--p", so.p, "number of assets")->required();
  sim->add_option("--n-days", so.n_days, "number of trading days");
  add_seed(sim, so.seed);
  sim->add_option("--noise-std", so.noise_std, "observation noise standard deviation");
  sim->add_option("--vol-of-vol-scale", so.vol_of_vol_scale, "multiplier of beta1");
  sim->add_option("--latent-stride", so.latent_stride,
                  "seconds between latent rows written (0 = no latent files)");
  sim->add_option("--assessment-interval", so.assessment_interval, "seconds");
  sim->add_option("--workers", so.workers, "worker threads");
  sim->add_option("--out", so.out_dir, "output directory")->required();

  est->add_option("--data", eo.data_dir, "directory of ticks_D<k>.csv files")->required();
  est->add_option("--method", eo.method,
                  "pairwise-tscv | all-refresh-tscv | all-refresh-rk | lowfreq")
      ->required();
  est->add_option("--first-day", eo.first_day, "first day index of the window");
  est->add_option("--days", eo.days, "window length in days");
  est->add_option("--project", eo.project, "shift | clip | none");
  est->add_option("--kernel-H", eo.kernel_H, "realized-kernel bandwidth");
  est->add_option("--oracle", eo.oracle, "covariance file to compute a_p against");
  est->add_option("--seconds-per-day", eo.seconds_per_day, "trading-day length");
  est->add_option("--workers", eo.workers, "worker threads");
  est->add_option("--out", eo.out_path, "output matrix CSV")->required();

  alloc->add_option("--matrix", ao.matrix, "covariance matrix CSV")->required();
  alloc->add_option("--c", ao.c, "gross exposure list (1,1.5) or grid (1:0.2:3)");
  alloc->add_option("--project", ao.project, "shift | clip | none");
  alloc->add_option("--out", ao.out_dir, "output directory")->required();

  bt->add_option("--data", bo.data_dir, "directory of day files");
  bt->add_option("--p", bo.sim_p, "simulate p assets in memory instead of reading files");
  add_seed(bt, bo.seed);
  bt->add_option("--strategies", bo.strategies, "comma-separated strategy names");
  bt->add_option("--c", bo.c, "gross exposure list or grid");
  bt->add_option("--holding-days", bo.holding_days, "holding periods tau, comma-separated");
  bt->add_option("--history-days", bo.history_days, "days before the first investment day");
  bt->add_option("--invest-days", bo.invest_days, "investment days");
  bt->add_option("--mode", bo.mode, "simulation | empirical");
  bt->add_option("--project", bo.project, "shift | clip | none");
  bt->add_option("--kernel-H", bo.kernel_H, "realized-kernel bandwidth");
  bt->add_option("--window-days", bo.window_days, "override estimation window (0 = default)");
  bt->add_option("--assessment-interval", bo.assessment_interval, "return interval in seconds");
  bt->add_option("--seconds-per-day", bo.seconds_per_day, "trading-day length");
  bt->add_option("--workers", bo.workers, "worker threads");
  bt->add_option("--out", bo.out_dir, "output directory")->required();

  vr->add_option("--target", vo.target, "tsrv | tscv | both");
  vr->add_option("--n-grid", vo.n_grid, "observation counts, strictly increasing");
  vr->add_option("--reps", vo.reps, "replications per n");
  add_seed(vr, vo.seed);
  vr->add_option("--band", vo.band, "accepted slope band lo,hi (use --band=lo,hi)");
  vr->add_option("--rho", vo.rho, "correlation of the TSCV pair");
  vr->add_option("--noise-std", vo.noise_std, "observation noise standard deviation");
  vr->add_option("--daily-sigma", vo.daily_sigma, "daily volatility");
  vr->add_option("--workers", vo.workers, "worker threads");
  vr->add_option("--out", vo.out_dir, "output directory")->required();

  args = with_config(args);
  std::vector<std::string> argv_store{"hfcov"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (sim->parsed()) return cmd_simulate(so, out);
  if (est->parsed()) return cmd_estimate(eo, out, err);
  if (alloc->parsed()) return cmd_allocate(ao, out, err);
  if (bt->parsed()) return cmd_backtest(bo, out, err);
  return cmd_verify_rate(vo, out, err);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<double> parse_number_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ArgumentError("empty number list");
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ArgumentError("grid must be lo:step:hi, got '" + t + "'");
    const double lo = parse_number(parts[0]);
    const double step = parse_number(parts[1]);
    const double hi = parse_number(parts[2]);
    if (!(step > 0.0) || hi < lo) throw ArgumentError("grid '" + t + "' needs step > 0, hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k)
      out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
    return out;
  }
  std::vector<double> out;
  for (const auto& part : split(t, ',')) out.push_back(parse_number(part));
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const IndefiniteError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace hfcov::cli

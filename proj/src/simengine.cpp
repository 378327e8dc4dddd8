#include "hfcov/simengine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hfcov/error.hpp"
#include "hfcov/estimators.hpp"
#include "hfcov/parallel.hpp"

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

constexpr std::uint64_t kParamTag = 0x70617261ULL;
constexpr std::uint64_t kCommonTag = 0x636f6d6dULL;
constexpr std::uint64_t kPathTag = 0x70617468ULL;
constexpr std::uint64_t kTickTag = 0x7469636bULL;

void validate_config(const SimConfig& cfg) {
  if (cfg.seconds_per_day < 1) throw ArgumentError("seconds_per_day must be positive");
  if (!(cfg.days_per_unit > 0.0)) throw ArgumentError("days_per_unit must be positive");
  if (!(cfg.vol_of_vol_scale >= 0.0)) throw ArgumentError("vol_of_vol_scale must be >= 0");
  if (!(cfg.noise_std >= 0.0)) throw ArgumentError("noise_std must be >= 0");
  if (!(cfg.tick_time_resolution > 0.0)) throw ArgumentError("tick_time_resolution must be positive");
  if (cfg.assessment_interval < 1 || cfg.seconds_per_day % cfg.assessment_interval != 0)
    throw ArgumentError("assessment_interval must divide seconds_per_day");
}

}  // namespace

std::string default_asset_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "A%03d", index + 1);
  return buf;
}

std::vector<AssetParams> default_params(int p, std::uint64_t seed) {
  if (p < 1) throw ArgumentError("default_params: p must be >= 1");
  std::mt19937_64 rng = stream(seed, kParamTag, 0);
  std::uniform_real_distribution<double> u(0.7, 1.3);
  std::vector<AssetParams> out(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const double x1 = u(rng), x2 = u(rng), x3 = u(rng), x4 = u(rng);
    auto& a = out[static_cast<std::size_t>(i)];
    a.asset_id = default_asset_id(i);
    a.mu = 0.03 * x1;
    a.beta0 = -x2;
    a.beta1 = 0.75 * x3;
    a.alpha = x4 / 40.0;
    a.rho = -0.7;
    a.lambda = std::exp(a.beta0);
    a.trade_intensity = 0.02 * (i + 1) * 23400.0;
  }
  return out;
}

void validate_params(const std::vector<AssetParams>& params) {
  if (params.empty()) throw ArgumentError("no asset parameters");
  for (const auto& a : params) {
    if (!(a.alpha > 0.0)) throw ArgumentError(a.asset_id + ": alpha must be positive");
    if (!(a.beta1 > 0.0)) throw ArgumentError(a.asset_id + ": beta1 must be positive");
    if (!(std::abs(a.rho) < 1.0)) throw ArgumentError(a.asset_id + ": |rho| must be < 1");
    if (!(a.trade_intensity > 0.0)) throw ArgumentError(a.asset_id + ": trade_intensity must be positive");
    if (!(a.lambda >= 0.0)) throw ArgumentError(a.asset_id + ": lambda must be >= 0");
    if (!std::isfinite(a.mu) || !std::isfinite(a.beta0))
      throw ArgumentError(a.asset_id + ": non-finite parameter");
  }
}

Simulator::Simulator(std::vector<AssetParams> params, SimConfig cfg, std::uint64_t seed)
    : params_(std::move(params)), cfg_(cfg), seed_(seed), common_rng_(stream(seed, kCommonTag, 0)) {
  validate_params(params_);
  validate_config(cfg_);
  const std::size_t p = params_.size();
  x_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p));
  log_vol_.resize(static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    path_rng_.push_back(stream(seed, kPathTag, i));
    tick_rng_.push_back(stream(seed, kTickTag, i));
    const auto& a = params_[i];
    const double b1 = cfg_.vol_of_vol_scale * a.beta1;
    double lv = a.beta0;
    if (b1 > 0.0) {
      std::normal_distribution<double> stationary(a.beta0, b1 / std::sqrt(2.0 * a.alpha));
      lv = stationary(path_rng_[i]);
    }
    log_vol_[static_cast<Eigen::Index>(i)] = lv;
  }
}

std::vector<std::string> Simulator::asset_ids() const {
  std::vector<std::string> ids;
  for (const auto& a : params_) ids.push_back(a.asset_id);
  return ids;
}

DayPaths Simulator::next_day() {
  const int spd = cfg_.seconds_per_day;
  const auto p = static_cast<Eigen::Index>(params_.size());
  const double dt = 1.0 / (cfg_.days_per_unit * spd);
  const double sdt = std::sqrt(dt);

  std::vector<double> dw(static_cast<std::size_t>(spd));
  {
    std::normal_distribution<double> n01;
    for (auto& v : dw) v = sdt * n01(common_rng_);
  }

  DayPaths day;
  day.day_index = day_;
  day.open = x_;
  Eigen::MatrixXd latent(spd + 1, p);
  Eigen::MatrixXd log_vol;
  if (cfg_.keep_grid) log_vol.resize(spd + 1, p);
  day.ticks.window_length_seconds = spd;
  day.ticks.series.resize(static_cast<std::size_t>(p));

  parallel_for(static_cast<std::size_t>(p), cfg_.workers, [&](std::size_t i) {
    const auto a = static_cast<Eigen::Index>(i);
    const auto& par = params_[i];
    auto& rng = path_rng_[i];
    std::normal_distribution<double> n01;
    const double load_w = std::sqrt(1.0 - par.rho * par.rho);
    const double rho2 = par.rho * par.rho;
    const double b1 = cfg_.vol_of_vol_scale * par.beta1 * sdt;
    double x = x_[a];
    double lv = log_vol_[a];
    double* col = latent.col(a).data();
    col[0] = x;
    if (cfg_.keep_grid) log_vol(0, a) = lv;
    for (int s = 0; s < spd; ++s) {
      const double sigma = std::exp(lv);
      const double idio = std::sqrt(rho2 * sigma * sigma + par.lambda) * sdt;
      x += par.mu * dt + load_w * sigma * dw[static_cast<std::size_t>(s)] + idio * n01(rng);
      lv += par.alpha * (par.beta0 - lv) * dt + b1 * n01(rng);
      col[s + 1] = x;
      if (cfg_.keep_grid) log_vol(s + 1, a) = lv;
    }
    x_[a] = x;
    log_vol_[a] = lv;

    auto& trng = tick_rng_[i];
    std::exponential_distribution<double> gap(par.trade_intensity / spd);
    std::normal_distribution<double> noise(0.0, 1.0);
    TickSeries& s = day.ticks.series[i];
    s.asset_id = par.asset_id;
    s.times.reserve(static_cast<std::size_t>(par.trade_intensity * 1.1) + 16);
    s.log_prices.reserve(s.times.capacity());
    const double res = cfg_.tick_time_resolution;
    for (double t = gap(trng); t < spd; t += gap(trng)) {
      const double tq = std::round(t / res) * res;
      const double e = noise(trng);
      if (tq <= 0.0 || tq >= spd || (!s.times.empty() && tq <= s.times.back())) continue;
      s.times.push_back(tq);
      s.log_prices.push_back(col[static_cast<std::size_t>(tq)] + cfg_.noise_std * e);
    }
  });

  day.close = x_;
  day.log_vol_close = log_vol_;
  const int step = cfg_.assessment_interval;
  day.assessment_grid.resize(spd / step + 1, p);
  for (int k = 0; k <= spd / step; ++k) day.assessment_grid.row(k) = latent.row(k * step);
  if (cfg_.daily_oracle) {
    day.oracle = estimate_matrix_synchronous(latent, asset_ids(), 1.0, CovMethod::LatentOracle,
                                             choose_two_scale_noiseless(latent.rows()));
    day.has_oracle = true;
  }
  if (cfg_.keep_grid) {
    day.latent = std::move(latent);
    day.log_vol = std::move(log_vol);
  }
  ++day_;
  return day;
}

std::vector<std::string> SimPaths::asset_ids() const {
  std::vector<std::string> ids;
  for (const auto& a : params) ids.push_back(a.asset_id);
  return ids;
}

SimPaths simulate(const std::vector<AssetParams>& params, std::size_t n_days, double noise_std,
                  std::uint64_t seed, SimConfig cfg) {
  if (n_days < 1) throw ArgumentError("simulate: n_days must be >= 1");
  cfg.noise_std = noise_std;
  cfg.keep_grid = true;
  Simulator sim(params, cfg, seed);
  SimPaths out;
  out.params = params;
  out.config = cfg;
  out.rng_seed = seed;
  out.days.reserve(n_days);
  for (std::size_t d = 0; d < n_days; ++d) out.days.push_back(sim.next_day());
  return out;
}

namespace {

void check_range(const SimPaths& paths, std::size_t first_day, std::size_t n_days) {
  if (n_days == 0) throw ArgumentError("empty day range");
  if (first_day + n_days > paths.n_days())
    throw ArgumentError("day range exceeds the simulated days");
  for (std::size_t d = first_day; d < first_day + n_days; ++d)
    if (paths.days[d].latent.size() == 0)
      throw ArgumentError("day " + std::to_string(d) + " has no retained latent grid");
}

}  // namespace

CovEstimate latent_oracle_cov(const SimPaths& paths, std::size_t first_day, std::size_t n_days) {
  check_range(paths, first_day, n_days);
  const int spd = paths.config.seconds_per_day;
  const auto p = static_cast<Eigen::Index>(paths.params.size());
  Eigen::MatrixXd grid(static_cast<Eigen::Index>(n_days) * spd + 1, p);
  grid.row(0) = paths.days[first_day].latent.row(0);
  for (std::size_t k = 0; k < n_days; ++k)
    grid.middleRows(static_cast<Eigen::Index>(k) * spd + 1, spd) =
        paths.days[first_day + k].latent.bottomRows(spd);
  return estimate_matrix_synchronous(grid, paths.asset_ids(), static_cast<double>(n_days),
                                     CovMethod::LatentOracle, choose_two_scale_noiseless(grid.rows()));
}

CovEstimate latent_oracle_cov(const DayPaths& day, const std::vector<std::string>& ids) {
  if (day.latent.size() == 0) throw ArgumentError("day has no retained latent grid");
  return estimate_matrix_synchronous(day.latent, ids, 1.0, CovMethod::LatentOracle,
                                     choose_two_scale_noiseless(day.latent.rows()));
}

Eigen::MatrixXd latent_window_returns(const SimPaths& paths, std::size_t first_day,
                                      std::size_t n_days, int interval_seconds) {
  const int spd = paths.config.seconds_per_day;
  if (interval_seconds < 1 || spd % interval_seconds != 0)
    throw ArgumentError("interval " + std::to_string(interval_seconds) + " s does not divide " +
                        std::to_string(spd) + " s");
  check_range(paths, first_day, n_days);
  const int per_day = spd / interval_seconds;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_days) * per_day,
                      static_cast<Eigen::Index>(paths.params.size()));
  for (std::size_t d = 0; d < n_days; ++d) {
    const auto& g = paths.days[first_day + d].latent;
    for (int k = 0; k < per_day; ++k)
      out.row(static_cast<Eigen::Index>(d) * per_day + k) =
          g.row((k + 1) * interval_seconds) - g.row(k * interval_seconds);
  }
  return out;
}

std::string latent_file_name(std::size_t day_index) {
  return "latent_D" + std::to_string(day_index) + ".csv";
}

void write_day_files(const std::filesystem::path& dir, const DayPaths& day,
                     const std::vector<std::string>& ids, int latent_stride) {
  std::filesystem::create_directories(dir);
  write_panel(dir / tick_file_name(day.day_index), day.ticks);
  if (day.latent.size() == 0) return;
  if (latent_stride < 1) throw ArgumentError("latent stride must be >= 1");
  std::ofstream out(dir / latent_file_name(day.day_index));
  if (!out) throw ArgumentError("cannot write latent file in " + dir.string());
  out << "time_s";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < day.latent.rows(); r += latent_stride) {
    out << r;
    for (Eigen::Index c = 0; c < day.latent.cols(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.12g", day.latent(r, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw ArgumentError("write failed in " + dir.string());
}

void write_sim_params(const std::filesystem::path& dir, const std::vector<AssetParams>& params,
                      const SimConfig& cfg, std::uint64_t seed, std::size_t n_days) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "params.csv");
    out << "asset_id,mu,beta0,beta1,alpha,rho,lambda,trade_intensity\n";
    char buf[256];
    for (const auto& a : params) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    a.asset_id.c_str(), a.mu, a.beta0, a.beta1, a.alpha, a.rho, a.lambda,
                    a.trade_intensity);
      out << buf;
    }
    if (!out) throw ArgumentError("cannot write params.csv in " + dir.string());
  }
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["n_days"] = n_days;
  j["p"] = params.size();
  j["seconds_per_day"] = cfg.seconds_per_day;
  j["days_per_unit"] = cfg.days_per_unit;
  j["vol_of_vol_scale"] = cfg.vol_of_vol_scale;
  j["noise_std"] = cfg.noise_std;
  j["tick_time_resolution"] = cfg.tick_time_resolution;
  j["rng"] = "mt19937_64 streams seeded by splitmix64";
  std::ofstream out(dir / "sim.json");
  out << j.dump(2) << '\n';
}

std::vector<AssetParams> read_sim_params(const std::filesystem::path& params_csv) {
  std::ifstream in(params_csv);
  if (!in) throw ArgumentError("cannot open " + params_csv.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line.rfind("asset_id,mu,beta0,beta1,alpha,rho,lambda,trade_intensity", 0) != 0)
    throw ParseError("unexpected params header", line_no);
  std::vector<AssetParams> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 8) throw ParseError("expected 8 fields", line_no);
    AssetParams a;
    a.asset_id = fields[0];
    try {
      a.mu = std::stod(fields[1]);
      a.beta0 = std::stod(fields[2]);
      a.beta1 = std::stod(fields[3]);
      a.alpha = std::stod(fields[4]);
      a.rho = std::stod(fields[5]);
      a.lambda = std::stod(fields[6]);
      a.trade_intensity = std::stod(fields[7]);
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", line_no);
    }
    out.push_back(a);
  }
  validate_params(out);
  return out;
}

}  // namespace hfcov

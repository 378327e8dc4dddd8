#include "hfcov/cov_estimate.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hfcov/error.hpp"

namespace hfcov {

std::string to_string(CovMethod m) {
  switch (m) {
    case CovMethod::PairwiseTSCV: return "pairwise-tscv";
    case CovMethod::AllRefreshTSCV: return "all-refresh-tscv";
    case CovMethod::AllRefreshRK: return "all-refresh-rk";
    case CovMethod::LowFreqSample: return "lowfreq-sample";
    case CovMethod::LatentOracle: return "latent-oracle";
  }
  return "unknown";
}

CovMethod cov_method_from_string(const std::string& s) {
  for (auto m : {CovMethod::PairwiseTSCV, CovMethod::AllRefreshTSCV, CovMethod::AllRefreshRK,
                 CovMethod::LowFreqSample, CovMethod::LatentOracle})
    if (to_string(m) == s) return m;
  throw ArgumentError("unknown covariance method '" + s + "'");
}

namespace {

std::filesystem::path sidecar(const std::filesystem::path& matrix_path, const char* suffix) {
  auto out = matrix_path;
  out.replace_extension();
  out += suffix;
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  return out;
}

}  // namespace

void write_labelled_matrix(const std::filesystem::path& path, const std::vector<std::string>& ids,
                           const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  for (std::size_t j = 0; j < ids.size(); ++j) out << (j ? "," : "") << ids[j];
  out << '\n';
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_labelled_matrix(const std::filesystem::path& path, std::vector<std::string>* ids) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + " is empty");
  const auto header = split_csv(line);
  const auto p = static_cast<Eigen::Index>(header.size());
  Eigen::MatrixXd m(p, p);
  Eigen::Index row = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (static_cast<Eigen::Index>(fields.size()) != p || row >= p)
      throw ParseError("matrix row has wrong shape", line_no);
    for (Eigen::Index j = 0; j < p; ++j) {
      try {
        std::size_t used = 0;
        m(row, j) = std::stod(fields[static_cast<std::size_t>(j)], &used);
      } catch (const std::exception&) {
        throw ParseError("not a number: " + fields[static_cast<std::size_t>(j)], line_no);
      }
    }
    ++row;
  }
  if (row != p) throw ValidationError(path.string() + ": expected " + std::to_string(p) + " rows");
  if (ids) *ids = header;
  return m;
}

void write_cov(const std::filesystem::path& matrix_path, const CovEstimate& est) {
  write_labelled_matrix(matrix_path, est.asset_ids, est.matrix);
  const auto counts_path = sidecar(matrix_path, ".counts.csv");
  write_labelled_matrix(counts_path, est.asset_ids, est.pair_counts.cast<double>());

  nlohmann::ordered_json meta;
  meta["method"] = to_string(est.method);
  meta["p"] = est.p();
  meta["window_days"] = est.window_days;
  meta["n_min"] = est.n_min;
  meta["pair_counts"] = counts_path.filename().string();
  meta["projections"] = est.projections;
  auto rejected = nlohmann::ordered_json::array();
  for (const auto& r : est.rejections)
    rejected.push_back({{"asset_a", r.asset_a}, {"asset_b", r.asset_b},
                        {"n_refresh", r.n_refresh}, {"reason", r.reason}});
  meta["rejections"] = rejected;
  std::ofstream out(sidecar(matrix_path, ".meta.json"));
  if (!out) throw ArgumentError("cannot write metadata for " + matrix_path.string());
  out << meta.dump(2) << '\n';
}

CovEstimate read_cov(const std::filesystem::path& matrix_path) {
  CovEstimate est;
  est.matrix = read_labelled_matrix(matrix_path, &est.asset_ids);
  const auto meta_path = sidecar(matrix_path, ".meta.json");
  std::ifstream in(meta_path);
  if (!in) {
    // A bare matrix file is accepted; metadata falls back to defaults.
    est.pair_counts = Eigen::MatrixXi::Zero(est.p(), est.p());
    return est;
  }
  nlohmann::json meta;
  try {
    in >> meta;
    est.method = cov_method_from_string(meta.at("method").get<std::string>());
    est.window_days = meta.at("window_days").get<double>();
    est.n_min = meta.at("n_min").get<long>();
    est.projections = meta.value("projections", std::vector<std::string>{});
    for (const auto& r : meta.value("rejections", nlohmann::json::array()))
      est.rejections.push_back({r.at("asset_a"), r.at("asset_b"), r.at("n_refresh"), r.at("reason")});
    const auto counts_path = matrix_path.parent_path() / meta.at("pair_counts").get<std::string>();
    est.pair_counts = read_labelled_matrix(counts_path).cast<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad metadata in " + meta_path.string() + ": " + e.what());
  }
  return est;
}

}  // namespace hfcov

#include "hfcov/tickdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hfcov/error.hpp"

namespace hfcov {

std::vector<std::string> TickPanel::asset_ids() const {
  std::vector<std::string> ids;
  ids.reserve(series.size());
  for (const auto& s : series) ids.push_back(s.asset_id);
  return ids;
}

std::size_t TickPanel::find(const std::string& asset_id) const {
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i].asset_id == asset_id) return i;
  return series.size();
}

std::vector<std::string> TickPanel::empty_assets() const {
  std::vector<std::string> out;
  for (const auto& s : series)
    if (s.empty()) out.push_back(s.asset_id);
  return out;
}

void validate_series(const TickSeries& s, double window_length, bool allow_empty) {
  if (s.times.size() != s.log_prices.size())
    throw ValidationError("asset " + s.asset_id + ": times and prices differ in length");
  if (s.empty()) {
    if (allow_empty) return;
    throw ValidationError("asset " + s.asset_id + ": no ticks");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.times[i];
    if (!std::isfinite(t) || t < 0.0 || t > window_length)
      throw ValidationError("asset " + s.asset_id + ": timestamp outside [0, window]");
    if (!std::isfinite(s.log_prices[i]))
      throw ValidationError("asset " + s.asset_id + ": non-finite log-price");
    if (i > 0 && !(s.times[i] > s.times[i - 1]))
      throw ValidationError("asset " + s.asset_id + ": timestamps not strictly increasing");
  }
}

void validate_panel(const TickPanel& panel, bool allow_empty) {
  if (!(panel.window_length_seconds > 0.0))
    throw ValidationError("window length must be positive");
  if (panel.series.empty()) throw ValidationError("panel has no assets");
  std::vector<std::string> ids = panel.asset_ids();
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw ValidationError("duplicate asset_id in panel");
  for (const auto& s : panel.series) validate_series(s, panel.window_length_seconds, allow_empty);
}

namespace {

std::string_view trim(std::string_view v) {
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r')) v.remove_suffix(1);
  return v;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("not a number: '" + std::string(field) + "'", line);
  return value;
}

}  // namespace

TickPanel load_panel(const std::filesystem::path& path, double window_length) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open tick file " + path.string());

  TickPanel panel;
  panel.window_length_seconds = window_length;
  std::unordered_map<std::string, std::size_t> index;

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (view != "asset_id,time_s,log_price")
        throw ParseError("expected header asset_id,time_s,log_price", line_no);
      continue;
    }
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos)
      throw ParseError("expected 3 comma-separated fields", line_no);
    const std::string id(trim(view.substr(0, c1)));
    if (id.empty()) throw ParseError("empty asset_id", line_no);
    const double t = parse_double(view.substr(c1 + 1, c2 - c1 - 1), line_no);
    const double x = parse_double(view.substr(c2 + 1), line_no);

    auto [it, inserted] = index.try_emplace(id, panel.series.size());
    if (inserted) panel.series.push_back(TickSeries{id, {}, {}});
    auto& s = panel.series[it->second];
    s.times.push_back(t);
    s.log_prices.push_back(x);
  }
  if (panel.series.empty()) throw ValidationError("tick file " + path.string() + " has no rows");

  for (auto& s : panel.series) {
    if (std::is_sorted(s.times.begin(), s.times.end())) continue;
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.times[a] < s.times[b]; });
    TickSeries sorted{s.asset_id, {}, {}};
    sorted.times.reserve(s.size());
    sorted.log_prices.reserve(s.size());
    for (auto k : order) {
      sorted.times.push_back(s.times[k]);
      sorted.log_prices.push_back(s.log_prices[k]);
    }
    s = std::move(sorted);
  }
  for (const auto& s : panel.series)
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s.times[i] == s.times[i - 1])
        throw ValidationError("asset " + s.asset_id + ": duplicate timestamp " +
                              std::to_string(s.times[i]));
  validate_panel(panel);
  return panel;
}

void write_panel(const std::filesystem::path& path, const TickPanel& panel) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write tick file " + path.string());
  out << "asset_id,time_s,log_price\n";
  char buf[96];
  for (const auto& s : panel.series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const int n = std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g\n", s.asset_id.c_str(),
                                  s.times[i], s.log_prices[i]);
      out.write(buf, n);
    }
  }
  if (!out) throw ArgumentError("write failed for " + path.string());
}

TickPanel slice_window(const TickPanel& panel, double start, double end) {
  if (!(start < end)) throw ArgumentError("slice_window: start must be < end");
  if (start < 0.0 || end > panel.window_length_seconds)
    throw ArgumentError("slice_window: interval outside the panel window");
  TickPanel out;
  out.window_length_seconds = end - start;
  out.series.reserve(panel.series.size());
  for (const auto& s : panel.series) {
    TickSeries sliced{s.asset_id, {}, {}};
    auto lo = std::upper_bound(s.times.begin(), s.times.end(), start);
    auto hi = std::upper_bound(s.times.begin(), s.times.end(), end);
    const auto first = static_cast<std::size_t>(lo - s.times.begin());
    const auto last = static_cast<std::size_t>(hi - s.times.begin());
    sliced.times.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) {
      sliced.times.push_back(s.times[i] - start);
      sliced.log_prices.push_back(s.log_prices[i]);
    }
    out.series.push_back(std::move(sliced));
  }
  return out;
}

TickPanel concat_panels(std::span<const TickPanel> days) {
  if (days.empty()) throw ArgumentError("concat_panels: no days");
  TickPanel out;
  out.series.reserve(days.front().num_assets());
  for (const auto& s : days.front().series) out.series.push_back(TickSeries{s.asset_id, {}, {}});
  double offset = 0.0;
  for (const auto& day : days) {
    if (day.num_assets() != out.num_assets())
      throw ArgumentError("concat_panels: asset sets differ between days");
    for (std::size_t a = 0; a < day.num_assets(); ++a) {
      const auto& src = day.series[a];
      auto& dst = out.series[a];
      if (src.asset_id != dst.asset_id)
        throw ArgumentError("concat_panels: asset order differs between days");
      dst.times.reserve(dst.times.size() + src.size());
      for (std::size_t i = 0; i < src.size(); ++i) {
        dst.times.push_back(src.times[i] + offset);
        dst.log_prices.push_back(src.log_prices[i]);
      }
    }
    offset += day.window_length_seconds;
  }
  out.window_length_seconds = offset;
  return out;
}

std::string tick_file_name(std::size_t day_index) {
  return "ticks_D" + std::to_string(day_index) + ".csv";
}

}  // namespace hfcov

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hfcov {

/// One asset's observed log-prices inside a window. Times are seconds
/// from the window start; a series is empty only inside a sliced panel.
struct TickSeries {
  std::string asset_id;
  std::vector<double> times;
  std::vector<double> log_prices;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

struct TickPanel {
  double window_length_seconds = 0.0;
  std::vector<TickSeries> series;

  std::size_t num_assets() const noexcept { return series.size(); }
  std::vector<std::string> asset_ids() const;
  /// Index of `asset_id`, or num_assets() when absent.
  std::size_t find(const std::string& asset_id) const;
  /// Assets that have no ticks (only possible after slicing).
  std::vector<std::string> empty_assets() const;
};

/// Throws ValidationError when a series breaks the ordering, finiteness or
/// window invariants. `allow_empty` admits zero-length series.
void validate_series(const TickSeries& s, double window_length, bool allow_empty = false);
void validate_panel(const TickPanel& panel, bool allow_empty = false);

/// Reads a `asset_id,time_s,log_price` CSV. Assets keep the order of their
/// first appearance; each series is sorted by time.
TickPanel load_panel(const std::filesystem::path& path, double window_length);

/// Writes the panel in the same CSV layout (12 significant digits).
void write_panel(const std::filesystem::path& path, const TickPanel& panel);

/// Restricts to ticks in (start, end] and re-bases times to `start`.
TickPanel slice_window(const TickPanel& panel, double start, double end);

/// Joins consecutive day panels (same assets, same order) into one panel,
/// offsetting day k's times by the total length of the preceding days.
TickPanel concat_panels(std::span<const TickPanel> days);

/// File name for day `index` of a multi-day tick set: ticks_D<index>.csv.
std::string tick_file_name(std::size_t day_index);

}  // namespace hfcov

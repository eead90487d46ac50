#pragma once

// Aggregates curve files across seeds. Files named "<variant>_seed<N>.csv"
// are grouped by <variant>.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stochq/serialization.hpp"

namespace stochq {

/// Trailing mean: out[t] = mean of xs[max(0, t-window+1) .. t].
std::vector<double> window_means(const std::vector<double>& xs, std::size_t window);

/// Group key of a curve file: the file stem up to "_seed", or the whole stem.
std::string curve_group(const std::filesystem::path& file);

struct MeanStd {
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single value.
  double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs);

struct VariantSummary {
  std::string variant;
  std::size_t files = 0;
  std::size_t window = 0;
  MeanStd final_cumulative_reward;
  /// Mean wall time per step, across seeds; absent when any file lacks timing.
  std::optional<MeanStd> step_ns;
  /// Across-seed mean of the window-smoothed reward, truncated to the
  /// shortest file.
  std::vector<double> smoothed_reward;
};

/// `window` 0 picks 100 for deep variants and 1000 otherwise. Throws
/// malformed_file (including an empty file list or an empty curve).
std::vector<VariantSummary> summarize(const std::vector<std::filesystem::path>& files,
                                      std::size_t window = 0);

/// Writes "summary.csv" and "<variant>_smoothed.csv" per group into `dir`;
/// returns the written paths.
std::vector<std::filesystem::path> write_summaries(const std::vector<VariantSummary>& summaries,
                                                   const std::filesystem::path& dir);

Json to_json(const VariantSummary& summary);

}  // namespace stochq

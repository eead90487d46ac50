#pragma once

// Wall-time scaling of action selection (and optionally whole training
// steps) against the action count n, for exact and stochastic maximization
// over the value network.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stochq/serialization.hpp"

namespace stochq {

struct BenchConfig {
  std::vector<std::size_t> n_list = {64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384};
  std::size_t repetitions = 30;
  /// Random-subset size; 0 means ceil(log2 n).
  std::size_t k = 0;
  std::vector<std::size_t> hidden = {64, 64};
  /// Also time full training steps of both deep variants on the pendulum.
  bool train_steps = false;
  /// Each repetition repeats the operation until this much time has passed
  /// and reports the per-operation mean.
  std::uint64_t min_rep_ns = 200000;
  std::uint64_t seed = 0;

  /// Throws invalid_config.
  void validate() const;
};

struct TimingStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Quartiles by linear interpolation between order statistics. Empty input
/// throws invalid_params.
TimingStats timing_stats(std::vector<double> samples);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct BenchRow {
  std::string series;
  std::size_t n = 0;
  TimingStats ns;
  /// Network evaluations per operation: largest observed and mean.
  std::uint64_t max_calls = 0;
  double mean_calls = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  /// Fitted log-log slope of the median per series.
  std::map<std::string, double> slopes;
};

inline constexpr const char* kStochasticSelection = "stochastic-selection";
inline constexpr const char* kExactSelection = "exact-selection";
inline constexpr const char* kStochasticTrainStep = "stochastic-train-step";
inline constexpr const char* kExactTrainStep = "exact-train-step";

BenchResult bench_stochmax(const BenchConfig& config);

/// Columns: series,n,median_ns,q1_ns,q3_ns,max_calls,mean_calls
void write_bench_csv(const BenchResult& result, const std::filesystem::path& path);
Json to_json(const BenchResult& result);

}  // namespace stochq

#pragma once

// Per-step metrics as CSV: one header line, one LF-terminated row per step.
// Absent optional values are empty fields. Numbers use the shortest text
// that round-trips exactly.

#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stochq/metrics.hpp"

namespace stochq {

inline constexpr std::string_view kCurveHeader =
    "step,episode,reward,cumulative_reward,epsilon,beta,omega,wall_time_ns,candidates";

std::string format_curve_row(const MetricsRecord& record);

/// Throws malformed_file.
MetricsRecord parse_curve_row(std::string_view line);

class CurveWriter {
 public:
  /// Truncates `path` and writes the header. Throws io.
  explicit CurveWriter(const std::filesystem::path& path);
  ~CurveWriter();
  CurveWriter(const CurveWriter&) = delete;
  CurveWriter& operator=(const CurveWriter&) = delete;

  void write(const MetricsRecord& record);
  /// Flushes and closes; throws io on a failed write.
  void close();

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::string line_;
};

/// Reads a whole curve file, checking the header, field counts and that the
/// step column increases. Throws io or malformed_file.
std::vector<MetricsRecord> read_curve_file(const std::filesystem::path& path);

}  // namespace stochq

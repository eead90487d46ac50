#include "stochq/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "stochq/config.hpp"
#include "stochq/curve_file.hpp"

namespace stochq {

std::vector<double> window_means(const std::vector<double>& xs, std::size_t window) {
  if (window == 0) throw Error(ErrorCode::invalid_params, "window must be positive");
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    sum += xs[t];
    if (t >= window) sum -= xs[t - window];
    out[t] = sum / static_cast<double>(std::min(t + 1, window));
  }
  return out;
}

std::string curve_group(const std::filesystem::path& file) {
  const std::string stem = file.stem().string();
  const auto pos = stem.rfind("_seed");
  return pos == std::string::npos ? stem : stem.substr(0, pos);
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

std::vector<VariantSummary> summarize(const std::vector<std::filesystem::path>& files, std::size_t window) {
  if (files.empty()) throw Error(ErrorCode::malformed_file, "no curve files to summarize");
  std::map<std::string, std::vector<std::filesystem::path>> groups;
  for (const auto& f : files) groups[curve_group(f)].push_back(f);

  std::vector<VariantSummary> out;
  for (const auto& [name, members] : groups) {
    VariantSummary s;
    s.variant = name;
    s.files = members.size();
    if (window != 0) {
      s.window = window;
    } else {
      bool deep = false;
      try {
        deep = is_deep(parse_variant(name));
      } catch (const Error&) {
      }
      s.window = deep ? 100 : 1000;
    }
    std::vector<double> finals;
    std::vector<double> times;
    bool timed = true;
    std::vector<std::vector<double>> smoothed;
    for (const auto& path : members) {
      const auto rows = read_curve_file(path);
      if (rows.empty()) throw Error(ErrorCode::malformed_file, path.string() + ": no data rows");
      finals.push_back(rows.back().cumulative_reward);
      double tsum = 0.0;
      std::vector<double> rewards;
      rewards.reserve(rows.size());
      for (const auto& r : rows) {
        rewards.push_back(r.reward);
        if (r.wall_time_ns) tsum += static_cast<double>(*r.wall_time_ns);
        else timed = false;
      }
      times.push_back(tsum / static_cast<double>(rows.size()));
      smoothed.push_back(window_means(rewards, s.window));
    }
    s.final_cumulative_reward = mean_std(finals);
    if (timed) s.step_ns = mean_std(times);
    std::size_t len = smoothed.front().size();
    for (const auto& v : smoothed) len = std::min(len, v.size());
    s.smoothed_reward.assign(len, 0.0);
    for (const auto& v : smoothed) {
      for (std::size_t t = 0; t < len; ++t) s.smoothed_reward[t] += v[t];
    }
    for (double& x : s.smoothed_reward) x /= static_cast<double>(smoothed.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::filesystem::path> write_summaries(const std::vector<VariantSummary>& summaries,
                                                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string());
  std::vector<std::filesystem::path> written;
  const auto table = dir / "summary.csv";
  std::ofstream out(table, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + table.string());
  out.precision(17);
  out << "variant,files,window,mean_final_cumulative_reward,std_final_cumulative_reward,mean_step_ns,std_step_ns\n";
  for (const auto& s : summaries) {
    out << s.variant << ',' << s.files << ',' << s.window << ',' << s.final_cumulative_reward.mean << ','
        << s.final_cumulative_reward.std_dev << ',';
    if (s.step_ns) out << s.step_ns->mean << ',' << s.step_ns->std_dev;
    else out << ',';
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "failed writing " + table.string());
  written.push_back(table);
  for (const auto& s : summaries) {
    const auto path = dir / (s.variant + "_smoothed.csv");
    std::ofstream series(path, std::ios::binary);
    if (!series) throw Error(ErrorCode::io, "cannot write " + path.string());
    series.precision(17);
    series << "step,smoothed_reward\n";
    for (std::size_t t = 0; t < s.smoothed_reward.size(); ++t) series << t << ',' << s.smoothed_reward[t] << '\n';
    if (!series) throw Error(ErrorCode::io, "failed writing " + path.string());
    written.push_back(path);
  }
  return written;
}

Json to_json(const VariantSummary& s) {
  Json j{{"variant", s.variant},
         {"files", s.files},
         {"window", s.window},
         {"final_cumulative_reward", {{"mean", s.final_cumulative_reward.mean},
                                      {"std", s.final_cumulative_reward.std_dev}}}};
  j["step_ns"] = s.step_ns ? Json{{"mean", s.step_ns->mean}, {"std", s.step_ns->std_dev}} : Json(nullptr);
  return j;
}

}  // namespace stochq

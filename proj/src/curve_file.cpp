#include "stochq/curve_file.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <system_error>

#include "stochq/errors.hpp"

namespace stochq {

namespace {

template <class T>
void append_number(std::string& out, T value) {
  std::array<char, 32> buf;
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), end);
}

template <class T>
T parse_number(std::string_view field, std::string_view name) {
  T value{};
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::malformed_file, "bad " + std::string(name) + " field '" + std::string(field) + "'");
  }
  return value;
}

template <class T>
std::optional<T> parse_optional(std::string_view field, std::string_view name) {
  if (field.empty()) return std::nullopt;
  return parse_number<T>(field, name);
}

}  // namespace

std::string format_curve_row(const MetricsRecord& r) {
  std::string out;
  out.reserve(96);
  append_number(out, r.step);
  out += ',';
  append_number(out, r.episode);
  out += ',';
  append_number(out, r.reward);
  out += ',';
  append_number(out, r.cumulative_reward);
  out += ',';
  append_number(out, r.epsilon);
  out += ',';
  if (r.beta) append_number(out, *r.beta);
  out += ',';
  if (r.omega) append_number(out, *r.omega);
  out += ',';
  if (r.wall_time_ns) append_number(out, *r.wall_time_ns);
  out += ',';
  append_number(out, r.candidates);
  return out;
}

MetricsRecord parse_curve_row(std::string_view line) {
  std::array<std::string_view, 9> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (count == fields.size()) throw Error(ErrorCode::malformed_file, "too many fields in curve row");
    fields[count++] = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != fields.size()) throw Error(ErrorCode::malformed_file, "curve row needs 9 fields");
  MetricsRecord r;
  r.step = parse_number<std::uint64_t>(fields[0], "step");
  r.episode = parse_number<std::uint64_t>(fields[1], "episode");
  r.reward = parse_number<double>(fields[2], "reward");
  r.cumulative_reward = parse_number<double>(fields[3], "cumulative_reward");
  r.epsilon = parse_number<double>(fields[4], "epsilon");
  r.beta = parse_optional<double>(fields[5], "beta");
  r.omega = parse_optional<double>(fields[6], "omega");
  r.wall_time_ns = parse_optional<std::uint64_t>(fields[7], "wall_time_ns");
  r.candidates = parse_number<std::size_t>(fields[8], "candidates");
  return r;
}

CurveWriter::CurveWriter(const std::filesystem::path& path) : path_(path) {
  file_ = std::fopen(path.c_str(), "wb");
  if (file_ == nullptr) throw Error(ErrorCode::io, "cannot write " + path.string());
  line_.assign(kCurveHeader);
  line_ += '\n';
  std::fputs(line_.c_str(), file_);
}

CurveWriter::~CurveWriter() {
  if (file_ != nullptr) std::fclose(file_);
}

void CurveWriter::write(const MetricsRecord& record) {
  if (file_ == nullptr) throw Error(ErrorCode::io, "write to a closed curve file");
  line_ = format_curve_row(record);
  line_ += '\n';
  std::fwrite(line_.data(), 1, line_.size(), file_);
}

void CurveWriter::close() {
  if (file_ == nullptr) return;
  const bool failed = std::ferror(file_) != 0;
  const bool close_failed = std::fclose(file_) != 0;
  file_ = nullptr;
  if (failed || close_failed) throw Error(ErrorCode::io, "failed writing " + path_.string());
}

std::vector<MetricsRecord> read_curve_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) {
    throw Error(ErrorCode::malformed_file, path.string() + ": missing or unexpected header");
  }
  std::vector<MetricsRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      rows.push_back(parse_curve_row(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::malformed_file,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (rows.size() > 1 && rows.back().step <= rows[rows.size() - 2].step) {
      throw Error(ErrorCode::malformed_file,
                  path.string() + ":" + std::to_string(line_no) + ": step column is not increasing");
    }
  }
  return rows;
}

}  // namespace stochq

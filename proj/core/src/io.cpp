#include "nmixprev/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nmixprev/errors.hpp"

namespace nmixprev {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

// Shortest representation that round-trips the exact double.
std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

ReportHistogram parse_histogram(std::istream& in) {
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line))
    throw ParseError("missing header", 1);
  ++line_no;
  if (strip_cr(line) != "reports,offenders")
    throw ParseError("expected header 'reports,offenders'", line_no);

  ReportHistogram hist;
  std::set<int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("expected 'reports,offenders' row", line_no);
    int reports = 0;
    std::int64_t offenders = 0;
    if (!parse_int(std::string_view(line).substr(0, comma), reports))
      throw ParseError("bad reports value '" + line.substr(0, comma) + "'",
                       line_no);
    if (!parse_int(std::string_view(line).substr(comma + 1), offenders))
      throw ParseError("bad offenders value '" + line.substr(comma + 1) + "'",
                       line_no);
    if (reports == 0)
      throw DomainError(
          "reports value 0 at line " + std::to_string(line_no) +
          ": observed data is conditioned on at least one report");
    if (reports < 0)
      throw ParseError("reports value must be positive", line_no);
    if (offenders < 0)
      throw ParseError("offenders value must be nonnegative", line_no);
    if (!seen.insert(reports).second)
      throw ParseError("duplicate reports value " + std::to_string(reports),
                       line_no);
    hist.add(reports, offenders);
  }
  if (hist.empty())
    throw InsufficientDataError("histogram has zero reported offenders");
  return hist;
}

ReportHistogram parse_histogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  return parse_histogram(in);
}

void write_histogram_csv(std::ostream& out, const ReportHistogram& hist) {
  out << "reports,offenders\n";
  for (const auto& [reports, offenders] : hist.counts())
    out << reports << ',' << offenders << '\n';
}

std::string histogram_to_csv(const ReportHistogram& hist) {
  std::ostringstream out;
  write_histogram_csv(out, hist);
  return out.str();
}

std::vector<LogLogPoint> loglog_points(const ReportHistogram& hist) {
  std::vector<LogLogPoint> points;
  points.reserve(hist.counts().size());
  for (const auto& [reports, offenders] : hist.counts())
    points.push_back({std::log(static_cast<double>(reports)),
                      std::log(static_cast<double>(offenders))});
  return points;
}

std::string loglog_points_to_csv(const std::vector<LogLogPoint>& points) {
  std::ostringstream out;
  out << "log_value,log_count\n";
  for (const auto& point : points)
    out << format_double(point.log_value) << ','
        << format_double(point.log_count) << '\n';
  return out.str();
}

std::string study_to_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream out;
  out << "s_true,p_true,replica,s_hat,p_hat,nmax_hat,o_ratio,t_ratio,"
         "converged\n";
  for (const auto& row : rows) {
    out << format_double(row.s_true) << ',' << format_double(row.p_true)
        << ',' << row.replica << ',' << format_double(row.s_hat) << ','
        << format_double(row.p_hat) << ',' << row.n_max_hat << ','
        << format_double(row.o_ratio) << ',' << format_double(row.t_ratio)
        << ',' << (row.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void atomic_write_file(const std::filesystem::path& path,
                       std::string_view contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write " + tmp.string());
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    if (!out) throw FileError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace nmixprev

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nmixprev/genprocess.hpp"
#include "nmixprev/histogram.hpp"

namespace nmixprev {

// Histogram CSV: header `reports,offenders`, UTF-8, LF newlines, reports
// strictly positive integers, offenders nonnegative, duplicate report
// values forbidden. A reports value of 0 is a DomainError (the observed
// data is zero-truncated by definition); other malformed input is a
// ParseError carrying the line number; an all-zero file is an
// InsufficientDataError.
ReportHistogram parse_histogram(std::istream& in);
ReportHistogram parse_histogram(const std::filesystem::path& path);

void write_histogram_csv(std::ostream& out, const ReportHistogram& hist);
std::string histogram_to_csv(const ReportHistogram& hist);

struct LogLogPoint {
  double log_value = 0.0;
  double log_count = 0.0;
};

// Natural-log plot points for bins with count > 0.
std::vector<LogLogPoint> loglog_points(const ReportHistogram& hist);
std::string loglog_points_to_csv(const std::vector<LogLogPoint>& points);

// Header: s_true,p_true,replica,s_hat,p_hat,nmax_hat,o_ratio,t_ratio,converged
std::string study_to_csv(const std::vector<StudyRow>& rows);

std::string read_file(const std::filesystem::path& path);

// Write via temp file + rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view contents);

// FNV-1a 64-bit digest, as 16 hex digits. Provenance marker for manifests,
// not an integrity check.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace nmixprev

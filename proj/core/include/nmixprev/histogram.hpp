#pragma once

#include <cstdint>
#include <map>

#include "nmixprev/errors.hpp"

namespace nmixprev {

// Observed report counts: bin i holds the number of offenders reported
// exactly i times. The data is zero-truncated by construction (an offender
// nobody reported is never observed), so i >= 1 always. M and R are derived
// and kept consistent with the bins at all times.
class ReportHistogram {
 public:
  ReportHistogram() = default;

  static ReportHistogram from_counts(
      const std::map<int, std::int64_t>& counts) {
    ReportHistogram h;
    for (const auto& [reports, offenders] : counts)
      h.add(reports, offenders);
    return h;
  }

  // Throws DomainError for reports < 1 or offenders < 0. Zero-offender bins
  // are accepted and ignored.
  void add(int reports, std::int64_t offenders = 1) {
    if (reports < 1)
      throw DomainError("ReportHistogram: report count must be >= 1");
    if (offenders < 0)
      throw DomainError("ReportHistogram: offender count must be >= 0");
    if (offenders == 0) return;
    counts_[reports] += offenders;
    r_ += offenders;
    if (reports > m_) m_ = reports;
  }

  const std::map<int, std::int64_t>& counts() const { return counts_; }

  // Largest observed report count (0 when empty).
  int m() const { return m_; }

  // Total distinct reported offenders.
  std::int64_t r() const { return r_; }

  bool empty() const { return r_ == 0; }

  bool operator==(const ReportHistogram&) const = default;

 private:
  std::map<int, std::int64_t> counts_;
  int m_ = 0;
  std::int64_t r_ = 0;
};

}  // namespace nmixprev

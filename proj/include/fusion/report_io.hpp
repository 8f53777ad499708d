#pragma once

#include <iosfwd>
#include <string>

#include "fusion/model.hpp"

namespace fusion {

/// Reads the plain-text report format: one line per state slot, each holding
/// n space-separated 0/1 digits. Blank lines are ignored. Throws ConfigError.
ReportMatrix read_report_matrix(std::istream& in);
ReportMatrix load_report_matrix(const std::string& path);

void write_report_matrix(std::ostream& out, const ReportMatrix& r);

}  // namespace fusion

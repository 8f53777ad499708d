#include "fusion/report_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fusion {

ReportMatrix read_report_matrix(std::istream& in) {
  std::vector<Bit> data;
  int rows = 0;
  int cols = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tok;
    int count = 0;
    while (fields >> tok) {
      if (tok != "0" && tok != "1") {
        throw ConfigError("line " + std::to_string(line_no) + ": expected 0 or 1, got '" + tok +
                          "'");
      }
      data.push_back(static_cast<Bit>(tok[0] - '0'));
      ++count;
    }
    if (count == 0) continue;
    if (cols >= 0 && count != cols) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(cols) + " reports, got " + std::to_string(count));
    }
    cols = count;
    ++rows;
  }
  if (rows == 0) throw ConfigError("report matrix is empty");
  return ReportMatrix(rows, cols, std::move(data));
}

ReportMatrix load_report_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open report matrix '" + path + "'");
  return read_report_matrix(in);
}

void write_report_matrix(std::ostream& out, const ReportMatrix& r) {
  for (int i = 0; i < r.rows(); ++i) {
    for (int j = 0; j < r.cols(); ++j) {
      if (j) out << ' ';
      out << static_cast<int>(r(i, j));
    }
    out << '\n';
  }
}

}  // namespace fusion

#include "infhs/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace infhs::io {

namespace {

std::vector<double> parse_row(const std::string& line, const std::string& path,
                              std::size_t lineno) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string field = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    const char* begin = field.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0')) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": not a number: '" + field + "'");
    }
    out.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Mat read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(parse_row(line, path, lineno));
    if (rows.size() > 1 && rows.back().size() != rows.front().size()) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": ragged row (expected " +
                       std::to_string(rows.front().size()) + " fields, got " +
                       std::to_string(rows.back().size()) + ")");
    }
  }
  if (rows.empty()) throw ParseError(path + ": empty file");
  Mat m(static_cast<Eigen::Index>(rows.size()),
        static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Vec read_csv_vector(const std::string& path) {
  Mat m = read_csv_matrix(path);
  if (m.cols() != 1) {
    throw ParseError(path + ": expected a single column, got " +
                     std::to_string(m.cols()));
  }
  return m.col(0);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv_matrix(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line += ',';
      line += format_double(m(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed for " + path);
}

void write_csv_vector(const std::string& path, const Vec& v) {
  write_csv_matrix(path, v);
}

}  // namespace infhs::io

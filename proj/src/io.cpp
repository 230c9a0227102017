#include "metricforge/io.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "metricforge/errors.hpp"

namespace metricforge {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& name, int line_no, const std::string& what) {
  std::ostringstream os;
  os << name << ":" << line_no << ": " << what;
  throw InputError(os.str());
}

double parse_double(const std::string& field, const std::string& name, int line_no) {
  const std::string t = trim(field);
  if (t.empty()) fail(name, line_no, "empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    fail(name, line_no, "cannot parse '" + t + "' as a number");
  }
  return v;
}

long parse_int(const std::string& field, const std::string& name, int line_no) {
  const std::string t = trim(field);
  if (t.empty()) fail(name, line_no, "empty integer field");
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    fail(name, line_no, "cannot parse '" + t + "' as an integer");
  }
  return v;
}

bool read_logical_line(std::istream& in, std::string& line, int& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace

PointCloud PointsFile::to_cloud() const {
  PointCloud cloud;
  cloud.points = points;
  if (!labels.empty()) cloud.labels = labels;
  return cloud;
}

PointsFile read_points_csv(std::istream& in, const std::string& name) {
  PointsFile file;
  std::string line;
  int line_no = 0;

  if (!read_logical_line(in, line, line_no)) {
    throw InputError(name + ": missing header row");
  }
  for (const std::string& col : split_csv_line(line)) file.columns.push_back(trim(col));
  // A legitimate header names its columns; a first line of pure numbers is a
  // headerless file, and accepting it would silently drop the first point.
  bool all_numeric = !file.columns.empty();
  for (const std::string& col : file.columns) {
    char* end = nullptr;
    std::strtod(col.c_str(), &end);
    all_numeric = all_numeric && !col.empty() && end == col.c_str() + col.size();
  }
  if (all_numeric) {
    fail(name, line_no,
         "header looks like a data row (all fields numeric); expected column "
         "names like x1,x2[,class]");
  }
  const bool has_class = !file.columns.empty() && file.columns.back() == "class";
  const int ncols = static_cast<int>(file.columns.size());
  const int ell = has_class ? ncols - 1 : ncols;
  if (ell < 1) fail(name, line_no, "need at least one coordinate column");

  std::vector<std::vector<double>> rows;
  while (read_logical_line(in, line, line_no)) {
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != ncols) {
      std::ostringstream os;
      os << "expected " << ncols << " fields, found " << fields.size();
      fail(name, line_no, os.str());
    }
    std::vector<double> row(ell);
    for (int c = 0; c < ell; ++c) row[c] = parse_double(fields[c], name, line_no);
    rows.push_back(std::move(row));
    if (has_class) {
      file.labels.push_back(static_cast<int>(parse_int(fields[ell], name, line_no)));
    }
  }
  if (rows.empty()) throw InputError(name + ": no data rows");

  file.points.resize(static_cast<int>(rows.size()), ell);
  for (int r = 0; r < file.points.rows(); ++r)
    for (int c = 0; c < ell; ++c) file.points(r, c) = rows[r][c];
  return file;
}

PointsFile read_points_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_points_csv(in, path);
}

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points,
                      const std::vector<int>* labels) {
  if (labels && static_cast<Eigen::Index>(labels->size()) != points.rows()) {
    throw DimensionError("write_points_csv: one label per row required");
  }
  for (int c = 0; c < points.cols(); ++c) {
    if (c) out << ',';
    out << 'x' << (c + 1);
  }
  if (labels) out << ",class";
  out << '\n';
  for (int r = 0; r < points.rows(); ++r) {
    for (int c = 0; c < points.cols(); ++c) {
      if (c) out << ',';
      out << format_double(points(r, c));
    }
    if (labels) out << ',' << (*labels)[r];
    out << '\n';
  }
}

void write_points_csv_file(const std::string& path, const Eigen::MatrixXd& points,
                           const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  write_points_csv(out, points, labels);
}

DistanceSpec read_distance_csv(std::istream& in, const std::string& name, int m) {
  std::string line;
  int line_no = 0;
  if (!read_logical_line(in, line, line_no)) {
    throw InputError(name + ": missing header row");
  }
  {
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() != 3 || trim(header[0]) != "i" || trim(header[1]) != "j" ||
        trim(header[2]) != "delta") {
      fail(name, line_no, "expected header 'i,j,delta'");
    }
  }

  std::vector<DistanceSpec::Entry> entries;
  while (read_logical_line(in, line, line_no)) {
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 3) fail(name, line_no, "expected 3 fields 'i,j,delta'");
    const long i = parse_int(fields[0], name, line_no);
    const long j = parse_int(fields[1], name, line_no);
    const double delta = parse_double(fields[2], name, line_no);
    if (i < 1 || j < 1 || i > m || j > m) {
      std::ostringstream os;
      os << "indices must lie in 1.." << m << "; got (" << i << "," << j << ")";
      fail(name, line_no, os.str());
    }
    if (i >= j) fail(name, line_no, "rows must satisfy i < j");
    entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), delta});
  }
  return DistanceSpec::from_entries(m, entries);
}

DistanceSpec read_distance_csv_file(const std::string& path, int m) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return read_distance_csv(in, path, m);
}

void write_distance_csv(std::ostream& out, const DistanceSpec& spec) {
  out << "i,j,delta\n";
  const auto pairs = pair_order(spec.point_count());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out << (pairs[k].first + 1) << ',' << (pairs[k].second + 1) << ','
        << format_double(spec.values()[k]) << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_matrix_csv_file(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path + " for writing");
  write_matrix_csv(out, m);
}

}  // namespace metricforge

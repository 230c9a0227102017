#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "metricforge/embedding.hpp"

namespace metricforge {

// 17 significant digits: parses back to the identical double.
std::string format_double(double v);

// Points CSV: header row required; all columns numeric except an optional
// final column named "class" holding integer labels.
struct PointsFile {
  Eigen::MatrixXd points;
  std::vector<int> labels;  // empty when no class column
  std::vector<std::string> columns;

  PointCloud to_cloud() const;
};

PointsFile read_points_csv(std::istream& in, const std::string& name);
PointsFile read_points_csv_file(const std::string& path);

void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points,
                      const std::vector<int>* labels);
void write_points_csv_file(const std::string& path, const Eigen::MatrixXd& points,
                           const std::vector<int>* labels);

// Distance CSV: header "i,j,delta", then 1-based triples with i < j.
// Completeness against the point count is enforced; missing pairs are listed
// 1-based in the error.
DistanceSpec read_distance_csv(std::istream& in, const std::string& name, int m);
DistanceSpec read_distance_csv_file(const std::string& path, int m);

void write_distance_csv(std::ostream& out, const DistanceSpec& spec);

// Row-major CSV, no header.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
void write_matrix_csv_file(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace metricforge

#pragma once

#include <string>

#include <Eigen/Dense>

namespace sbmor {

/// Dense reader for Matrix Market files: array and coordinate formats,
/// real field, general / symmetric / skew-symmetric storage.
Eigen::MatrixXd read_matrix_market(const std::string& filename);

/// Writes in array format, real general, full precision.
void write_matrix_market(const Eigen::MatrixXd& M, const std::string& filename);

} // namespace sbmor

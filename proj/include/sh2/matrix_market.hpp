#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace sh2 {

// Matrix Market exchange format, real matrices only. Coordinate files may be
// `general` or `symmetric`; array files are dense column-major.
Eigen::SparseMatrix<double> read_matrix_market_sparse(const std::string& path);
Eigen::MatrixXd read_matrix_market_dense(const std::string& path);

void write_matrix_market(const Eigen::SparseMatrix<double>& m, const std::string& path);
void write_matrix_market(const Eigen::MatrixXd& m, const std::string& path);

}  // namespace sh2

#pragma once

#include <Eigen/Dense>

namespace xfg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// max_i sum_j |a_ij|
double inf_norm(const Matrix& a);

/// Inverse of a square matrix of order <= 3 by cofactors over the determinant.
/// Throws ArgumentError for larger orders or an exactly zero determinant.
Matrix cramer_inverse(const Matrix& a);

/// Inverse by Gauss-Jordan elimination with partial pivoting.
/// Throws ArgumentError on a zero pivot.
Matrix elimination_inverse(const Matrix& a);

/// Smallest eigenvalue of the symmetric part of a square matrix.
double min_symmetric_eigenvalue(const Matrix& a);

/// Singular values of a (descending).
Vector singular_values(const Matrix& a);

/// 2-norm condition number of a square matrix (infinity if singular).
double condition_number(const Matrix& a);

}  // namespace xfg

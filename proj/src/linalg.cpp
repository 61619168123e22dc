#include "xfg/linalg.hpp"

#include <cmath>
#include <limits>

#include "xfg/errors.hpp"

namespace xfg {

double inf_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

Matrix cramer_inverse(const Matrix& a) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m) throw ArgumentError("cramer_inverse: matrix is not square");
  if (m > 3 || m == 0) throw ArgumentError("cramer_inverse: order must be 1, 2 or 3");

  Matrix inv(m, m);
  if (m == 1) {
    if (a(0, 0) == 0.0) throw ArgumentError("cramer_inverse: singular matrix");
    inv(0, 0) = 1.0 / a(0, 0);
    return inv;
  }
  if (m == 2) {
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    if (det == 0.0) throw ArgumentError("cramer_inverse: singular matrix");
    inv(0, 0) = a(1, 1) / det;
    inv(0, 1) = -a(0, 1) / det;
    inv(1, 0) = -a(1, 0) / det;
    inv(1, 1) = a(0, 0) / det;
    return inv;
  }

  // Adjugate: inv(i, j) = (-1)^(i+j) det(minor(j, i)) / det
  Matrix cof(3, 3);
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3;
    const int i2 = (i + 2) % 3;
    for (int j = 0; j < 3; ++j) {
      const int j1 = (j + 1) % 3;
      const int j2 = (j + 2) % 3;
      // Cyclic index choice absorbs the (-1)^(i+j) sign.
      cof(i, j) = a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
    }
  }
  const double det = a(0, 0) * cof(0, 0) + a(0, 1) * cof(0, 1) + a(0, 2) * cof(0, 2);
  if (det == 0.0) throw ArgumentError("cramer_inverse: singular matrix");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) inv(i, j) = cof(j, i) / det;
  return inv;
}

Matrix elimination_inverse(const Matrix& a) {
  const Eigen::Index m = a.rows();
  if (a.cols() != m) throw ArgumentError("elimination_inverse: matrix is not square");
  Matrix work = a;
  Matrix inv = Matrix::Identity(m, m);
  for (Eigen::Index col = 0; col < m; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < m; ++r)
      if (std::fabs(work(r, col)) > std::fabs(work(pivot, col))) pivot = r;
    if (work(pivot, col) == 0.0) throw ArgumentError("elimination_inverse: singular matrix");
    if (pivot != col) {
      work.row(pivot).swap(work.row(col));
      inv.row(pivot).swap(inv.row(col));
    }
    const double p = work(col, col);
    work.row(col) /= p;
    inv.row(col) /= p;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (r == col) continue;
      const double factor = work(r, col);
      if (factor == 0.0) continue;
      work.row(r) -= factor * work.row(col);
      inv.row(r) -= factor * inv.row(col);
    }
  }
  return inv;
}

double min_symmetric_eigenvalue(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

double condition_number(const Matrix& a) {
  const Vector s = singular_values(a);
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

}  // namespace xfg

#pragma once

// Pointwise linear algebra of a family X = (X_1, ..., X_m) of vector fields on
// a box in R^n.  The family is carried by its coefficient matrix C(x) (m x n,
// row j holds the coefficients of X_j); everything else is built from it:
//
//   B(x)      = C C^T                      Gram matrix, m x m
//   L^{-1}(x) = C^T B^{-1}                 right inverse of C, n x m
//   Pi_x      = C^T B^{-1} C               orthogonal projection onto span(rows of C)
//
// A point is degenerate when sigma_min(C(x)) <= tol * ||C(x)||_inf; the
// default tol is kRankTolerance.  B^{-1}, L^{-1} and Pi_x throw
// SingularityError at degenerate points.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xfg/geometry.hpp"
#include "xfg/grid.hpp"
#include "xfg/linalg.hpp"

namespace xfg {

inline constexpr double kRankTolerance = 1e-10;

enum class FamilyKind { euclidean, grushin, heisenberg, custom };

std::string_view to_string(FamilyKind kind);

class VectorFieldFamily {
 public:
  /// Writes C(x) row-major into out (m*n entries).  Must not throw for x in the domain.
  using CoeffFn = std::function<void(std::span<const double> x, std::span<double> out)>;

  VectorFieldFamily(FamilyKind kind, int m, int n, Box domain, CoeffFn coeff, std::string id);

  /// X = D on the box; C = I_n.
  static VectorFieldFamily euclidean(int n, Box domain);
  /// X_1 = d_1, X_2 = x_1 d_2 on a box in R^2.
  static VectorFieldFamily grushin(Box domain);
  /// X_1 = d_1 - (x_2/2) d_3, X_2 = d_2 + (x_1/2) d_3 on a box in R^3.
  static VectorFieldFamily heisenberg(Box domain);
  /// Entries of C as polynomial expressions in x1..xn (+, -, *, integer powers).
  static VectorFieldFamily custom(int m, int n, Box domain,
                                  const std::vector<std::vector<std::string>>& entries,
                                  std::string id = "custom");

  FamilyKind kind() const noexcept { return kind_; }
  int m() const noexcept { return m_; }
  int n() const noexcept { return n_; }
  const Box& domain() const noexcept { return domain_; }
  const std::string& id() const noexcept { return id_; }

  std::optional<double> lipschitz_hint() const noexcept { return lipschitz_hint_; }
  void set_lipschitz_hint(double bound) { lipschitz_hint_ = bound; }

  /// C(x) into a caller buffer, no domain check.  Hot-loop entry point.
  void coefficients(std::span<const double> x, std::span<double> out) const { coeff_(x, out); }
  /// Same family restricted to (or re-posed on) another box.
  VectorFieldFamily with_domain(Box domain) const;

 private:
  FamilyKind kind_;
  int m_;
  int n_;
  Box domain_;
  CoeffFn coeff_;
  std::string id_;
  std::optional<double> lipschitz_hint_;
};

/// C(x).  Throws DomainError outside the family's box.
Matrix coefficient_matrix(const VectorFieldFamily& family, std::span<const double> x);

/// B(x) = C(x) C(x)^T
Matrix gram_matrix(const VectorFieldFamily& family, std::span<const double> x);

/// sigma_min(c) <= tol * ||c||_inf
bool is_degenerate(const Matrix& c, double tol = kRankTolerance);
double min_singular_value(const Matrix& c);

enum class InverseMethod { automatic, cramer, elimination };

/// B(x)^{-1}; cofactors for m <= 3 and pivoted elimination above, unless
/// a method is forced.  Throws SingularityError when C(x) is degenerate.
Matrix gram_inverse(const VectorFieldFamily& family, std::span<const double> x,
                    double tol = kRankTolerance, InverseMethod method = InverseMethod::automatic);

/// L^{-1}(x) = C^T B^{-1}, n x m.
Matrix pseudo_inverse_map(const VectorFieldFamily& family, std::span<const double> x,
                          double tol = kRankTolerance);

/// Pi_x = C^T B^{-1} C, n x n.
Matrix horizontal_projection(const VectorFieldFamily& family, std::span<const double> x,
                             double tol = kRankTolerance);

struct HorizontalDecomposition {
  std::vector<double> point;
  Matrix projection;        // n x n
  Matrix pseudo_inverse;    // n x m
  Matrix gram;              // m x m
  Matrix horizontal_basis;  // m x n, the rows of C(x)
  Matrix null_basis;        // (n-m) x n, orthonormal rows spanning ker C(x)
};

HorizontalDecomposition decompose(const VectorFieldFamily& family, std::span<const double> x,
                                  double tol = kRankTolerance);

struct LicReport {
  std::size_t total_samples = 0;
  std::size_t degenerate_samples = 0;
  double degenerate_fraction = 0.0;
  /// Over the non-degenerate samples; +inf when there are none.
  double min_singular_value = 0.0;
  /// First kMaxLocations degenerate nodes in node order.
  std::vector<std::vector<double>> degenerate_locations;

  static constexpr std::size_t kMaxLocations = 1024;
};

/// Classifies every node of `samples` by the rank of C at tolerance tol.
/// Throws ArgumentError for tol <= 0 and DomainError when the lattice leaves
/// the family's box.
LicReport lic_scan(const VectorFieldFamily& family, const Grid& samples, double tol = kRankTolerance);

}  // namespace xfg

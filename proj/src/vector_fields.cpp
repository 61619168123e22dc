#include "xfg/vector_fields.hpp"

#include <cmath>
#include <limits>

#include "xfg/errors.hpp"
#include "xfg/expression.hpp"

namespace xfg {

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::euclidean: return "euclidean";
    case FamilyKind::grushin: return "grushin";
    case FamilyKind::heisenberg: return "heisenberg";
    case FamilyKind::custom: return "custom";
  }
  return "custom";
}

VectorFieldFamily::VectorFieldFamily(FamilyKind kind, int m, int n, Box domain, CoeffFn coeff,
                                     std::string id)
    : kind_(kind), m_(m), n_(n), domain_(std::move(domain)), coeff_(std::move(coeff)), id_(std::move(id)) {
  if (m < 1 || n < 1) throw ArgumentError("vector field family: m and n must be positive");
  if (m > n) throw ArgumentError("vector field family: need m <= n");
  if (domain_.dim() != n) throw ArgumentError("vector field family: domain dimension differs from n");
}

VectorFieldFamily VectorFieldFamily::euclidean(int n, Box domain) {
  auto coeff = [n](std::span<const double>, std::span<double> out) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i * n + j)] = i == j ? 1.0 : 0.0;
  };
  VectorFieldFamily f(FamilyKind::euclidean, n, n, std::move(domain), coeff,
                      "euclidean" + std::to_string(n));
  f.set_lipschitz_hint(0.0);
  return f;
}

VectorFieldFamily VectorFieldFamily::grushin(Box domain) {
  auto coeff = [](std::span<const double> x, std::span<double> out) {
    out[0] = 1.0;
    out[1] = 0.0;
    out[2] = 0.0;
    out[3] = x[0];
  };
  VectorFieldFamily f(FamilyKind::grushin, 2, 2, std::move(domain), coeff, "grushin");
  f.set_lipschitz_hint(1.0);
  return f;
}

VectorFieldFamily VectorFieldFamily::heisenberg(Box domain) {
  auto coeff = [](std::span<const double> x, std::span<double> out) {
    out[0] = 1.0;
    out[1] = 0.0;
    out[2] = -0.5 * x[1];
    out[3] = 0.0;
    out[4] = 1.0;
    out[5] = 0.5 * x[0];
  };
  VectorFieldFamily f(FamilyKind::heisenberg, 2, 3, std::move(domain), coeff, "heisenberg");
  f.set_lipschitz_hint(0.5);
  return f;
}

VectorFieldFamily VectorFieldFamily::custom(int m, int n, Box domain,
                                            const std::vector<std::vector<std::string>>& entries,
                                            std::string id) {
  if (static_cast<int>(entries.size()) != m)
    throw ConfigError("custom family: coeff must have m = " + std::to_string(m) + " rows");
  const auto names = indexed_names("x", n);
  std::vector<Expression> exprs;
  for (const auto& row : entries) {
    if (static_cast<int>(row.size()) != n)
      throw ConfigError("custom family: every coeff row must have n = " + std::to_string(n) + " entries");
    for (const auto& text : row) exprs.push_back(Expression::parse(text, names, {.polynomial_only = true}));
  }
  auto coeff = [exprs = std::move(exprs)](std::span<const double> x, std::span<double> out) {
    for (std::size_t k = 0; k < exprs.size(); ++k) out[k] = exprs[k].eval(x);
  };
  return VectorFieldFamily(FamilyKind::custom, m, n, std::move(domain), coeff, std::move(id));
}

VectorFieldFamily VectorFieldFamily::with_domain(Box domain) const {
  VectorFieldFamily f = *this;
  if (domain.dim() != n_) throw ArgumentError("with_domain: dimension mismatch");
  f.domain_ = std::move(domain);
  return f;
}

namespace {

void require_inside(const VectorFieldFamily& family, std::span<const double> x) {
  if (static_cast<int>(x.size()) != family.n())
    throw ArgumentError("point has dimension " + std::to_string(x.size()) + ", family expects " +
                        std::to_string(family.n()));
  if (!family.domain().contains(x))
    throw DomainError("point " + format_point(x) + " lies outside the domain " +
                      family.domain().describe() + " of " + family.id());
}

Matrix raw_coefficients(const VectorFieldFamily& family, std::span<const double> x) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c(family.m(), family.n());
  family.coefficients(x, std::span<double>(c.data(), static_cast<std::size_t>(c.size())));
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (!std::isfinite(c.data()[i]))
      throw DomainError("coefficient matrix of " + family.id() + " is not finite at " + format_point(x));
  return c;
}

Matrix checked_coefficients(const VectorFieldFamily& family, std::span<const double> x, double tol) {
  Matrix c = coefficient_matrix(family, x);
  if (is_degenerate(c, tol))
    throw SingularityError("C(x) of " + family.id() + " is rank deficient at " + format_point(x),
                           std::vector<double>(x.begin(), x.end()));
  return c;
}

Matrix invert_gram(const Matrix& b, InverseMethod method) {
  if (method == InverseMethod::automatic)
    method = b.rows() <= 3 ? InverseMethod::cramer : InverseMethod::elimination;
  return method == InverseMethod::cramer ? cramer_inverse(b) : elimination_inverse(b);
}

}  // namespace

Matrix coefficient_matrix(const VectorFieldFamily& family, std::span<const double> x) {
  require_inside(family, x);
  return raw_coefficients(family, x);
}

Matrix gram_matrix(const VectorFieldFamily& family, std::span<const double> x) {
  const Matrix c = coefficient_matrix(family, x);
  return c * c.transpose();
}

double min_singular_value(const Matrix& c) {
  const Vector s = singular_values(c);
  // Rows beyond the rank: m <= n, so there are exactly m singular values.
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

bool is_degenerate(const Matrix& c, double tol) {
  return min_singular_value(c) <= tol * inf_norm(c);
}

Matrix gram_inverse(const VectorFieldFamily& family, std::span<const double> x, double tol,
                    InverseMethod method) {
  const Matrix c = checked_coefficients(family, x, tol);
  return invert_gram(c * c.transpose(), method);
}

Matrix pseudo_inverse_map(const VectorFieldFamily& family, std::span<const double> x, double tol) {
  const Matrix c = checked_coefficients(family, x, tol);
  return c.transpose() * invert_gram(c * c.transpose(), InverseMethod::automatic);
}

Matrix horizontal_projection(const VectorFieldFamily& family, std::span<const double> x, double tol) {
  const Matrix c = checked_coefficients(family, x, tol);
  const Matrix binv = invert_gram(c * c.transpose(), InverseMethod::automatic);
  return c.transpose() * binv * c;
}

HorizontalDecomposition decompose(const VectorFieldFamily& family, std::span<const double> x, double tol) {
  const Matrix c = checked_coefficients(family, x, tol);
  const Matrix b = c * c.transpose();
  const Matrix binv = invert_gram(b, InverseMethod::automatic);

  HorizontalDecomposition out;
  out.point.assign(x.begin(), x.end());
  out.gram = b;
  out.pseudo_inverse = c.transpose() * binv;
  out.projection = out.pseudo_inverse * c;
  out.horizontal_basis = c;

  const int m = family.m();
  const int n = family.n();
  if (n > m) {
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
    out.null_basis = svd.matrixV().rightCols(n - m).transpose();
  } else {
    out.null_basis = Matrix(0, n);
  }
  return out;
}

LicReport lic_scan(const VectorFieldFamily& family, const Grid& samples, double tol) {
  if (!(tol > 0.0)) throw ArgumentError("lic_scan: tolerance must be positive");
  if (samples.node_count() == 0) throw ArgumentError("lic_scan: empty sample lattice");
  if (samples.dim() != family.n()) throw ArgumentError("lic_scan: lattice dimension differs from n");
  if (!family.domain().contains(samples.box()))
    throw DomainError("lic_scan: lattice " + samples.box().describe() + " leaves the domain " +
                      family.domain().describe());

  LicReport report;
  report.total_samples = samples.node_count();
  report.min_singular_value = std::numeric_limits<double>::infinity();
  std::vector<double> x(static_cast<std::size_t>(family.n()));
  for (std::size_t i = 0; i < samples.node_count(); ++i) {
    samples.node_point(i, x);
    const Matrix c = raw_coefficients(family, x);
    const double smin = min_singular_value(c);
    if (smin <= tol * inf_norm(c)) {
      ++report.degenerate_samples;
      if (report.degenerate_locations.size() < LicReport::kMaxLocations) report.degenerate_locations.push_back(x);
    } else {
      report.min_singular_value = std::fmin(report.min_singular_value, smin);
    }
  }
  report.degenerate_fraction =
      static_cast<double>(report.degenerate_samples) / static_cast<double>(report.total_samples);
  return report;
}

}  // namespace xfg

#pragma once

// Integrands in the X-frame, f(x, eta) with eta in R^m, and in the Euclidean
// frame, f_e(x, xi) with xi in R^n, together with the transforms between them
//
//   lift:  f_e(x, xi) = f(x, C(x) xi)
//   lower: f(x, eta)  = f_e(x, L^{-1}(x) eta)   (0 at degenerate x)
//
// and the sampled checks (compatibility, growth class, convexity,
// representation uniqueness) that decide whether a Euclidean-frame integrand
// really is an X-frame one.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xfg/geometry.hpp"
#include "xfg/linalg.hpp"
#include "xfg/vector_fields.hpp"

namespace xfg {

enum class IntegrandKind { quadratic, autonomous, general };

std::string_view to_string(IntegrandKind kind);

/// p-growth class: c0 |arg|^p <= f(x, arg) <= c1 (|arg|^p + 1).
struct GrowthBounds {
  double p = 2.0;
  double c0 = 0.0;
  double c1 = 1.0;
};

struct XFrame {};
struct EuclideanFrame {};

using MatrixField = std::function<Matrix(std::span<const double> x)>;

template <class Frame>
class BasicIntegrand {
 public:
  using ValueFn = std::function<double(std::span<const double> x, std::span<const double> arg)>;
  using GradientFn =
      std::function<void(std::span<const double> x, std::span<const double> arg, std::span<double> grad)>;

  /// <a(x) arg, arg>; a(x) must be symmetric arity x arity.
  static BasicIntegrand quadratic(int arity, MatrixField a, GrowthBounds bounds, std::string id);
  /// f(arg), independent of x.
  static BasicIntegrand autonomous(int arity, std::function<double(std::span<const double>)> f,
                                   std::function<void(std::span<const double>, std::span<double>)> grad,
                                   GrowthBounds bounds, std::string id);
  static BasicIntegrand general(int arity, ValueFn f, GradientFn grad, GrowthBounds bounds, std::string id);

  int arity() const noexcept { return arity_; }
  IntegrandKind kind() const noexcept { return kind_; }
  const GrowthBounds& bounds() const noexcept { return bounds_; }
  double exponent() const noexcept { return bounds_.p; }
  const std::string& id() const noexcept { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  /// Raw evaluation, no argument checks.
  double operator()(std::span<const double> x, std::span<const double> arg) const { return value_(x, arg); }
  /// d f / d arg.  Central differences when no analytic gradient was supplied.
  void gradient(std::span<const double> x, std::span<const double> arg, std::span<double> grad) const;
  bool has_analytic_gradient() const noexcept { return static_cast<bool>(grad_); }
  /// a(x); quadratic kind only (throws ArgumentError otherwise).
  Matrix coefficients(std::span<const double> x) const;
  const MatrixField& coefficient_field() const noexcept { return a_; }

  /// lambda * f, same kind.
  BasicIntegrand scaled(double lambda) const;
  BasicIntegrand with_bounds(GrowthBounds bounds) const;

  /// For integrands produced by lift/lower: "<family>:<source id>".
  const std::optional<std::string>& provenance() const noexcept { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }

 private:
  BasicIntegrand() = default;

  int arity_ = 0;
  IntegrandKind kind_ = IntegrandKind::general;
  GrowthBounds bounds_;
  std::string id_;
  ValueFn value_;
  GradientFn grad_;
  MatrixField a_;
  std::optional<std::string> provenance_;
};

using Integrand = BasicIntegrand<XFrame>;
using EuclideanIntegrand = BasicIntegrand<EuclideanFrame>;

extern template class BasicIntegrand<XFrame>;
extern template class BasicIntegrand<EuclideanFrame>;

/// Integrand from expressions.  X-frame arguments are eta1..etam, Euclidean
/// ones xi1..xin; points are x1..x<dim>.  Quadratic kinds take a matrix of
/// expressions in x, the others one expression; autonomous ones may not
/// mention x.
Integrand integrand_from_expression(IntegrandKind kind, int m, int dim,
                                    const std::vector<std::vector<std::string>>& a_entries,
                                    const std::string& f_text, GrowthBounds bounds, std::string id = "");
EuclideanIntegrand euclidean_integrand_from_expression(IntegrandKind kind, int n,
                                                       const std::vector<std::vector<std::string>>& a_entries,
                                                       const std::string& f_text, GrowthBounds bounds,
                                                       std::string id = "");

/// |eta|^p with bounds c0 = c1 = 1.
Integrand power_integrand(int m, double p);

/// Checked evaluation: throws ArgumentError on a size mismatch and DomainError
/// when the value is negative or not finite.
double evaluate(const Integrand& f, std::span<const double> x, std::span<const double> arg);
double evaluate(const EuclideanIntegrand& f, std::span<const double> x, std::span<const double> arg);

/// f_e(x, xi) = f(x, C(x) xi).  Quadratic f gives quadratic f_e with a_e = C^T a C.
EuclideanIntegrand lift_to_euclidean(const Integrand& f, const VectorFieldFamily& family);

/// f(x, eta) = f_e(x, L^{-1}(x) eta) off the degenerate set, 0 on it.
/// Quadratic f_e gives quadratic f with a = quadratic_pushforward(a_e).
Integrand lower_to_x(const EuclideanIntegrand& fe, const VectorFieldFamily& family,
                     double tol = kRankTolerance);

/// a(x) = (B^{-1})^T C a_e C^T B^{-1}.  Throws SingularityError at degenerate x.
Matrix quadratic_pushforward(const Matrix& a_e, const VectorFieldFamily& family, std::span<const double> x,
                             double tol = kRankTolerance);
Matrix quadratic_pushforward(const MatrixField& a_e, const VectorFieldFamily& family,
                             std::span<const double> x, double tol = kRankTolerance);

// ---------------------------------------------------------------------------
// Sampled checks

struct SampleSpec {
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<double>> args;
  int threads = 1;
};

/// Lattice with `per_axis` nodes per axis on the box.
std::vector<std::vector<double>> lattice_points(const Box& box, int per_axis = 17);
/// Canonical basis vectors of R^dim.
std::vector<std::vector<double>> basis_arguments(int dim);
/// Basis, pairwise sums e_i + e_j (i < j), and 64 seeded random unit
/// directions scaled by 1/2, 1 and 2.
std::vector<std::vector<double>> default_arguments(int dim, std::uint64_t seed);
SampleSpec default_samples(const Box& box, int arg_dim, std::uint64_t seed);

struct CheckReport {
  std::size_t samples_tested = 0;
  std::size_t violations = 0;
  /// Samples excluded up front (degenerate x in compatibility checks).
  std::size_t skipped = 0;
  double worst_residual = 0.0;
  std::vector<double> worst_x;
  std::vector<double> worst_arg;
  bool passed = true;
  /// Set when the family fails LIC on more than half of the sampled points.
  bool lic_warning = false;
  std::vector<std::string> warnings;

  /// Folds one residual in.  Larger residual wins; ties go to the witness
  /// whose x is closest to the origin, then lexicographic (x, arg).
  void record(double residual, bool violated, std::span<const double> x, std::span<const double> arg);
  void merge(const CheckReport& other);
};

/// Residual |f_e(x, xi) - f_e(x, Pi_x xi)|; violation when it exceeds
/// tol (1 + |f_e(x, xi)|).  Degenerate x are skipped.
CheckReport compatibility_check(const EuclideanIntegrand& fe, const VectorFieldFamily& family,
                                const SampleSpec& samples, double tol = 1e-10);

/// Both growth inequalities on every (x, arg).
CheckReport class_bounds_check(const Integrand& f, const SampleSpec& samples, double tol = 1e-10);
CheckReport class_bounds_check(const EuclideanIntegrand& f, const SampleSpec& samples, double tol = 1e-10);

/// Midpoint convexity over paired arguments; quadratic kinds also need
/// lambda_min(a(x)) >= -tol.
CheckReport convexity_check(const Integrand& f, const SampleSpec& samples, double tol = 1e-10);
CheckReport convexity_check(const EuclideanIntegrand& f, const SampleSpec& samples, double tol = 1e-10);

/// Compares f(x, C(x) xi) with g(x, C(x) xi) for xi in samples.args (R^n).
CheckReport representation_uniqueness_check(const Integrand& f, const Integrand& g,
                                            const VectorFieldFamily& family, const SampleSpec& samples,
                                            double tol = 1e-10);

}  // namespace xfg

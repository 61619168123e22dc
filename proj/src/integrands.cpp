#include "xfg/integrands.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "xfg/errors.hpp"
#include "xfg/expression.hpp"
#include "xfg/parallel.hpp"

namespace xfg {

std::string_view to_string(IntegrandKind kind) {
  switch (kind) {
    case IntegrandKind::quadratic: return "quadratic";
    case IntegrandKind::autonomous: return "autonomous";
    case IntegrandKind::general: return "general";
  }
  return "general";
}

namespace {

void validate_bounds(const GrowthBounds& b) {
  if (!(b.p > 1.0)) throw ArgumentError("integrand: exponent p must exceed 1");
  if (!(b.c0 >= 0.0) || !(b.c1 >= b.c0)) throw ArgumentError("integrand: need 0 <= c0 <= c1");
}

double quadratic_form(const Matrix& a, std::span<const double> v) {
  const Eigen::Map<const Vector> w(v.data(), static_cast<Eigen::Index>(v.size()));
  return w.dot(a * w);
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double t : v) s += t * t;
  return std::sqrt(s);
}

Eigen::Map<const Vector> as_vector(std::span<const double> v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix raw_c(const VectorFieldFamily& family, std::span<const double> x) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c(family.m(), family.n());
  family.coefficients(x, std::span<double>(c.data(), static_cast<std::size_t>(c.size())));
  return c;
}

/// L^{-1}(x), or nullopt at a degenerate point.
std::optional<Matrix> right_inverse(const VectorFieldFamily& family, std::span<const double> x, double tol) {
  const Matrix c = raw_c(family, x);
  if (is_degenerate(c, tol)) return std::nullopt;
  const Matrix b = c * c.transpose();
  const Matrix binv = b.rows() <= 3 ? cramer_inverse(b) : elimination_inverse(b);
  return Matrix(c.transpose() * binv);
}

}  // namespace

// ---------------------------------------------------------------------------
// BasicIntegrand

template <class Frame>
BasicIntegrand<Frame> BasicIntegrand<Frame>::quadratic(int arity, MatrixField a, GrowthBounds bounds,
                                                       std::string id) {
  validate_bounds(bounds);
  if (arity < 1) throw ArgumentError("integrand: arity must be positive");
  BasicIntegrand f;
  f.arity_ = arity;
  f.kind_ = IntegrandKind::quadratic;
  f.bounds_ = bounds;
  f.id_ = std::move(id);
  f.a_ = a;
  f.value_ = [a](std::span<const double> x, std::span<const double> arg) { return quadratic_form(a(x), arg); };
  f.grad_ = [a](std::span<const double> x, std::span<const double> arg, std::span<double> grad) {
    const Matrix m = a(x);
    const Vector g = (m + m.transpose()) * as_vector(arg);
    std::copy(g.data(), g.data() + g.size(), grad.begin());
  };
  return f;
}

template <class Frame>
BasicIntegrand<Frame> BasicIntegrand<Frame>::autonomous(
    int arity, std::function<double(std::span<const double>)> fn,
    std::function<void(std::span<const double>, std::span<double>)> grad, GrowthBounds bounds, std::string id) {
  validate_bounds(bounds);
  if (arity < 1) throw ArgumentError("integrand: arity must be positive");
  BasicIntegrand f;
  f.arity_ = arity;
  f.kind_ = IntegrandKind::autonomous;
  f.bounds_ = bounds;
  f.id_ = std::move(id);
  f.value_ = [fn](std::span<const double>, std::span<const double> arg) { return fn(arg); };
  if (grad)
    f.grad_ = [grad](std::span<const double>, std::span<const double> arg, std::span<double> g) { grad(arg, g); };
  return f;
}

template <class Frame>
BasicIntegrand<Frame> BasicIntegrand<Frame>::general(int arity, ValueFn fn, GradientFn grad,
                                                     GrowthBounds bounds, std::string id) {
  validate_bounds(bounds);
  if (arity < 1) throw ArgumentError("integrand: arity must be positive");
  BasicIntegrand f;
  f.arity_ = arity;
  f.kind_ = IntegrandKind::general;
  f.bounds_ = bounds;
  f.id_ = std::move(id);
  f.value_ = std::move(fn);
  f.grad_ = std::move(grad);
  return f;
}

template <class Frame>
void BasicIntegrand<Frame>::gradient(std::span<const double> x, std::span<const double> arg,
                                     std::span<double> grad) const {
  if (grad_) {
    grad_(x, arg, grad);
    return;
  }
  std::vector<double> probe(arg.begin(), arg.end());
  for (std::size_t i = 0; i < arg.size(); ++i) {
    const double step = 1e-6 * (1.0 + std::fabs(arg[i]));
    probe[i] = arg[i] + step;
    const double up = value_(x, probe);
    probe[i] = arg[i] - step;
    const double down = value_(x, probe);
    probe[i] = arg[i];
    grad[i] = (up - down) / (2.0 * step);
  }
}

template <class Frame>
Matrix BasicIntegrand<Frame>::coefficients(std::span<const double> x) const {
  if (kind_ != IntegrandKind::quadratic) throw ArgumentError("integrand " + id_ + " is not quadratic");
  return a_(x);
}

template <class Frame>
BasicIntegrand<Frame> BasicIntegrand<Frame>::scaled(double lambda) const {
  if (!(lambda >= 0.0)) throw ArgumentError("integrand: scale factor must be non-negative");
  BasicIntegrand f = *this;
  f.bounds_.c0 *= lambda;
  f.bounds_.c1 *= lambda;
  auto value = value_;
  f.value_ = [value, lambda](std::span<const double> x, std::span<const double> arg) {
    return lambda * value(x, arg);
  };
  if (grad_) {
    auto grad = grad_;
    f.grad_ = [grad, lambda](std::span<const double> x, std::span<const double> arg, std::span<double> g) {
      grad(x, arg, g);
      for (double& v : g) v *= lambda;
    };
  }
  if (a_) {
    auto a = a_;
    f.a_ = [a, lambda](std::span<const double> x) { return Matrix(lambda * a(x)); };
  }
  return f;
}

template <class Frame>
BasicIntegrand<Frame> BasicIntegrand<Frame>::with_bounds(GrowthBounds bounds) const {
  validate_bounds(bounds);
  BasicIntegrand f = *this;
  f.bounds_ = bounds;
  return f;
}

template class BasicIntegrand<XFrame>;
template class BasicIntegrand<EuclideanFrame>;

// ---------------------------------------------------------------------------
// Construction from expressions

namespace {

template <class Frame>
BasicIntegrand<Frame> from_expression(IntegrandKind kind, int arity, int dim, const char* arg_prefix,
                                      const std::vector<std::vector<std::string>>& a_entries,
                                      const std::string& f_text, GrowthBounds bounds, std::string id) {
  using I = BasicIntegrand<Frame>;
  const auto xs = indexed_names("x", dim);
  const auto args = indexed_names(arg_prefix, arity);

  if (kind == IntegrandKind::quadratic) {
    if (static_cast<int>(a_entries.size()) != arity)
      throw ConfigError("quadratic integrand: 'a' must be " + std::to_string(arity) + " x " +
                        std::to_string(arity));
    std::vector<Expression> entries;
    for (const auto& row : a_entries) {
      if (static_cast<int>(row.size()) != arity)
        throw ConfigError("quadratic integrand: 'a' must be " + std::to_string(arity) + " x " +
                          std::to_string(arity));
      for (const auto& text : row) entries.push_back(Expression::parse(text, xs));
    }
    if (id.empty()) id = "quadratic";
    MatrixField a = [entries, arity](std::span<const double> x) {
      Matrix m(arity, arity);
      for (int i = 0; i < arity; ++i)
        for (int j = 0; j < arity; ++j) m(i, j) = entries[static_cast<std::size_t>(i * arity + j)].eval(x);
      return m;
    };
    return I::quadratic(arity, a, bounds, id);
  }

  if (f_text.empty()) throw ConfigError("integrand: missing expression 'f'");
  if (id.empty()) id = f_text;

  if (kind == IntegrandKind::autonomous) {
    const Expression f = Expression::parse(f_text, args);
    std::vector<Expression> grad;
    for (int i = 0; i < arity; ++i) grad.push_back(f.derivative(i));
    return I::autonomous(
        arity, [f](std::span<const double> arg) { return f.eval(arg); },
        [grad](std::span<const double> arg, std::span<double> g) {
          for (std::size_t i = 0; i < grad.size(); ++i) g[i] = grad[i].eval(arg);
        },
        bounds, id);
  }

  // general: slots are x1..x<dim>, then the argument
  const auto names = concat_names({xs, args});
  const Expression f = Expression::parse(f_text, names);
  std::vector<Expression> grad;
  for (int i = 0; i < arity; ++i) grad.push_back(f.derivative(dim + i));
  auto pack = [dim, arity](std::span<const double> x, std::span<const double> arg, double* slots) {
    std::copy_n(x.begin(), dim, slots);
    std::copy_n(arg.begin(), arity, slots + dim);
  };
  return I::general(
      arity,
      [f, pack, dim, arity](std::span<const double> x, std::span<const double> arg) {
        double slots[16];
        std::vector<double> big;
        double* s = dim + arity <= 16 ? slots : (big.resize(static_cast<std::size_t>(dim + arity)), big.data());
        pack(x, arg, s);
        return f.eval(std::span<const double>(s, static_cast<std::size_t>(dim + arity)));
      },
      [grad, pack, dim, arity](std::span<const double> x, std::span<const double> arg, std::span<double> g) {
        double slots[16];
        std::vector<double> big;
        double* s = dim + arity <= 16 ? slots : (big.resize(static_cast<std::size_t>(dim + arity)), big.data());
        pack(x, arg, s);
        const std::span<const double> all(s, static_cast<std::size_t>(dim + arity));
        for (std::size_t i = 0; i < grad.size(); ++i) g[i] = grad[i].eval(all);
      },
      bounds, id);
}

}  // namespace

Integrand integrand_from_expression(IntegrandKind kind, int m, int dim,
                                    const std::vector<std::vector<std::string>>& a_entries,
                                    const std::string& f_text, GrowthBounds bounds, std::string id) {
  return from_expression<XFrame>(kind, m, dim, "eta", a_entries, f_text, bounds, std::move(id));
}

EuclideanIntegrand euclidean_integrand_from_expression(IntegrandKind kind, int n,
                                                       const std::vector<std::vector<std::string>>& a_entries,
                                                       const std::string& f_text, GrowthBounds bounds,
                                                       std::string id) {
  return from_expression<EuclideanFrame>(kind, n, n, "xi", a_entries, f_text, bounds, std::move(id));
}

Integrand power_integrand(int m, double p) {
  const GrowthBounds bounds{p, 1.0, 1.0};
  return Integrand::autonomous(
      m,
      [p](std::span<const double> eta) {
        double s = 0.0;
        for (double v : eta) s += v * v;
        return p == 2.0 ? s : std::pow(s, 0.5 * p);
      },
      [p](std::span<const double> eta, std::span<double> g) {
        double s = 0.0;
        for (double v : eta) s += v * v;
        const double factor = p == 2.0 ? 2.0 : (s == 0.0 ? 0.0 : p * std::pow(s, 0.5 * p - 1.0));
        for (std::size_t i = 0; i < eta.size(); ++i) g[i] = factor * eta[i];
      },
      bounds, "|eta|^" + std::to_string(p));
}

// ---------------------------------------------------------------------------
// Evaluation, lift and lower

namespace {

template <class I>
double checked_evaluate(const I& f, std::span<const double> x, std::span<const double> arg) {
  if (static_cast<int>(arg.size()) != f.arity())
    throw ArgumentError("integrand " + f.id() + " expects an argument of dimension " + std::to_string(f.arity()) +
                        ", got " + std::to_string(arg.size()));
  const double v = f(x, arg);
  if (!std::isfinite(v)) throw DomainError("integrand " + f.id() + " is not finite at " + format_point(x));
  if (v < 0.0) throw DomainError("integrand " + f.id() + " is negative at " + format_point(x));
  return v;
}

}  // namespace

double evaluate(const Integrand& f, std::span<const double> x, std::span<const double> arg) {
  return checked_evaluate(f, x, arg);
}

double evaluate(const EuclideanIntegrand& f, std::span<const double> x, std::span<const double> arg) {
  return checked_evaluate(f, x, arg);
}

EuclideanIntegrand lift_to_euclidean(const Integrand& f, const VectorFieldFamily& family) {
  if (f.arity() != family.m())
    throw ArgumentError("lift: integrand arity " + std::to_string(f.arity()) + " differs from m = " +
                        std::to_string(family.m()));
  const int n = family.n();
  const std::string id = "lift(" + f.id() + ")";
  EuclideanIntegrand fe = [&]() {
    if (f.kind() == IntegrandKind::quadratic) {
      const MatrixField a = f.coefficient_field();
      return EuclideanIntegrand::quadratic(
          n,
          [a, family](std::span<const double> x) {
            const Matrix c = raw_c(family, x);
            return Matrix(c.transpose() * a(x) * c);
          },
          f.bounds(), id);
    }
    return EuclideanIntegrand::general(
        n,
        [f, family](std::span<const double> x, std::span<const double> xi) {
          const Vector eta = raw_c(family, x) * as_vector(xi);
          return f(x, std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())));
        },
        [f, family](std::span<const double> x, std::span<const double> xi, std::span<double> g) {
          const Matrix c = raw_c(family, x);
          const Vector eta = c * as_vector(xi);
          Vector ge(eta.size());
          f.gradient(x, std::span<const double>(eta.data(), static_cast<std::size_t>(eta.size())),
                     std::span<double>(ge.data(), static_cast<std::size_t>(ge.size())));
          const Vector gx = c.transpose() * ge;
          std::copy(gx.data(), gx.data() + gx.size(), g.begin());
        },
        f.bounds(), id);
  }();
  fe.set_provenance(family.id() + ":" + f.id());
  return fe;
}

Matrix quadratic_pushforward(const Matrix& a_e, const VectorFieldFamily& family, std::span<const double> x,
                             double tol) {
  if (a_e.rows() != family.n() || a_e.cols() != family.n())
    throw ArgumentError("quadratic_pushforward: a_e must be n x n");
  const Matrix linv = pseudo_inverse_map(family, x, tol);
  return linv.transpose() * a_e * linv;
}

Matrix quadratic_pushforward(const MatrixField& a_e, const VectorFieldFamily& family, std::span<const double> x,
                             double tol) {
  return quadratic_pushforward(a_e(x), family, x, tol);
}

Integrand lower_to_x(const EuclideanIntegrand& fe, const VectorFieldFamily& family, double tol) {
  if (fe.arity() != family.n())
    throw ArgumentError("lower: integrand arity " + std::to_string(fe.arity()) + " differs from n = " +
                        std::to_string(family.n()));
  const int m = family.m();
  const std::string id = "lower(" + fe.id() + ")";
  Integrand f = [&]() {
    if (fe.kind() == IntegrandKind::quadratic) {
      const MatrixField ae = fe.coefficient_field();
      return Integrand::quadratic(
          m,
          [ae, family, tol, m](std::span<const double> x) {
            const auto linv = right_inverse(family, x, tol);
            if (!linv) return Matrix(Matrix::Zero(m, m));
            return Matrix(linv->transpose() * ae(x) * *linv);
          },
          fe.bounds(), id);
    }
    return Integrand::general(
        m,
        [fe, family, tol](std::span<const double> x, std::span<const double> eta) {
          const auto linv = right_inverse(family, x, tol);
          if (!linv) return 0.0;
          const Vector xi = *linv * as_vector(eta);
          return fe(x, std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())));
        },
        [fe, family, tol](std::span<const double> x, std::span<const double> eta, std::span<double> g) {
          const auto linv = right_inverse(family, x, tol);
          if (!linv) {
            std::fill(g.begin(), g.end(), 0.0);
            return;
          }
          const Vector xi = *linv * as_vector(eta);
          Vector gxi(xi.size());
          fe.gradient(x, std::span<const double>(xi.data(), static_cast<std::size_t>(xi.size())),
                      std::span<double>(gxi.data(), static_cast<std::size_t>(gxi.size())));
          const Vector ge = linv->transpose() * gxi;
          std::copy(ge.data(), ge.data() + ge.size(), g.begin());
        },
        fe.bounds(), id);
  }();
  f.set_provenance(family.id() + ":" + fe.id());
  return f;
}

// ---------------------------------------------------------------------------
// Samples

std::vector<std::vector<double>> lattice_points(const Box& box, int per_axis) {
  const Grid grid = Grid::uniform(box, per_axis);
  std::vector<std::vector<double>> pts;
  pts.reserve(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) pts.push_back(grid.node_point(i));
  return pts;
}

std::vector<std::vector<double>> basis_arguments(int dim) {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < dim; ++i) {
    std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
    e[static_cast<std::size_t>(i)] = 1.0;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::vector<double>> default_arguments(int dim, std::uint64_t seed) {
  auto out = basis_arguments(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
      e[static_cast<std::size_t>(i)] = 1.0;
      e[static_cast<std::size_t>(j)] = 1.0;
      out.push_back(std::move(e));
    }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 64; ++k) {
    std::vector<double> d(static_cast<std::size_t>(dim));
    double len = 0.0;
    do {
      for (double& v : d) v = normal(rng);
      len = norm(d);
    } while (len < 1e-8);
    for (double scale : {0.5, 1.0, 2.0}) {
      std::vector<double> v(d);
      for (double& t : v) t *= scale / len;
      out.push_back(std::move(v));
    }
  }
  return out;
}

SampleSpec default_samples(const Box& box, int arg_dim, std::uint64_t seed) {
  return SampleSpec{lattice_points(box, 17), default_arguments(arg_dim, seed), 1};
}

// ---------------------------------------------------------------------------
// CheckReport

namespace {

bool witness_before(std::span<const double> xa, std::span<const double> aa, std::span<const double> xb,
                    std::span<const double> ab) {
  const double na = norm(xa);
  const double nb = norm(xb);
  if (na != nb) return na < nb;
  if (!std::equal(xa.begin(), xa.end(), xb.begin(), xb.end()))
    return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
  return std::lexicographical_compare(aa.begin(), aa.end(), ab.begin(), ab.end());
}

}  // namespace

void CheckReport::record(double residual, bool violated, std::span<const double> x, std::span<const double> arg) {
  ++samples_tested;
  if (violated) {
    ++violations;
    passed = false;
  }
  const bool first = worst_x.empty() && worst_arg.empty();
  if (first || residual > worst_residual ||
      (residual == worst_residual && witness_before(x, arg, worst_x, worst_arg))) {
    worst_residual = residual;
    worst_x.assign(x.begin(), x.end());
    worst_arg.assign(arg.begin(), arg.end());
  }
}

void CheckReport::merge(const CheckReport& other) {
  const bool take = !other.worst_x.empty() || !other.worst_arg.empty();
  if (take) {
    const bool first = worst_x.empty() && worst_arg.empty();
    if (first || other.worst_residual > worst_residual ||
        (other.worst_residual == worst_residual &&
         witness_before(other.worst_x, other.worst_arg, worst_x, worst_arg))) {
      worst_residual = other.worst_residual;
      worst_x = other.worst_x;
      worst_arg = other.worst_arg;
    }
  }
  samples_tested += other.samples_tested;
  violations += other.violations;
  skipped += other.skipped;
  passed = passed && other.passed;
  lic_warning = lic_warning || other.lic_warning;
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
}

namespace {

/// Runs per_x(i, report) for every sample point and folds the partial
/// reports in point order.
template <class Fn>
CheckReport run_over_points(const SampleSpec& samples, Fn&& per_x) {
  std::vector<CheckReport> partial(samples.xs.size());
  parallel_for(samples.xs.size(), samples.threads, [&](std::size_t i) { per_x(i, partial[i]); });
  CheckReport total;
  for (const auto& r : partial) total.merge(r);
  total.passed = total.violations == 0;
  return total;
}

template <class I>
CheckReport bounds_check_impl(const I& f, const SampleSpec& samples, double tol) {
  const GrowthBounds b = f.bounds();
  return run_over_points(samples, [&](std::size_t i, CheckReport& report) {
    const auto& x = samples.xs[i];
    for (const auto& arg : samples.args) {
      if (static_cast<int>(arg.size()) != f.arity()) throw ArgumentError("class_bounds_check: argument size");
      const double v = f(x, arg);
      const double growth = std::pow(norm(arg), b.p);
      const double residual = std::max({b.c0 * growth - v, v - b.c1 * (growth + 1.0), 0.0});
      report.record(residual, !(residual <= tol * (1.0 + std::fabs(v))), x, arg);
    }
  });
}

template <class I>
CheckReport convexity_check_impl(const I& f, const SampleSpec& samples, double tol) {
  const std::size_t count = samples.args.size();
  return run_over_points(samples, [&](std::size_t i, CheckReport& report) {
    const auto& x = samples.xs[i];
    if (f.kind() == IntegrandKind::quadratic) {
      const double lambda = min_symmetric_eigenvalue(f.coefficients(x));
      const double residual = std::max(0.0, -lambda);
      report.record(residual, lambda < -tol, x, std::vector<double>{});
    }
    if (count < 2) return;
    std::vector<double> mid(static_cast<std::size_t>(f.arity()));
    for (std::size_t k = 0; k < count; ++k) {
      for (std::size_t offset : {std::size_t{1}, count / 2}) {
        if (offset == 0) continue;
        const auto& a = samples.args[k];
        const auto& b = samples.args[(k + offset) % count];
        for (std::size_t d = 0; d < mid.size(); ++d) mid[d] = 0.5 * (a[d] + b[d]);
        const double avg = 0.5 * (f(x, a) + f(x, b));
        const double residual = std::max(0.0, f(x, mid) - avg);
        report.record(residual, residual > tol * (1.0 + std::fabs(avg)), x, mid);
      }
    }
  });
}

}  // namespace

CheckReport compatibility_check(const EuclideanIntegrand& fe, const VectorFieldFamily& family,
                                const SampleSpec& samples, double tol) {
  if (fe.arity() != family.n()) throw ArgumentError("compatibility_check: integrand arity differs from n");
  return run_over_points(samples, [&](std::size_t i, CheckReport& report) {
    const auto& x = samples.xs[i];
    const Matrix c = coefficient_matrix(family, x);
    if (is_degenerate(c)) {
      ++report.skipped;
      return;
    }
    const Matrix binv = c.rows() <= 3 ? cramer_inverse(c * c.transpose()) : elimination_inverse(c * c.transpose());
    const Matrix proj = c.transpose() * binv * c;
    for (const auto& xi : samples.args) {
      if (static_cast<int>(xi.size()) != family.n()) throw ArgumentError("compatibility_check: argument size");
      const Vector pxi = proj * as_vector(xi);
      const double v = fe(x, xi);
      const double vp = fe(x, std::span<const double>(pxi.data(), static_cast<std::size_t>(pxi.size())));
      const double residual = std::fabs(v - vp);
      report.record(residual, !(residual <= tol * (1.0 + std::fabs(v))), x, xi);
    }
  });
}

CheckReport class_bounds_check(const Integrand& f, const SampleSpec& samples, double tol) {
  return bounds_check_impl(f, samples, tol);
}
CheckReport class_bounds_check(const EuclideanIntegrand& f, const SampleSpec& samples, double tol) {
  return bounds_check_impl(f, samples, tol);
}
CheckReport convexity_check(const Integrand& f, const SampleSpec& samples, double tol) {
  return convexity_check_impl(f, samples, tol);
}
CheckReport convexity_check(const EuclideanIntegrand& f, const SampleSpec& samples, double tol) {
  return convexity_check_impl(f, samples, tol);
}

CheckReport representation_uniqueness_check(const Integrand& f, const Integrand& g,
                                            const VectorFieldFamily& family, const SampleSpec& samples,
                                            double tol) {
  if (f.arity() != g.arity()) throw ArgumentError("representation_uniqueness_check: arities differ");
  if (f.arity() != family.m()) throw ArgumentError("representation_uniqueness_check: arity differs from m");

  std::vector<char> degenerate(samples.xs.size(), 0);
  CheckReport report = run_over_points(samples, [&](std::size_t i, CheckReport& r) {
    const auto& x = samples.xs[i];
    const Matrix c = coefficient_matrix(family, x);
    degenerate[i] = is_degenerate(c, kRankTolerance) ? 1 : 0;
    for (const auto& xi : samples.args) {
      if (static_cast<int>(xi.size()) != family.n())
        throw ArgumentError("representation_uniqueness_check: argument size");
      const Vector eta = c * as_vector(xi);
      const std::span<const double> e(eta.data(), static_cast<std::size_t>(eta.size()));
      const double vf = f(x, e);
      const double vg = g(x, e);
      const double residual = std::fabs(vf - vg);
      r.record(residual, !(residual <= tol * (1.0 + std::fabs(vf))), x, xi);
    }
  });

  const auto bad = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  if (!samples.xs.empty() && 2 * bad > samples.xs.size()) {
    report.lic_warning = true;
    report.warnings.push_back("family " + family.id() + " fails the linear independence condition on " +
                              std::to_string(bad) + " of " + std::to_string(samples.xs.size()) +
                              " sampled points; agreement on the range of C(x) does not make the representation "
                              "unique");
  }
  return report;
}

}  // namespace xfg

#include "xfg/gamma_lab.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "xfg/errors.hpp"
#include "xfg/kernels.hpp"
#include "xfg/parallel.hpp"

namespace xfg {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Everything the two solver paths share: the cell block of A, the free
/// nodes, and per-cell X-gradient operators.
struct Discretization {
  const EnergyProblem* problem = nullptr;
  const Grid* grid = nullptr;
  int n = 0;
  int m = 0;
  int corners = 0;
  double volume = 0.0;
  double lambda = 0.0;
  double p = 2.0;
  std::vector<std::size_t> cells;
  std::vector<double> centers;       // cells x n
  std::vector<std::size_t> corner;   // cells x corners
  std::vector<double> xgrad;         // cells x m x corners, Xu_c = xgrad_c u_corners
  std::vector<double> target;        // tether target per cell (corner average)
  std::vector<std::ptrdiff_t> slot;  // node -> free index or -1
  std::vector<std::size_t> free_nodes;
  std::vector<double> coeffs;        // cells x m x m, a(x_c) for quadratic integrands

  const double* op(std::size_t i) const { return xgrad.data() + i * static_cast<std::size_t>(m * corners); }
};

bool degenerate_on_nodes(const VectorFieldFamily& family, const Grid& grid, const CellBlock& block) {
  const int n = grid.dim();
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<int> ijk(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    grid.node_multi_index(i, ijk);
    bool inside = true;
    for (int d = 0; d < n; ++d) {
      const auto sd = static_cast<std::size_t>(d);
      if (ijk[sd] < block.begin[sd] || ijk[sd] > block.end[sd]) inside = false;
    }
    if (!inside) continue;
    grid.node_point(i, x);
    if (is_degenerate(coefficient_matrix(family, x))) return true;
  }
  return false;
}

Discretization discretize(const EnergyProblem& problem, double lambda) {
  Discretization D;
  D.problem = &problem;
  D.grid = &problem.grid;
  const Grid& g = problem.grid;
  const VectorFieldFamily& family = problem.spec.family;
  D.n = g.dim();
  D.m = family.m();
  D.corners = 1 << D.n;
  D.volume = g.cell_volume();
  D.lambda = lambda;
  D.p = problem.spec.p;
  if (family.n() != D.n) throw ArgumentError("minimize: grid dimension differs from n");
  if (!family.domain().contains(g.box()))
    throw DomainError("minimize: grid box " + g.box().describe() + " leaves the domain of " + family.id());

  const CellBlock block = snap(g, problem.area);
  D.cells = block.cells(g);

  D.slot.assign(g.node_count(), -1);
  std::vector<int> ijk(static_cast<std::size_t>(D.n));
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    g.node_multi_index(i, ijk);
    bool interior = true;
    for (int d = 0; d < D.n; ++d) {
      const auto sd = static_cast<std::size_t>(d);
      if (ijk[sd] <= block.begin[sd] || ijk[sd] >= block.end[sd]) interior = false;
    }
    if (interior) {
      D.slot[i] = static_cast<std::ptrdiff_t>(D.free_nodes.size());
      D.free_nodes.push_back(i);
    }
  }
  if (D.free_nodes.empty()) throw DomainError("minimize: the subdomain has no interior node");

  // Euclidean corner gradient, identical on every cell of a uniform grid.
  std::vector<double> grad(static_cast<std::size_t>(D.n * D.corners));
  const double avg = 1.0 / static_cast<double>(D.corners / 2);
  for (int d = 0; d < D.n; ++d)
    for (int k = 0; k < D.corners; ++k)
      grad[static_cast<std::size_t>(d * D.corners + k)] = ((k >> d) & 1 ? 1.0 : -1.0) * avg / g.spacing(d);

  const std::size_t nc = D.cells.size();
  D.centers.resize(nc * static_cast<std::size_t>(D.n));
  D.corner.resize(nc * static_cast<std::size_t>(D.corners));
  D.xgrad.assign(nc * static_cast<std::size_t>(D.m * D.corners), 0.0);
  D.target.resize(nc);
  const bool quadratic = problem.spec.integrand.kind() == IntegrandKind::quadratic;
  if (quadratic) D.coeffs.resize(nc * static_cast<std::size_t>(D.m * D.m));
  const PointFn& target = problem.tether_target ? problem.tether_target : problem.dirichlet;
  std::vector<double> target_nodes;
  if (lambda > 0.0) {
    target_nodes.resize(g.node_count());
    std::vector<double> x(static_cast<std::size_t>(D.n));
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      g.node_point(i, x);
      target_nodes[i] = target(x);
    }
  }
  for (std::size_t i = 0; i < nc; ++i) {
    double* xc = D.centers.data() + i * static_cast<std::size_t>(D.n);
    g.cell_center(D.cells[i], std::span<double>(xc, static_cast<std::size_t>(D.n)));
    std::size_t* cn = D.corner.data() + i * static_cast<std::size_t>(D.corners);
    g.cell_corners(D.cells[i], std::span<std::size_t>(cn, static_cast<std::size_t>(D.corners)));
    double c[9];
    family.coefficients(std::span<const double>(xc, static_cast<std::size_t>(D.n)),
                        std::span<double>(c, static_cast<std::size_t>(D.m * D.n)));
    double* opi = D.xgrad.data() + i * static_cast<std::size_t>(D.m * D.corners);
    for (int j = 0; j < D.m; ++j)
      for (int k = 0; k < D.corners; ++k) {
        double s = 0.0;
        for (int d = 0; d < D.n; ++d) s += c[j * D.n + d] * grad[static_cast<std::size_t>(d * D.corners + k)];
        opi[j * D.corners + k] = s;
      }
    if (quadratic) {
      const Matrix a = problem.spec.integrand.coefficients(std::span<const double>(xc, static_cast<std::size_t>(D.n)));
      for (int r = 0; r < D.m; ++r)
        for (int q = 0; q < D.m; ++q) D.coeffs[(i * static_cast<std::size_t>(D.m) + r) * static_cast<std::size_t>(D.m) + q] = a(r, q);
    }
    if (lambda > 0.0) {
      double s = 0.0;
      for (int k = 0; k < D.corners; ++k) s += target_nodes[cn[k]];
      D.target[i] = s / D.corners;
    }
  }
  return D;
}

std::vector<double> starting_point(const EnergyProblem& problem, const Discretization& D,
                                   const MinimizeOptions& opts) {
  const Grid& g = problem.grid;
  std::vector<double> u(g.node_count());
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  for (std::size_t i = 0; i < u.size(); ++i) {
    g.node_point(i, x);
    u[i] = problem.dirichlet(x);
    if (!std::isfinite(u[i])) throw DomainError("minimize: Dirichlet data is not finite at " + format_point(x));
  }
  if (opts.initial_noise > 0.0) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> noise(-opts.initial_noise, opts.initial_noise);
    for (std::size_t node : D.free_nodes) u[node] += noise(rng);
  }
  return u;
}

double tether_term(const Discretization& D, const double* uc, std::size_t i, double* dcorner) {
  double avg = 0.0;
  for (int k = 0; k < D.corners; ++k) avg += uc[k];
  avg /= D.corners;
  const double r = avg - D.target[i];
  const double a = std::fabs(r);
  if (dcorner) {
    const double dr = D.p == 2.0 ? 2.0 * r : (a == 0.0 ? 0.0 : D.p * std::pow(a, D.p - 1.0) * (r > 0 ? 1.0 : -1.0));
    for (int k = 0; k < D.corners; ++k) dcorner[k] += D.lambda * dr / D.corners;
  }
  return D.lambda * (D.p == 2.0 ? a * a : std::pow(a, D.p));
}

/// Energy of the full nodal vector u; optional gradient over all nodes.
double energy(const Discretization& D, const std::vector<double>& u, std::vector<double>* grad, int threads) {
  const Integrand& f = D.problem->spec.integrand;
  const std::size_t nc = D.cells.size();
  const auto corners = static_cast<std::size_t>(D.corners);
  std::vector<double> terms(nc);
  std::vector<double> contrib(grad ? nc * corners : 0);
  parallel_for(nc, threads, [&](std::size_t i) {
    double uc[8];
    double eta[3];
    double geta[3];
    const std::size_t* cn = D.corner.data() + i * corners;
    for (std::size_t k = 0; k < corners; ++k) uc[k] = u[cn[k]];
    const double* opi = D.op(i);
    for (int j = 0; j < D.m; ++j) {
      double s = 0.0;
      for (int k = 0; k < D.corners; ++k) s += opi[j * D.corners + k] * uc[k];
      eta[j] = s;
    }
    const std::span<const double> x(D.centers.data() + i * static_cast<std::size_t>(D.n),
                                    static_cast<std::size_t>(D.n));
    const std::span<const double> e(eta, static_cast<std::size_t>(D.m));
    double* dc = grad ? contrib.data() + i * corners : nullptr;
    double value = 0.0;
    if (!D.coeffs.empty()) {
      const double* a = D.coeffs.data() + i * static_cast<std::size_t>(D.m * D.m);
      for (int r = 0; r < D.m; ++r) {
        double ar = 0.0;
        double at = 0.0;
        for (int q = 0; q < D.m; ++q) {
          ar += a[r * D.m + q] * eta[q];
          at += a[q * D.m + r] * eta[q];
        }
        value += eta[r] * ar;
        geta[r] = ar + at;
      }
    } else {
      value = f(x, e);
      if (dc) f.gradient(x, e, std::span<double>(geta, static_cast<std::size_t>(D.m)));
    }
    if (dc) {
      for (int k = 0; k < D.corners; ++k) {
        double s = 0.0;
        for (int j = 0; j < D.m; ++j) s += opi[j * D.corners + k] * geta[j];
        dc[k] = s;
      }
    }
    if (D.lambda > 0.0) value += tether_term(D, uc, i, dc);
    terms[i] = value;
  });
  if (grad) {
    grad->assign(u.size(), 0.0);
    for (std::size_t i = 0; i < nc; ++i)
      for (std::size_t k = 0; k < corners; ++k) (*grad)[D.corner[i * corners + k]] += D.volume * contrib[i * corners + k];
  }
  return kernels::sum(terms) * D.volume;
}

// ---------------------------------------------------------------------------
// Assembled path

MinimizeResult solve_assembled(const Discretization& D, std::vector<double> u, const MinimizeOptions& opts) {
  const Integrand& f = D.problem->spec.integrand;
  const std::size_t nf = D.free_nodes.size();
  const auto corners = static_cast<std::size_t>(D.corners);
  const std::size_t nc = D.cells.size();

  // Element matrices in parallel, assembly serial.
  std::vector<double> element(nc * corners * corners);
  parallel_for(nc, opts.threads, [&](std::size_t i) {
    const std::span<const double> x(D.centers.data() + i * static_cast<std::size_t>(D.n),
                                    static_cast<std::size_t>(D.n));
    const Matrix a = f.coefficients(x);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> op(
        D.op(i), D.m, D.corners);
    Matrix k = D.volume * (op.transpose() * (0.5 * (a + a.transpose())) * op);
    if (D.lambda > 0.0) k.array() += D.volume * D.lambda / static_cast<double>(corners * corners);
    for (std::size_t r = 0; r < corners; ++r)
      for (std::size_t c = 0; c < corners; ++c)
        element[(i * corners + r) * corners + c] = k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  });

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nc * corners * corners);
  std::vector<double> rhs(nf, 0.0);
  for (std::size_t i = 0; i < nc; ++i) {
    const std::size_t* cn = D.corner.data() + i * corners;
    const double* ke = element.data() + i * corners * corners;
    for (std::size_t r = 0; r < corners; ++r) {
      const std::ptrdiff_t fr = D.slot[cn[r]];
      if (fr < 0) continue;
      if (D.lambda > 0.0) rhs[static_cast<std::size_t>(fr)] += D.volume * D.lambda * D.target[i] / D.corners;
      for (std::size_t c = 0; c < corners; ++c) {
        const std::ptrdiff_t fc = D.slot[cn[c]];
        if (fc >= 0)
          triplets.emplace_back(static_cast<int>(fr), static_cast<int>(fc), ke[r * corners + c]);
        else
          rhs[static_cast<std::size_t>(fr)] -= ke[r * corners + c] * u[cn[c]];
      }
    }
  }
  SparseMatrix k(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
  k.setFromTriplets(triplets.begin(), triplets.end());

  std::vector<double> diag(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    diag[i] = k.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (!(diag[i] > 0.0)) throw ConvexityError("minimize: assembled matrix is not positive definite");
  }

  auto matvec = [&](const std::vector<double>& in, std::vector<double>& out) {
    const Eigen::Map<const Vector> vin(in.data(), static_cast<Eigen::Index>(nf));
    Eigen::Map<Vector> vout(out.data(), static_cast<Eigen::Index>(nf));
    vout.noalias() = k * vin;
  };

  std::vector<double> x(nf);
  for (std::size_t i = 0; i < nf; ++i) x[i] = u[D.free_nodes[i]];
  std::vector<double> r(nf), z(nf), d(nf), q(nf);
  matvec(x, q);
  for (std::size_t i = 0; i < nf; ++i) r[i] = rhs[i] - q[i];
  const double rhs_norm = std::sqrt(kernels::dot(rhs, rhs));
  const double stop = opts.grad_tol * (rhs_norm > 0.0 ? rhs_norm : 1.0);

  MinimizeResult out;
  out.method = "conjugate_gradient";
  double rnorm = std::sqrt(kernels::dot(r, r));
  for (std::size_t i = 0; i < nf; ++i) z[i] = r[i] / diag[i];
  d = z;
  double rz = kernels::dot(r, z);
  std::size_t it = 0;
  while (rnorm > stop && it < static_cast<std::size_t>(opts.max_iters)) {
    matvec(d, q);
    const double curvature = kernels::dot(d, q);
    if (!(curvature > 0.0)) throw ConvexityError("minimize: assembled matrix is not positive definite");
    const double alpha = rz / curvature;
    kernels::axpy(alpha, d, x);
    kernels::axpy(-alpha, q, r);
    rnorm = std::sqrt(kernels::dot(r, r));
    ++it;
    if (rnorm <= stop) break;
    for (std::size_t i = 0; i < nf; ++i) z[i] = r[i] / diag[i];
    const double rz_next = kernels::dot(r, z);
    kernels::xpay(z, rz_next / rz, d);
    rz = rz_next;
  }
  // true residual, not the recurrence
  matvec(x, q);
  for (std::size_t i = 0; i < nf; ++i) r[i] = rhs[i] - q[i];
  out.residual = std::sqrt(kernels::dot(r, r)) / (rhs_norm > 0.0 ? rhs_norm : 1.0);
  out.converged = out.residual <= opts.grad_tol * 10.0 || rnorm <= stop;
  out.iterations = it;
  for (std::size_t i = 0; i < nf; ++i) u[D.free_nodes[i]] = x[i];
  out.u = ScalarField(*D.grid, std::move(u));
  return out;
}

// ---------------------------------------------------------------------------
// Descent path: nonlinear conjugate gradients (Polak-Ribiere+).  The trial
// step is a secant on the directional derivative; acceptance is Armijo with
// a roundoff allowance, halving on failure.

MinimizeResult solve_descent(const Discretization& D, std::vector<double> u, const MinimizeOptions& opts) {
  const std::size_t nf = D.free_nodes.size();
  std::vector<double> full_grad;
  std::vector<double> g(nf), g_prev(nf), d(nf), g_trial(nf), trial_u(u);

  auto gather = [&](const std::vector<double>& full, std::vector<double>& out) {
    for (std::size_t i = 0; i < nf; ++i) out[i] = full[D.free_nodes[i]];
  };
  // E and the free gradient at u + alpha d
  auto probe = [&](double alpha, std::vector<double>* grad_out) {
    for (std::size_t i = 0; i < nf; ++i) trial_u[D.free_nodes[i]] = u[D.free_nodes[i]] + alpha * d[i];
    const double e = energy(D, trial_u, grad_out ? &full_grad : nullptr, opts.threads);
    if (grad_out) gather(full_grad, *grad_out);
    return e;
  };

  MinimizeResult out;
  out.method = "descent";
  double e = energy(D, u, &full_grad, opts.threads);
  gather(full_grad, g);
  for (std::size_t i = 0; i < nf; ++i) d[i] = -g[i];
  out.history.push_back(e);

  const double eps = std::numeric_limits<double>::epsilon();
  // Gradient entries this far below the starting gradient are treated as roundoff.
  const double gnoise = 1e-12 * kernels::max_abs(g);
  double alpha_prev = 0.0;
  double slope_prev = 0.0;
  std::size_t it = 0;
  for (; it < static_cast<std::size_t>(opts.max_iters); ++it) {
    const double gmax = kernels::max_abs(g);
    out.residual = gmax / (1.0 + std::fabs(e));
    if (gmax <= opts.grad_tol * (1.0 + std::fabs(e))) {
      out.converged = true;
      break;
    }
    double slope = kernels::dot(g, d);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < nf; ++i) d[i] = -g[i];
      slope = -kernels::dot(g, g);
    }
    // First trial: previous step rescaled by the change in slope, but never
    // so short that u + alpha d rounds back to u.
    const double dmax = kernels::max_abs(d);
    double alpha0 = alpha_prev > 0.0 ? alpha_prev * slope_prev / slope : 1.0 / std::max(1.0, dmax);
    double umax = 0.0;
    for (std::size_t node : D.free_nodes) umax = std::max(umax, std::fabs(u[node]));
    const double alpha_min = 64.0 * eps * (1.0 + umax) / dmax;
    if (!(alpha0 > alpha_min)) alpha0 = alpha_min;

    double dsum = 0.0;
    for (double v : d) dsum += std::fabs(v);
    // Along a line a convex energy stays above its tangent and its slope
    // never decreases; every probe is held to both.
    auto check_convex = [&](double a, double ea, double sa) {
      const double spread = std::fabs(slope) + std::fabs(sa);
      if (sa < slope - 1e-8 * spread - gnoise * dsum || ea < e + a * slope - 1e-8 * (1.0 + std::fabs(e)))
        throw ConvexityError("minimize: energy of " + D.problem->spec.integrand.id() +
                             " is not convex along a descent direction");
    };
    auto probe_checked = [&](double a) {
      const double ea = probe(a, &g_trial);
      check_convex(a, ea, kernels::dot(g_trial, d));
      return ea;
    };

    probe_checked(alpha0);
    const double slope0 = kernels::dot(g_trial, d);
    double alpha = slope0 > slope ? alpha0 * slope / (slope - slope0) : 2.0 * alpha0;
    if (!std::isfinite(alpha) || alpha <= 0.0) alpha = alpha0;

    const double allowance = 8.0 * eps * (1.0 + std::fabs(e));
    auto acceptable = [&](double a, double ea) { return ea <= e && ea <= e + 1e-4 * a * slope + allowance; };
    double e_new = probe_checked(alpha);
    int halvings = 0;
    while (!acceptable(alpha, e_new) && halvings < 60) {
      alpha *= 0.5;
      e_new = probe_checked(alpha);
      ++halvings;
    }
    if (!acceptable(alpha, e_new)) break;  // no representable decrease left

    bool moved = false;
    for (std::size_t i = 0; i < nf; ++i) {
      const double before = u[D.free_nodes[i]];
      u[D.free_nodes[i]] += alpha * d[i];
      moved = moved || u[D.free_nodes[i]] != before;
    }
    if (!moved) break;  // stagnated at roundoff
    if (e_new > e) throw Error("minimize: accepted step increased the energy");
    e = e_new;
    out.history.push_back(e);
    alpha_prev = alpha;
    slope_prev = slope;

    g_prev.swap(g);
    g.swap(g_trial);
    double num = 0.0;
    for (std::size_t i = 0; i < nf; ++i) num += g[i] * (g[i] - g_prev[i]);
    const double den = kernels::dot(g_prev, g_prev);
    double beta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
    if ((it + 1) % std::max<std::size_t>(nf, 1) == 0) beta = 0.0;
    kernels::xpay(g, -beta, d);
    for (double& v : d) v = -v;
  }
  out.iterations = it;
  out.u = ScalarField(*D.grid, std::move(u));
  return out;
}

}  // namespace

double resolve_tether(const EnergyProblem& problem) {
  if (problem.tether) {
    if (!(*problem.tether >= 0.0) || !std::isfinite(*problem.tether))
      throw ArgumentError("minimize: tether lambda must be a finite number >= 0");
    return *problem.tether;
  }
  const CellBlock block = snap(problem.grid, problem.area);
  return degenerate_on_nodes(problem.spec.family, problem.grid, block) ? kDefaultDegenerateTether : 0.0;
}

double problem_energy(const EnergyProblem& problem, const ScalarField& u, double lambda, int threads) {
  const CellBlock block = snap(problem.grid, problem.area);
  double value = evaluate_functional(problem.spec, u, block, threads);
  if (lambda > 0.0) {
    const Discretization D = discretize(problem, lambda);
    const auto corners = static_cast<std::size_t>(D.corners);
    std::vector<double> terms(D.cells.size());
    for (std::size_t i = 0; i < D.cells.size(); ++i) {
      double uc[8];
      for (std::size_t k = 0; k < corners; ++k) uc[k] = u.values[D.corner[i * corners + k]];
      terms[i] = tether_term(D, uc, i, nullptr);
    }
    value += kernels::sum(terms) * D.volume;
  }
  return value;
}

MinimizeResult minimize(const EnergyProblem& problem, const MinimizeOptions& opts) {
  if (opts.max_iters < 0) throw ArgumentError("minimize: max_iters must be >= 0");
  if (!(opts.grad_tol > 0.0)) throw ArgumentError("minimize: grad_tol must be positive");
  const double lambda = resolve_tether(problem);
  const Discretization D = discretize(problem, lambda);
  std::vector<double> u = starting_point(problem, D, opts);

  const bool quadratic = problem.spec.integrand.kind() == IntegrandKind::quadratic;
  MinimizeMethod method = opts.method;
  if (method == MinimizeMethod::automatic)
    method = quadratic && problem.spec.p == 2.0 ? MinimizeMethod::conjugate_gradient : MinimizeMethod::descent;
  if (method == MinimizeMethod::conjugate_gradient && !(quadratic && problem.spec.p == 2.0))
    throw ArgumentError("minimize: the assembled path needs a quadratic integrand with p = 2");

  MinimizeResult out = method == MinimizeMethod::conjugate_gradient ? solve_assembled(D, std::move(u), opts)
                                                                    : solve_descent(D, std::move(u), opts);
  out.lambda = lambda;
  out.untethered_degenerate =
      lambda == 0.0 && degenerate_on_nodes(problem.spec.family, problem.grid, snap(problem.grid, problem.area));
  out.energy = problem_energy(problem, out.u, lambda, opts.threads);
  return out;
}

// ---------------------------------------------------------------------------

double homogenization_oracle_1d(double alpha, double beta, double theta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ArgumentError("homogenization oracle: phases must be positive");
  if (!(theta > 0.0 && theta < 1.0)) throw ArgumentError("homogenization oracle: theta must lie in (0, 1)");
  return 1.0 / (theta / alpha + (1.0 - theta) / beta);
}

Integrand sequence_member(const SequenceSpec& seq, int arity, int h) {
  if (h < 1) throw ArgumentError("sequence: h must be a positive integer");
  if (seq.kind == SequenceKind::autonomous_sequence) {
    if (!seq.member) throw ArgumentError("sequence: no member rule for the autonomous sequence");
    return seq.member(h);
  }
  if (!seq.base) throw ArgumentError("sequence: oscillating sequence needs a base matrix field");
  const MatrixField base = seq.base;
  const double scale = h;
  MatrixField a = [base, scale](std::span<const double> x) {
    double y[3];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = scale * x[i];
      y[i] = t - std::floor(t);
    }
    return base(std::span<const double>(y, x.size()));
  };
  return Integrand::quadratic(arity, a, seq.bounds, "a_h(h=" + std::to_string(h) + ")");
}

namespace {

Grid grid_for(const GridRule& rule, const Box& box, int h) {
  std::vector<int> res;
  for (int d = 0; d < box.dim(); ++d) {
    const auto sd = static_cast<std::size_t>(d);
    int cells = rule.cells;
    if (rule.cells_per_period > 0)
      cells = static_cast<int>(std::ceil(rule.cells_per_period * h * (box.hi[sd] - box.lo[sd]) - 1e-9));
    if (cells < 1) throw ArgumentError("grid rule: need a positive cell count");
    res.push_back(cells + 1);
  }
  return Grid(box, res);
}

}  // namespace

GammaStudyReport gamma_min_study(const SequenceSpec& seq, const EnergyProblem& problem, const GridRule& rule,
                                 const StudyOptions& opts) {
  if (seq.h_list.empty()) throw ArgumentError("gamma study: h_list is empty");
  for (std::size_t i = 0; i < seq.h_list.size(); ++i) {
    if (seq.h_list[i] < 1) throw ArgumentError("gamma study: h values must be positive integers");
    if (i > 0 && seq.h_list[i] <= seq.h_list[i - 1]) throw ArgumentError("gamma study: h_list must increase");
  }
  if (rule.cells <= 0 && rule.cells_per_period <= 0) throw ArgumentError("gamma study: empty grid rule");
  const Box& box = problem.grid.box();
  const int m = problem.spec.family.m();

  if (seq.kind == SequenceKind::oscillating_quadratic) {
    const int hmax = seq.h_list.back();
    const Grid g = grid_for(rule, box, hmax);
    for (int d = 0; d < g.dim(); ++d) {
      const double per_period = g.cells_along(d) / (hmax * (box.hi[static_cast<std::size_t>(d)] -
                                                            box.lo[static_cast<std::size_t>(d)]));
      if (per_period < 8.0 - 1e-9)
        throw ResolutionError("gamma study: " + std::to_string(per_period) +
                              " cells per period at h = " + std::to_string(hmax) + " on axis " +
                              std::to_string(d + 1) + "; at least 8 are required");
    }
  }

  auto build = [&](const Integrand& f, int h) {
    EnergyProblem p{FunctionalSpec(f, problem.spec.family), grid_for(rule, box, h), problem.area, problem.dirichlet,
                    problem.tether, problem.tether_target};
    return p;
  };

  const std::size_t count = seq.h_list.size();
  const bool outer_parallel = resolve_threads(opts.minimize.threads) > 1 && count > 1;
  MinimizeOptions inner = opts.minimize;
  if (outer_parallel) inner.threads = 1;
  std::vector<MinimizeResult> results(count);
  std::vector<double> norms(count);
  std::vector<std::size_t> cells(count);
  parallel_for(count, outer_parallel ? opts.minimize.threads : 1, [&](std::size_t i) {
    const int h = seq.h_list[i];
    const EnergyProblem p = build(sequence_member(seq, m, h), h);
    results[i] = minimize(p, inner);
    norms[i] = sobolev_x_norm(results[i].u, p.spec.family, p.spec.p, snap(p.grid, p.area), inner.threads);
    cells[i] = p.grid.cell_count();
  });

  GammaStudyReport report;
  for (std::size_t i = 0; i < count; ++i) {
    report.rows.push_back({seq.h_list[i], cells[i], results[i].energy, norms[i], 0.0, results[i].iterations});
    if (results[i].untethered_degenerate)
      report.warnings.push_back("h = " + std::to_string(seq.h_list[i]) +
                                ": lambda = 0 on a degenerate family; the minimum is reported, not asserted");
    if (!results[i].converged)
      report.warnings.push_back("h = " + std::to_string(seq.h_list[i]) + ": solver stopped before tolerance (" +
                                std::to_string(results[i].iterations) + " iterations)");
  }

  if (seq.oracle) {
    report.reference = *seq.oracle;
    report.reference_kind = "oracle";
  } else if (seq.limit) {
    const EnergyProblem p = build(*seq.limit, seq.h_list.back());
    report.reference = minimize(p, opts.minimize).energy;
    report.reference_kind = "limit_minimum";
  } else {
    if (count < 3) throw ArgumentError("gamma study: extrapolation needs at least three h values");
    const double e1 = report.rows[count - 3].min_energy;
    const double e2 = report.rows[count - 2].min_energy;
    const double e3 = report.rows[count - 1].min_energy;
    const double d1 = e2 - e1;
    const double d2 = e3 - e2;
    const double denom = d2 - d1;
    report.reference = std::fabs(denom) > 1e-14 * (1.0 + std::fabs(e3)) ? e3 - d2 * d2 / denom : e3;
    report.reference_kind = "extrapolated";
  }

  const double scale = 1.0 + std::fabs(report.reference);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < count; ++i) {
    GammaRow& row = report.rows[i];
    row.gap = std::fabs(row.min_energy - report.reference);
    if (i > 0 && row.gap > 1.05 * report.rows[i - 1].gap + 1e-12 * scale) report.gaps_decreasing = false;
    if (row.gap > 1e-14 * scale) {
      lx.push_back(std::log(static_cast<double>(row.h)));
      ly.push_back(-std::log(row.gap));
    }
  }
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double den = n * sxx - sx * sx;
    if (den > 0.0) report.gap_exponent = (n * sxy - sx * sy) / den;
  }
  report.converged =
      report.gaps_decreasing && report.rows.back().gap <= opts.gap_tolerance * std::max(1.0, std::fabs(report.reference));
  return report;
}

PointwiseLimitReport pointwise_limit_functional_check(const SequenceSpec& seq, const VectorFieldFamily& family,
                                                      const ScalarField& u, const Subdomain& area, double tol) {
  if (seq.kind != SequenceKind::autonomous_sequence || !seq.limit)
    throw ArgumentError("pointwise limit check: needs an autonomous sequence with a limit");
  if (seq.h_list.empty()) throw ArgumentError("pointwise limit check: h_list is empty");
  const CellBlock block = snap(u.grid, area);
  const VectorSampleField xu = x_gradient(u, family);
  PointwiseLimitReport report;
  report.limit_value = evaluate_functional(*seq.limit, xu, block);
  for (std::size_t i = 0; i < seq.h_list.size(); ++i) {
    const int h = seq.h_list[i];
    const Integrand fh = sequence_member(seq, family.m(), h);
    const double v = evaluate_functional(fh, xu, block);
    const double gap = std::fabs(v - report.limit_value);
    report.h.push_back(h);
    report.values.push_back(v);
    report.gaps.push_back(gap);
    const std::vector<double> at{static_cast<double>(h)};
    const double rise = i >= 2 ? std::max(0.0, gap - report.gaps[i - 1]) : 0.0;
    report.check.record(rise, rise > 1e-14 * (1.0 + report.limit_value), at, {});
  }
  const std::vector<double> last{static_cast<double>(seq.h_list.back())};
  const double final_gap = report.gaps.back();
  report.check.record(final_gap > tol ? final_gap : 0.0, final_gap > tol, last, {});
  report.check.passed = report.check.violations == 0;
  return report;
}

CheckReport quadratic_limit_pushforward_check(const MatrixField& a_e, const VectorFieldFamily& family,
                                              const SampleSpec& samples, double tol) {
  std::vector<CheckReport> partial(samples.xs.size());
  parallel_for(samples.xs.size(), samples.threads, [&](std::size_t i) {
    CheckReport& report = partial[i];
    const auto& x = samples.xs[i];
    const Matrix c = coefficient_matrix(family, x);
    if (is_degenerate(c)) {
      ++report.skipped;
      return;
    }
    const Matrix ae = a_e(x);
    if (ae.rows() != family.n() || ae.cols() != family.n())
      throw ArgumentError("pushforward check: a_e must be n x n");
    const Matrix a = quadratic_pushforward(ae, family, x);
    const Matrix proj = horizontal_projection(family, x);
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    report.record(asym, asym > tol * (1.0 + a.cwiseAbs().maxCoeff()), x, {});
    for (const auto& xi : samples.args) {
      if (static_cast<int>(xi.size()) != family.n()) throw ArgumentError("pushforward check: argument size");
      const Eigen::Map<const Vector> v(xi.data(), static_cast<Eigen::Index>(xi.size()));
      const Vector pxi = proj * v;
      const Vector cxi = c * v;
      const double lhs = pxi.dot(ae * pxi);
      const double rhs = cxi.dot(a * cxi);
      const double residual = std::fabs(lhs - rhs);
      report.record(residual, residual > tol * (1.0 + std::fabs(lhs)), x, xi);
    }
  });
  CheckReport total;
  for (const auto& r : partial) total.merge(r);
  total.passed = total.violations == 0;
  return total;
}

}  // namespace xfg

#include "xfg/discrete_sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xfg/errors.hpp"
#include "xfg/expression.hpp"
#include "xfg/kernels.hpp"
#include "xfg/parallel.hpp"

namespace xfg {

ScalarField::ScalarField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count())
    throw ArgumentError("scalar field: " + std::to_string(values.size()) + " values for " +
                        std::to_string(grid.node_count()) + " nodes");
  for (double x : values)
    if (!std::isfinite(x)) throw DomainError("scalar field: values must be finite");
}

ScalarField ScalarField::zeros(const Grid& g) { return ScalarField(g, std::vector<double>(g.node_count(), 0.0)); }

ScalarField ScalarField::sample(const Grid& g, const PointFn& fn) {
  std::vector<double> v(g.node_count());
  std::vector<double> x(static_cast<std::size_t>(g.dim()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    g.node_point(i, x);
    v[i] = fn(x);
  }
  return ScalarField(g, std::move(v));
}

ScalarField ScalarField::from_expression(const Grid& g, const std::string& text) {
  const Expression e = Expression::parse(text, indexed_names("x", g.dim()));
  return sample(g, [&e](std::span<const double> x) { return e.eval(x); });
}

std::span<const double> VectorSampleField::component(int j) const {
  const std::size_t cells = grid.cell_count();
  return {values.data() + static_cast<std::size_t>(j) * cells, cells};
}

std::span<double> VectorSampleField::component(int j) {
  const std::size_t cells = grid.cell_count();
  return {values.data() + static_cast<std::size_t>(j) * cells, cells};
}

VectorSampleField euclidean_gradient(const ScalarField& u, int threads) {
  const Grid& g = u.grid;
  const int n = g.dim();
  const std::size_t cells = g.cell_count();
  const auto row_cells = static_cast<std::size_t>(g.cells_along(0));
  const std::size_t rows = cells / row_cells;

  VectorSampleField out{g, n, std::vector<double>(static_cast<std::size_t>(n) * cells)};
  double inv[3];
  for (int d = 0; d < n; ++d) inv[d] = 1.0 / g.spacing(d);
  const std::span<const double> inv_spacing(inv, static_cast<std::size_t>(n));

  parallel_for(rows, threads, [&](std::size_t r) {
    int cell_ijk[3] = {0, 0, 0};
    g.cell_multi_index(r * row_cells, std::span<int>(cell_ijk, static_cast<std::size_t>(n)));
    kernels::CornerRows corners;
    corners.dim = n;
    for (int k = 0; k < (1 << (n - 1)); ++k) {
      int node_ijk[3] = {0, cell_ijk[1], cell_ijk[2]};
      for (int d = 1; d < n; ++d)
        if (k & (1 << (d - 1))) ++node_ijk[d];
      corners.rows[k] = u.values.data() + g.node_index(std::span<const int>(node_ijk, static_cast<std::size_t>(n)));
    }
    double* dst[3];
    for (int d = 0; d < n; ++d) dst[d] = out.component(d).data() + r * row_cells;
    kernels::gradient_row(corners, row_cells, inv_spacing, dst);
  });
  return out;
}

VectorSampleField x_gradient(const ScalarField& u, const VectorFieldFamily& family, int threads) {
  const Grid& g = u.grid;
  if (g.dim() != family.n()) throw ArgumentError("x_gradient: grid dimension differs from n");
  if (!family.domain().contains(g.box()))
    throw DomainError("x_gradient: grid box " + g.box().describe() + " leaves the domain " +
                      family.domain().describe() + " of " + family.id());
  const VectorSampleField du = euclidean_gradient(u, threads);
  const int m = family.m();
  const int n = family.n();
  const std::size_t cells = g.cell_count();
  VectorSampleField out{g, m, std::vector<double>(static_cast<std::size_t>(m) * cells)};

  if (family.kind() == FamilyKind::euclidean) {
    out.values = du.values;
    return out;
  }
  parallel_for(cells, threads, [&](std::size_t c) {
    double x[3];
    double coeff[9];
    g.cell_center(c, std::span<double>(x, static_cast<std::size_t>(n)));
    family.coefficients(std::span<const double>(x, static_cast<std::size_t>(n)),
                        std::span<double>(coeff, static_cast<std::size_t>(m * n)));
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += coeff[j * n + k] * du.at(c, k);
      out.values[static_cast<std::size_t>(j) * cells + c] = s;
    }
  });
  return out;
}

std::vector<double> cell_averages(const ScalarField& u) {
  const Grid& g = u.grid;
  const std::size_t corners = std::size_t{1} << g.dim();
  std::vector<double> out(g.cell_count());
  std::size_t idx[8];
  for (std::size_t c = 0; c < out.size(); ++c) {
    g.cell_corners(c, std::span<std::size_t>(idx, corners));
    double s = 0.0;
    for (std::size_t k = 0; k < corners; ++k) s += u.values[idx[k]];
    out[c] = s / static_cast<double>(corners);
  }
  return out;
}

namespace {

std::vector<std::size_t> block_cells(const Grid& grid, const std::optional<CellBlock>& block) {
  return (block ? *block : whole(grid)).cells(grid);
}

double lp_accumulate(std::vector<double>& terms, double volume, double p) {
  const double s = kernels::sum(terms) * volume;
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

double pow_abs(double v, double p) {
  const double a = std::fabs(v);
  return p == 2.0 ? a * a : std::pow(a, p);
}

void require_exponent(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ArgumentError("exponent p must be a finite number >= 1");
}

}  // namespace

double lp_norm_cells(const Grid& grid, std::span<const double> cell_values, double p,
                     const std::optional<CellBlock>& block) {
  require_exponent(p);
  if (cell_values.size() != grid.cell_count()) throw ArgumentError("lp_norm_cells: one value per cell expected");
  const auto cells = block_cells(grid, block);
  std::vector<double> terms(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = pow_abs(cell_values[cells[i]], p);
  return lp_accumulate(terms, grid.cell_volume(), p);
}

SobolevXNorm sobolev_x_parts(const ScalarField& u, const VectorFieldFamily& family, double p,
                             const std::optional<CellBlock>& block, int threads) {
  require_exponent(p);
  SobolevXNorm out;
  out.lp = lp_norm_cells(u.grid, cell_averages(u), p, block);
  const VectorSampleField xu = x_gradient(u, family, threads);
  out.total = out.lp;
  for (int j = 0; j < xu.dim; ++j) {
    out.derivatives.push_back(lp_norm_cells(u.grid, xu.component(j), p, block));
    out.total += out.derivatives.back();
  }
  return out;
}

double sobolev_x_norm(const ScalarField& u, const VectorFieldFamily& family, double p,
                      const std::optional<CellBlock>& block, int threads) {
  return sobolev_x_parts(u, family, p, block, threads).total;
}

// ---------------------------------------------------------------------------

double bump(double t) {
  const double a = std::fabs(t);
  if (a >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - a * a));
}

MollifierStencil mollifier_stencil(std::span<const double> spacings, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ArgumentError("mollifier: eps must be positive");
  const int n = static_cast<int>(spacings.size());
  MollifierStencil s;
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) {
    // largest o with o h < eps
    int r = static_cast<int>(std::ceil(eps / spacings[static_cast<std::size_t>(d)])) - 1;
    s.radius.push_back(std::max(r, 0));
    total *= static_cast<std::size_t>(2 * s.radius.back() + 1);
  }
  s.weights.assign(total, 0.0);
  std::vector<int> o(static_cast<std::size_t>(n));
  std::size_t nonzero = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      const auto width = static_cast<std::size_t>(2 * s.radius[static_cast<std::size_t>(d)] + 1);
      const int od = static_cast<int>(rest % width) - s.radius[static_cast<std::size_t>(d)];
      rest /= width;
      const double dx = od * spacings[static_cast<std::size_t>(d)];
      r2 += dx * dx;
    }
    const double w = bump(std::sqrt(r2) / eps);
    s.weights[idx] = w;
    if (w > 0.0) ++nonzero;
  }
  std::vector<double> copy(s.weights);
  const double total_weight = kernels::sum(copy);
  for (double& w : s.weights) w /= total_weight;
  s.identity = nonzero <= 1;
  return s;
}

std::vector<double> mollify_lattice(const Grid& lattice, std::span<const double> values, double eps,
                                    std::vector<std::string>* warnings, int threads) {
  if (values.size() != lattice.node_count()) throw ArgumentError("mollify: one value per lattice node expected");
  const MollifierStencil st = mollifier_stencil(lattice.spacings(), eps);
  if (st.identity) {
    if (warnings) {
      std::ostringstream os;
      os << "mollify: eps = " << eps << " does not exceed the grid spacing; the kernel is the identity";
      warnings->push_back(os.str());
    }
    return std::vector<double>(values.begin(), values.end());
  }

  const int n = lattice.dim();
  const int len = lattice.resolution()[0];
  const std::size_t rows = lattice.node_count() / static_cast<std::size_t>(len);
  const int r0 = st.radius[0];
  const int r1 = n > 1 ? st.radius[1] : 0;
  const int r2 = n > 2 ? st.radius[2] : 0;
  const int res1 = n > 1 ? lattice.resolution()[1] : 1;
  const int res2 = n > 2 ? lattice.resolution()[2] : 1;
  const std::size_t wrow = st.row_length();
  std::vector<double> out(values.size(), 0.0);

  parallel_for(rows, threads, [&](std::size_t r) {
    const int j1 = static_cast<int>(r % static_cast<std::size_t>(res1));
    const int j2 = static_cast<int>(r / static_cast<std::size_t>(res1));
    double* dst = out.data() + r * static_cast<std::size_t>(len);
    for (int o2 = -r2; o2 <= r2; ++o2) {
      const int s2 = j2 + o2;
      if (s2 < 0 || s2 >= res2) continue;
      for (int o1 = -r1; o1 <= r1; ++o1) {
        const int s1 = j1 + o1;
        if (s1 < 0 || s1 >= res1) continue;
        const double* w = st.weights.data() +
                          (static_cast<std::size_t>(o2 + r2) * static_cast<std::size_t>(2 * r1 + 1) +
                           static_cast<std::size_t>(o1 + r1)) * wrow;
        if (w[r0] == 0.0) continue;  // row offset outside the ball
        const double* src = values.data() +
                            (static_cast<std::size_t>(s2) * static_cast<std::size_t>(res1) +
                             static_cast<std::size_t>(s1)) * static_cast<std::size_t>(len);
        for (int i = 0; i < len; ++i) {
          const int lo = std::max(-r0, -i);
          const int hi = std::min(r0, len - 1 - i);
          const auto count = static_cast<std::size_t>(hi - lo + 1);
          dst[i] += kernels::dot(std::span<const double>(w + (lo + r0), count),
                                 std::span<const double>(src + (i + lo), count));
        }
      }
    }
  });
  return out;
}

ScalarField mollify(const ScalarField& u, double eps, std::vector<std::string>* warnings, int threads) {
  return ScalarField(u.grid, mollify_lattice(u.grid, u.values, eps, warnings, threads));
}

MollifierReport mollifier_approx_check(const ScalarField& u, const VectorFieldFamily& family,
                                       std::span<const double> eps_list, const Subdomain& interior, double p,
                                       int threads) {
  require_exponent(p);
  if (eps_list.empty()) throw ArgumentError("mollifier check: eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw ArgumentError("mollifier check: eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw ArgumentError("mollifier check: eps list must be strictly decreasing");
  }
  const double reach = *std::max_element(eps_list.begin(), eps_list.end());
  const Box& outer = u.grid.box();
  if (interior.box.dim() != outer.dim()) throw ArgumentError("mollifier check: interior dimension mismatch");
  for (int d = 0; d < outer.dim(); ++d) {
    const auto sd = static_cast<std::size_t>(d);
    const double slack = 1e-12 * (1.0 + std::fabs(outer.hi[sd] - outer.lo[sd]));
    if (interior.box.lo[sd] - outer.lo[sd] < reach - slack || outer.hi[sd] - interior.box.hi[sd] < reach - slack)
      throw ArgumentError("mollifier check: interior " + interior.box.describe() +
                          " is not eroded by max eps from " + outer.describe());
  }
  const CellBlock block = snap(u.grid, interior);

  MollifierReport report;
  for (double eps : eps_list) {
    ScalarField diff = mollify(u, eps, &report.warnings, threads);
    for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= u.values[i];
    report.eps.push_back(eps);
    report.errors.push_back(sobolev_x_norm(diff, family, p, block, threads));
  }
  for (std::size_t i = 1; i < report.errors.size(); ++i)
    if (report.errors[i] > 1.05 * report.errors[i - 1] + 1e-14) report.monotone = false;
  return report;
}

AffineResidual x_affine_residual(const ScalarField& u, const VectorFieldFamily& family, double p,
                                 const std::optional<CellBlock>& block, int threads) {
  require_exponent(p);
  const VectorSampleField xu = x_gradient(u, family, threads);
  const auto cells = block_cells(u.grid, block);
  const int m = xu.dim;
  const double vol = u.grid.cell_volume();

  auto weighted_mean = [&](const std::vector<double>& w) {
    std::vector<double> c(static_cast<std::size_t>(m), 0.0);
    std::vector<double> terms(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = w[i];
    const double wsum = kernels::sum(terms);
    for (int j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = w[i] * xu.at(cells[i], j);
      c[static_cast<std::size_t>(j)] = kernels::sum(terms) / wsum;
    }
    return c;
  };
  auto distance = [&](std::size_t i, const std::vector<double>& c) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double d = xu.at(cells[i], j) - c[static_cast<std::size_t>(j)];
      s += d * d;
    }
    return std::sqrt(s);
  };

  std::vector<double> w(cells.size(), 1.0);
  std::vector<double> c = weighted_mean(w);
  if (p != 2.0) {
    for (int iter = 0; iter < 500; ++iter) {
      for (std::size_t i = 0; i < cells.size(); ++i) w[i] = std::pow(std::max(distance(i, c), 1e-12), p - 2.0);
      const std::vector<double> next = weighted_mean(w);
      double change = 0.0;
      for (int j = 0; j < m; ++j)
        change = std::max(change, std::fabs(next[static_cast<std::size_t>(j)] - c[static_cast<std::size_t>(j)]));
      c = next;
      if (change <= 1e-15 * (1.0 + std::fabs(c[0]))) break;
    }
  }

  std::vector<double> terms(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = pow_abs(distance(i, c), p);
  AffineResidual out;
  out.c_star = c;
  out.residual = lp_accumulate(terms, vol, p);
  return out;
}

}  // namespace xfg

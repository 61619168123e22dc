#include "xfg/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "xfg/errors.hpp"
#include "xfg/kernels.hpp"
#include "xfg/parallel.hpp"

namespace xfg {

FunctionalSpec::FunctionalSpec(Integrand f, VectorFieldFamily x)
    : integrand(std::move(f)), family(std::move(x)), p(integrand.exponent()) {
  if (integrand.arity() != family.m())
    throw ArgumentError("functional: integrand arity " + std::to_string(integrand.arity()) +
                        " differs from m = " + std::to_string(family.m()) + " of " + family.id());
}

namespace {

template <class F>
double cell_quadrature(const Grid& grid, const std::vector<std::size_t>& cells, int threads, F&& integrand_at) {
  std::vector<double> terms(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) { terms[i] = integrand_at(cells[i]); });
  return kernels::sum(terms) * grid.cell_volume();
}

template <class I>
double quadrature_of(const I& f, const VectorSampleField& field, const std::vector<std::size_t>& cells,
                     int threads) {
  if (field.dim != f.arity()) throw ArgumentError("functional: integrand arity differs from the field dimension");
  const Grid& g = field.grid;
  const int n = g.dim();
  const int m = field.dim;
  return cell_quadrature(g, cells, threads, [&](std::size_t c) {
    double x[3];
    double eta[3];
    g.cell_center(c, std::span<double>(x, static_cast<std::size_t>(n)));
    for (int j = 0; j < m; ++j) eta[j] = field.at(c, j);
    return f(std::span<const double>(x, static_cast<std::size_t>(n)),
             std::span<const double>(eta, static_cast<std::size_t>(m)));
  });
}

}  // namespace

double evaluate_functional(const Integrand& f, const VectorSampleField& xu, const CellBlock& block, int threads) {
  return quadrature_of(f, xu, block.cells(xu.grid), threads);
}

double evaluate_functional(const FunctionalSpec& spec, const ScalarField& u, const CellBlock& block, int threads) {
  return evaluate_functional(spec.integrand, x_gradient(u, spec.family, threads), block, threads);
}

double evaluate_functional(const FunctionalSpec& spec, const ScalarField& u, const Subdomain& area, int threads) {
  return evaluate_functional(spec, u, snap(u.grid, area), threads);
}

double evaluate_euclidean(const EuclideanIntegrand& fe, const ScalarField& u, const Subdomain& area, int threads) {
  const VectorSampleField du = euclidean_gradient(u, threads);
  return quadrature_of(fe, du, snap(u.grid, area).cells(u.grid), threads);
}

double psi_p(const ScalarField& u, const VectorFieldFamily& family, double p, const Subdomain& area, int threads) {
  if (!(p >= 1.0)) throw ArgumentError("psi_p: need p >= 1");
  return evaluate_functional(power_integrand(family.m(), p), x_gradient(u, family, threads), snap(u.grid, area),
                             threads);
}

CheckReport measure_property_check(const FunctionalSpec& spec, const ScalarField& u, const Subdomain& area,
                                   const std::vector<Subdomain>& partition, double tol) {
  if (partition.empty()) throw ArgumentError("measure check: empty partition");
  const Grid& g = u.grid;
  const CellBlock whole_block = snap(g, area);
  const auto whole_cells = whole_block.cells(g);

  std::vector<char> owner(g.cell_count(), 0);
  std::vector<CellBlock> blocks;
  std::size_t covered = 0;
  for (const auto& part : partition) {
    CellBlock b = snap(g, part);
    for (std::size_t d = 0; d < b.begin.size(); ++d)
      if (b.begin[d] < whole_block.begin[d] || b.end[d] > whole_block.end[d])
        throw ArgumentError("measure check: part " + part.box.describe() + " leaves " + area.box.describe());
    for (std::size_t c : b.cells(g)) {
      if (owner[c]) throw ArgumentError("measure check: parts overlap at cell " + std::to_string(c));
      owner[c] = 1;
      ++covered;
    }
    blocks.push_back(std::move(b));
  }
  const bool is_partition = covered == whole_cells.size();

  const VectorSampleField xu = x_gradient(u, spec.family);
  const double total = evaluate_functional(spec.integrand, xu, whole_block);
  CheckReport report;
  double parts_sum = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const double v = evaluate_functional(spec.integrand, xu, blocks[i]);
    parts_sum += v;
    const double excess = std::max(0.0, v - total);
    report.record(excess, excess > tol * (1.0 + total), partition[i].box.lo, {});
  }
  const double super_excess = std::max(0.0, parts_sum - total);
  report.record(super_excess, super_excess > tol * (1.0 + total), area.box.lo, {});
  if (is_partition) {
    const double gap = std::fabs(total - parts_sum);
    report.record(gap, gap > tol * (1.0 + total), area.box.lo, {});
  }
  report.passed = report.violations == 0;
  return report;
}

JensenReport jensen_mollification_check(const FunctionalSpec& spec, const ScalarField& u, double eps,
                                        const Subdomain& inner, const Subdomain& outer, int threads) {
  if (spec.integrand.kind() != IntegrandKind::autonomous)
    throw ArgumentError("jensen check: the integrand must be autonomous");
  if (!(eps > 0.0)) throw ArgumentError("jensen check: eps must be positive");
  const int n = u.grid.dim();
  for (int d = 0; d < n; ++d) {
    const auto sd = static_cast<std::size_t>(d);
    const double slack = 1e-12 * (1.0 + std::fabs(outer.box.hi[sd] - outer.box.lo[sd]));
    if (inner.box.lo[sd] - outer.box.lo[sd] < eps - slack || outer.box.hi[sd] - inner.box.hi[sd] < eps - slack)
      throw ArgumentError("jensen check: " + inner.box.describe() + " is not eroded by eps from " +
                          outer.box.describe());
  }
  const Grid& g = u.grid;
  const CellBlock ob = snap(g, outer);
  const CellBlock ib = snap(g, inner);

  std::vector<double> lo(static_cast<std::size_t>(n));
  std::vector<double> hi(static_cast<std::size_t>(n));
  std::vector<int> res(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    const auto sd = static_cast<std::size_t>(d);
    res[sd] = ob.end[sd] - ob.begin[sd];
    if (res[sd] < 2) throw ArgumentError("jensen check: outer box needs at least two cells per axis");
    lo[sd] = g.cell_center_coord(d, ob.begin[sd]);
    hi[sd] = g.cell_center_coord(d, ob.end[sd] - 1);
  }
  const Grid lattice(Box(lo, hi), res);

  const VectorSampleField xu = x_gradient(u, spec.family, threads);
  const auto outer_cells = ob.cells(g);
  const int m = xu.dim;
  std::vector<std::vector<double>> smooth(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    std::vector<double> w(outer_cells.size());
    for (std::size_t i = 0; i < outer_cells.size(); ++i) w[i] = xu.at(outer_cells[i], j);
    smooth[static_cast<std::size_t>(j)] = mollify_lattice(lattice, w, eps, nullptr, threads);
  }

  const Integrand& f = spec.integrand;
  const auto inner_cells = ib.cells(g);
  JensenReport report;
  report.rhs = quadrature_of(f, xu, outer_cells, threads);
  report.rhs_inner = quadrature_of(f, xu, inner_cells, threads);
  report.lhs = cell_quadrature(g, inner_cells, threads, [&](std::size_t c) {
    int ijk[3] = {0, 0, 0};
    g.cell_multi_index(c, std::span<int>(ijk, static_cast<std::size_t>(n)));
    for (int d = 0; d < n; ++d) ijk[d] -= ob.begin[static_cast<std::size_t>(d)];
    const std::size_t li = lattice.node_index(std::span<const int>(ijk, static_cast<std::size_t>(n)));
    double x[3];
    double eta[3];
    g.cell_center(c, std::span<double>(x, static_cast<std::size_t>(n)));
    for (int j = 0; j < m; ++j) eta[j] = smooth[static_cast<std::size_t>(j)][li];
    return f(std::span<const double>(x, static_cast<std::size_t>(n)),
             std::span<const double>(eta, static_cast<std::size_t>(m)));
  });
  report.passed = report.lhs <= report.rhs + 1e-8 * (1.0 + report.rhs);
  return report;
}

}  // namespace xfg

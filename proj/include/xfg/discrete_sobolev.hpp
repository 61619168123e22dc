#pragma once

// Discrete fields on a Grid and the W^{1,p}_X machinery on them.
//
// Gradients live at cell centres: the Euclidean gradient of a nodal field is
// the corner-averaged forward difference over the 2^n corners of each cell,
// and Xu = C(x_c) Du at the centre x_c.  Norms use midpoint quadrature, with
// the nodal field represented on a cell by its corner average.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xfg/grid.hpp"
#include "xfg/vector_fields.hpp"

namespace xfg {

using PointFn = std::function<double(std::span<const double> x)>;

/// One value per grid node.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  /// Throws ArgumentError on a size mismatch and DomainError on non-finite values.
  ScalarField(Grid g, std::vector<double> v);

  static ScalarField zeros(const Grid& g);
  static ScalarField sample(const Grid& g, const PointFn& fn);
  /// u given as an expression in x1..xn.
  static ScalarField from_expression(const Grid& g, const std::string& text);
};

/// One dim-vector per cell centre, stored component-major:
/// values[j * cell_count + cell].
struct VectorSampleField {
  Grid grid;
  int dim = 0;
  std::vector<double> values;

  std::span<const double> component(int j) const;
  std::span<double> component(int j);
  double at(std::size_t cell, int j) const { return values[static_cast<std::size_t>(j) * grid.cell_count() + cell]; }
};

/// Du per cell.
VectorSampleField euclidean_gradient(const ScalarField& u, int threads = 1);

/// Xu = C(x_c) Du per cell.  Throws DomainError when the grid box leaves the
/// family's domain.
VectorSampleField x_gradient(const ScalarField& u, const VectorFieldFamily& family, int threads = 1);

/// Corner average of u on every cell.
std::vector<double> cell_averages(const ScalarField& u);

/// (sum_cells |cell| |v_c|^p)^{1/p} over the block, v = u on cells.
double lp_norm_cells(const Grid& grid, std::span<const double> cell_values, double p,
                     const std::optional<CellBlock>& block = std::nullopt);

struct SobolevXNorm {
  double lp = 0.0;                  // ||u||_p
  std::vector<double> derivatives;  // ||X_j u||_p
  double total = 0.0;               // lp + sum_j derivatives[j]
};

SobolevXNorm sobolev_x_parts(const ScalarField& u, const VectorFieldFamily& family, double p,
                             const std::optional<CellBlock>& block = std::nullopt, int threads = 1);

/// ||u||_p + sum_j ||X_j u||_p.  Throws ArgumentError for p < 1.
double sobolev_x_norm(const ScalarField& u, const VectorFieldFamily& family, double p,
                      const std::optional<CellBlock>& block = std::nullopt, int threads = 1);

// ---------------------------------------------------------------------------
// Mollification

/// Bump profile exp(-1/(1-t^2)) on |t| < 1, zero outside.
double bump(double t);

/// Discrete mollifier on a lattice with the given spacings: the bump sampled
/// at every offset o with |o h| < eps, normalized to sum 1.
struct MollifierStencil {
  std::vector<int> radius;     // per axis; offsets run over [-radius, radius]
  std::vector<double> weights; // box of offsets, axis 0 fastest
  bool identity = false;       // eps resolved no neighbour

  std::size_t row_length() const { return static_cast<std::size_t>(2 * radius[0] + 1); }
};

MollifierStencil mollifier_stencil(std::span<const double> spacings, double eps);

/// Convolution of the zero extension of `values` (one per lattice node) with
/// the stencil.  Warnings (identity kernel) are appended when a sink is given.
std::vector<double> mollify_lattice(const Grid& lattice, std::span<const double> values, double eps,
                                    std::vector<std::string>* warnings = nullptr, int threads = 1);

ScalarField mollify(const ScalarField& u, double eps, std::vector<std::string>* warnings = nullptr,
                    int threads = 1);

struct MollifierReport {
  std::vector<double> eps;
  std::vector<double> errors;  // W^{1,p}_X norm of mollify(u, eps) - u on the interior
  bool monotone = true;        // no increase beyond 5%
  std::vector<std::string> warnings;
};

/// eps_list must be strictly decreasing and the interior must stay at least
/// max(eps_list) away from the grid boundary; ArgumentError otherwise.
MollifierReport mollifier_approx_check(const ScalarField& u, const VectorFieldFamily& family,
                                       std::span<const double> eps_list, const Subdomain& interior, double p,
                                       int threads = 1);

struct AffineResidual {
  std::vector<double> c_star;
  double residual = 0.0;
};

/// argmin_c ||Xu - c||_p over the grid (or block).  Weighted mean for p = 2,
/// iteratively reweighted averaging otherwise.
AffineResidual x_affine_residual(const ScalarField& u, const VectorFieldFamily& family, double p,
                                 const std::optional<CellBlock>& block = std::nullopt, int threads = 1);

}  // namespace xfg

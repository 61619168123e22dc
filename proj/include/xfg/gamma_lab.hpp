#pragma once

// Minimization of discretized energies
//
//   E(u) = F(u, A) + lambda int_A |u - g~|^p,   u = g on the boundary nodes of A,
//
// and desk experiments on the convergence of minimum values along a
// sequence f_h.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xfg/discrete_sobolev.hpp"
#include "xfg/functionals.hpp"
#include "xfg/integrands.hpp"

namespace xfg {

/// Tether strength used when none is given and the family degenerates on
/// the grid nodes of A.
inline constexpr double kDefaultDegenerateTether = 1e-6;

struct EnergyProblem {
  FunctionalSpec spec;
  Grid grid;
  Subdomain area;
  /// Boundary trace, sampled at the nodes.  Also the starting point.
  PointFn dirichlet;
  /// lambda; unset picks 0, or kDefaultDegenerateTether on degenerate families.
  std::optional<double> tether;
  /// g~; defaults to the Dirichlet function.
  PointFn tether_target;
};

enum class MinimizeMethod { automatic, conjugate_gradient, descent };

struct MinimizeOptions {
  int max_iters = 20000;
  double grad_tol = 1e-10;
  std::uint64_t seed = 0;
  /// Amplitude of seeded uniform noise added to the free nodes of the start.
  double initial_noise = 0.0;
  MinimizeMethod method = MinimizeMethod::automatic;
  int threads = 1;
};

struct MinimizeResult {
  ScalarField u;
  double energy = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double lambda = 0.0;
  /// lambda = 0 on a family that degenerates on the grid nodes of A.
  bool untethered_degenerate = false;
  /// Final relative residual (assembled path) or scaled gradient norm (descent).
  double residual = 0.0;
  /// Energy after every accepted descent step (descent path only).
  std::vector<double> history;
  std::string method;
};

/// E(u) for the problem, with the resolved lambda.
double problem_energy(const EnergyProblem& problem, const ScalarField& u, double lambda, int threads = 1);

/// lambda actually used for the problem.
double resolve_tether(const EnergyProblem& problem);

/// Quadratic integrands with p = 2 go through the assembled sparse system and
/// conjugate gradients; everything else through nonlinear conjugate gradients
/// with an Armijo backtracking line search.  Throws ConvexityError when the
/// energy is seen to be non-convex.
MinimizeResult minimize(const EnergyProblem& problem, const MinimizeOptions& opts = {});

// ---------------------------------------------------------------------------

/// (theta/alpha + (1-theta)/beta)^{-1}
double homogenization_oracle_1d(double alpha, double beta, double theta);

enum class SequenceKind { oscillating_quadratic, autonomous_sequence };

struct SequenceSpec {
  SequenceKind kind = SequenceKind::oscillating_quadratic;
  /// Oscillating: base a(y), 1-periodic in every y_i; a_h(x) = a(h x).
  MatrixField base;
  GrowthBounds bounds;
  /// Autonomous: member for index h, and the limit when known.
  std::function<Integrand(int h)> member;
  std::optional<Integrand> limit;
  std::vector<int> h_list;
  /// Known minimum of the limit problem.
  std::optional<double> oracle;
};

/// Integrand for index h.
Integrand sequence_member(const SequenceSpec& seq, int arity, int h);

struct GridRule {
  /// Fixed cell count per axis, or
  int cells = 0;
  /// cells per period per axis at each h (cells = ceil(cells_per_period * h * length)).
  int cells_per_period = 0;
};

struct GammaRow {
  int h = 0;
  std::size_t cells = 0;
  double min_energy = 0.0;
  double wx_norm = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
};

struct GammaStudyReport {
  std::vector<GammaRow> rows;
  double reference = 0.0;
  /// "oracle", "limit_minimum" or "extrapolated".
  std::string reference_kind;
  /// Least-squares slope of -log gap against log h over the positive gaps.
  std::optional<double> gap_exponent;
  bool gaps_decreasing = true;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct StudyOptions {
  MinimizeOptions minimize;
  /// Verdict threshold on the final gap, relative to max(1, |reference|).
  double gap_tolerance = 0.02;
};

/// Minimizes the problem for every h (in parallel when threads > 1).  The
/// template's spec supplies the family; its integrand is replaced by f_h.
/// Throws ResolutionError when an oscillating sequence has fewer than eight
/// cells per period at the largest h.
GammaStudyReport gamma_min_study(const SequenceSpec& seq, const EnergyProblem& problem, const GridRule& rule,
                                 const StudyOptions& opts = {});

struct PointwiseLimitReport {
  std::vector<int> h;
  std::vector<double> values;
  double limit_value = 0.0;
  std::vector<double> gaps;
  CheckReport check;
};

/// |F_h(u, A) - F(u, A)| along the sequence: monotone from the third member
/// on, final gap <= tol.
PointwiseLimitReport pointwise_limit_functional_check(const SequenceSpec& seq, const VectorFieldFamily& family,
                                                      const ScalarField& u, const Subdomain& area, double tol);

/// Symmetry of the pushed-forward a(x) and <a_e Pi xi, Pi xi> = <a C xi, C xi>
/// on samples; degenerate points are skipped and counted.
CheckReport quadratic_limit_pushforward_check(const MatrixField& a_e, const VectorFieldFamily& family,
                                              const SampleSpec& samples, double tol = 1e-10);

}  // namespace xfg

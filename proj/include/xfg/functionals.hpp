#pragma once

// Local integral functionals F(u, A) = int_A f(x, Xu(x)) dx evaluated by
// midpoint quadrature over the cells of A.

#include <span>
#include <string>
#include <vector>

#include "xfg/discrete_sobolev.hpp"
#include "xfg/integrands.hpp"

namespace xfg {

struct FunctionalSpec {
  Integrand integrand;
  VectorFieldFamily family;
  double p;

  /// Throws ArgumentError unless integrand.arity() == family.m().
  FunctionalSpec(Integrand f, VectorFieldFamily x);
};

/// sum over cells c in A of |c| f(x_c, Xu(x_c)).  Throws DomainError when A
/// leaves the grid.
double evaluate_functional(const FunctionalSpec& spec, const ScalarField& u, const Subdomain& area,
                           int threads = 1);
double evaluate_functional(const FunctionalSpec& spec, const ScalarField& u, const CellBlock& block,
                           int threads = 1);
/// Same quadrature for a precomputed Xu.
double evaluate_functional(const Integrand& f, const VectorSampleField& xu, const CellBlock& block,
                           int threads = 1);

/// sum over cells of |c| f_e(x_c, Du(x_c)).
double evaluate_euclidean(const EuclideanIntegrand& fe, const ScalarField& u, const Subdomain& area,
                          int threads = 1);

/// int_A |Xu|^p
double psi_p(const ScalarField& u, const VectorFieldFamily& family, double p, const Subdomain& area,
             int threads = 1);

/// Additivity over the partition, monotonicity F(u, A_i) <= F(u, A) and
/// superadditivity sum F(u, A_i) <= F(u, A).  The parts must be disjoint at
/// cell level (ArgumentError otherwise); when their union is A the additivity
/// residual must be <= tol (1 + F(u, A)).
CheckReport measure_property_check(const FunctionalSpec& spec, const ScalarField& u, const Subdomain& area,
                                   const std::vector<Subdomain>& partition, double tol = 1e-10);

struct JensenReport {
  double lhs = 0.0;        // int_inner f(rho_eps * w)
  double rhs = 0.0;        // int_outer f(w)
  double rhs_inner = 0.0;  // int_inner f(w)
  bool passed = true;
};

/// w = Xu on the cells of `outer`, mollified componentwise on the cell
/// lattice.  The integrand must be autonomous; inner must sit at least eps
/// inside outer.  Passes when lhs <= rhs + 1e-8 (1 + rhs).
JensenReport jensen_mollification_check(const FunctionalSpec& spec, const ScalarField& u, double eps,
                                        const Subdomain& inner, const Subdomain& outer, int threads = 1);

}  // namespace xfg

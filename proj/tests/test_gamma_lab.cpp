#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "xfg/errors.hpp"
#include "xfg/gamma_lab.hpp"

using namespace xfg;

namespace {

Box unit(int n) { return Box::cube(n, 0, 1); }

PointFn coord(int i) {
  return [i](std::span<const double> x) { return x[static_cast<std::size_t>(i)]; };
}

Integrand scaled_square(int m, double k) {
  return Integrand::autonomous(
      m,
      [k](std::span<const double> e) {
        double s = 0;
        for (double v : e) s += v * v;
        return k * s;
      },
      [k](std::span<const double> e, std::span<double> g) {
        for (std::size_t i = 0; i < e.size(); ++i) g[i] = 2 * k * e[i];
      },
      GrowthBounds{2, std::min(k, 1.0), std::max(k, 2.0)}, "sq");
}

Integrand quadratic_1d(std::function<double(double)> a, std::string id) {
  return Integrand::quadratic(
      1,
      [a](std::span<const double> x) {
        Matrix m(1, 1);
        m(0, 0) = a(x[0]);
        return m;
      },
      GrowthBounds{2, 1, 4}, std::move(id));
}

double two_phase(double t) { return t < 0.5 ? 1.0 : 4.0; }

SequenceSpec two_phase_sequence(std::vector<int> h_list) {
  SequenceSpec seq;
  seq.kind = SequenceKind::oscillating_quadratic;
  seq.base = [](std::span<const double> y) {
    Matrix a(1, 1);
    a(0, 0) = two_phase(y[0]);
    return a;
  };
  seq.bounds = GrowthBounds{2, 1, 4};
  seq.h_list = std::move(h_list);
  seq.oracle = homogenization_oracle_1d(1, 4, 0.5);
  return seq;
}

SequenceSpec j2_sequence(int m, std::vector<int> h_list) {
  SequenceSpec seq;
  seq.kind = SequenceKind::autonomous_sequence;
  seq.member = [m](int h) { return scaled_square(m, 1.0 + 1.0 / h); };
  seq.limit = scaled_square(m, 1.0);
  seq.h_list = std::move(h_list);
  return seq;
}

EnergyProblem line_problem(Integrand f, int cells) {
  const auto e = VectorFieldFamily::euclidean(1, unit(1));
  return EnergyProblem{FunctionalSpec(std::move(f), e), Grid(unit(1), {cells + 1}), Subdomain{unit(1)}, coord(0),
                       std::nullopt, {}};
}

}  // namespace

TEST(Oracle, HarmonicMean) {
  EXPECT_DOUBLE_EQ(homogenization_oracle_1d(1, 4, 0.5), 1.6);
  EXPECT_DOUBLE_EQ(homogenization_oracle_1d(2.5, 2.5, 0.3), 2.5);
}

TEST(Minimize, DirichletIntegralOnALine) {
  const auto f = quadratic_1d([](double) { return 1.0; }, "one");
  for (auto method : {MinimizeMethod::conjugate_gradient, MinimizeMethod::descent}) {
    MinimizeOptions o;
    o.method = method;
    o.initial_noise = 0.1;
    o.seed = 4;
    const auto r = minimize(line_problem(f, 64), o);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy, 1.0, 1e-8);
    for (std::size_t i = 0; i < r.u.values.size(); ++i)
      EXPECT_NEAR(r.u.values[i], r.u.grid.node_point(i)[0], 1e-6);
  }
}

TEST(Minimize, TwoPhaseMatchesDiscreteHarmonicSum) {
  for (int cells : {8, 64, 256}) {
    const auto r = minimize(line_problem(quadratic_1d(two_phase, "two_phase"), cells));
    // Exact discrete minimum: cells in series, (sum h / a_c)^{-1}
    double series = 0;
    const double h = 1.0 / cells;
    for (int c = 0; c < cells; ++c) series += h / two_phase((c + 0.5) * h);
    EXPECT_NEAR(r.energy, 1.0 / series, 1e-10);
    EXPECT_NEAR(r.energy, 1.6, 1e-10);
    EXPECT_EQ(r.method, "conjugate_gradient");
  }
}

TEST(Minimize, GrushinWithAffineTraceFromRandomStarts) {
  const auto gr = VectorFieldFamily::grushin(unit(2));
  const EnergyProblem p{FunctionalSpec(scaled_square(2, 1.0), gr), Grid::uniform(unit(2), 17), Subdomain{unit(2)},
                        coord(0), std::nullopt, {}};
  EXPECT_EQ(resolve_tether(p), kDefaultDegenerateTether);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    MinimizeOptions o;
    o.seed = seed;
    o.initial_noise = 0.3;
    const auto r = minimize(p, o);
    EXPECT_EQ(r.method, "descent");
    EXPECT_NEAR(r.energy, 1.0, 1e-6) << seed;
    EXPECT_FALSE(r.untethered_degenerate);
  }
}

TEST(Minimize, DescentEnergyNeverIncreases) {
  const auto h = VectorFieldFamily::heisenberg(unit(3));
  const EnergyProblem p{FunctionalSpec(power_integrand(2, 3.0), h), Grid::uniform(unit(3), 7), Subdomain{unit(3)},
                        [](std::span<const double> x) { return x[0] * x[1] + std::sin(3 * x[2]); }, std::nullopt, {}};
  MinimizeOptions o;
  o.initial_noise = 0.2;
  o.seed = 9;
  const auto r = minimize(p, o);
  EXPECT_TRUE(r.converged);
  ASSERT_GT(r.history.size(), 2u);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
}

TEST(Minimize, AssembledMinimizerIsOptimal) {
  const auto h = VectorFieldFamily::heisenberg(unit(3));
  const auto q = Integrand::quadratic(
      2,
      [](std::span<const double> x) {
        Matrix a(2, 2);
        a << 2 + x[2], 0.3, 0.3, 1;
        return a;
      },
      GrowthBounds{2, 0.5, 4}, "a");
  const EnergyProblem p{FunctionalSpec(q, h), Grid::uniform(unit(3), 9), Subdomain{unit(3)},
                        [](std::span<const double> x) { return x[0] - x[2] * x[1]; }, 1e-3, {}};
  const auto r = minimize(p);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-10);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1e-3, 1e-3);
  const CellBlock block = snap(p.grid, p.area);
  std::vector<int> ijk(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto v = r.u.values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      p.grid.node_multi_index(i, ijk);
      bool interior = true;
      for (int k = 0; k < 3; ++k)
        interior = interior && ijk[static_cast<std::size_t>(k)] > block.begin[static_cast<std::size_t>(k)] &&
                   ijk[static_cast<std::size_t>(k)] < block.end[static_cast<std::size_t>(k)];
      if (interior) v[i] += d(rng);
    }
    EXPECT_GE(problem_energy(p, ScalarField(p.grid, v), r.lambda), r.energy - 1e-8 * (1 + r.energy));
  }
}

TEST(Minimize, AssembledAndDescentAgree) {
  const auto gr = VectorFieldFamily::grushin(Box::cube(2, 0.5, 1.5));
  const auto q = Integrand::quadratic(2, [](std::span<const double>) { return Matrix(Matrix::Identity(2, 2)); },
                                      GrowthBounds{2, 1, 1}, "id");
  const EnergyProblem p{FunctionalSpec(q, gr), Grid::uniform(gr.domain(), 13), Subdomain{gr.domain()},
                        [](std::span<const double> x) { return std::sin(2 * x[0]) * x[1]; }, std::nullopt, {}};
  MinimizeOptions cg, nd;
  cg.method = MinimizeMethod::conjugate_gradient;
  nd.method = MinimizeMethod::descent;
  const auto a = minimize(p, cg), b = minimize(p, nd);
  EXPECT_NEAR(a.energy, b.energy, 1e-9 * (1 + a.energy));
  EXPECT_EQ(a.lambda, 0.0);
}

TEST(Minimize, NonConvexIntegrandIsDiagnosed) {
  // log(1 + eta^2) is concave for |eta| > 1; u = 5 x sits inside that region
  const auto f = Integrand::autonomous(
      1, [](std::span<const double> e) { return std::log(1.0 + e[0] * e[0]); },
      [](std::span<const double> e, std::span<double> g) { g[0] = 2 * e[0] / (1.0 + e[0] * e[0]); }, GrowthBounds{},
      "log");
  auto p = line_problem(f, 16);
  p.dirichlet = [](std::span<const double> x) { return 5.0 * x[0]; };
  MinimizeOptions o;
  o.initial_noise = 0.01;
  o.seed = 3;
  EXPECT_THROW(minimize(p, o), ConvexityError);
}

TEST(Minimize, IndefiniteAssembledSystemIsDiagnosed) {
  const auto p = line_problem(quadratic_1d([](double) { return -1.0; }, "neg"), 16);
  MinimizeOptions o;
  o.initial_noise = 0.1;
  EXPECT_THROW(minimize(p, o), ConvexityError);
}

TEST(Minimize, ArgumentErrors) {
  auto p = line_problem(quadratic_1d([](double) { return 1.0; }, "one"), 8);
  MinimizeOptions bad;
  bad.grad_tol = 0;
  EXPECT_THROW(minimize(p, bad), ArgumentError);
  p.tether = -1.0;
  EXPECT_THROW(minimize(p), ArgumentError);
  auto q = line_problem(power_integrand(1, 3.0), 8);
  MinimizeOptions cg;
  cg.method = MinimizeMethod::conjugate_gradient;
  EXPECT_THROW(minimize(q, cg), ArgumentError);
  q.dirichlet = [](std::span<const double>) { return NAN; };
  EXPECT_THROW(minimize(q), DomainError);
}

TEST(Minimize, UntetheredDegenerateRunsAreFlagged) {
  const auto gr = VectorFieldFamily::grushin(Box::cube(2, -1, 1));
  EnergyProblem p{FunctionalSpec(scaled_square(2, 1.0), gr), Grid::uniform(gr.domain(), 9), Subdomain{gr.domain()},
                  coord(1), 0.0, {}};
  EXPECT_TRUE(minimize(p).untethered_degenerate);
  p.tether.reset();
  const auto r = minimize(p);
  EXPECT_FALSE(r.untethered_degenerate);
  EXPECT_EQ(r.lambda, kDefaultDegenerateTether);
}

TEST(Minimize, Deterministic) {
  const auto h = VectorFieldFamily::heisenberg(unit(3));
  const EnergyProblem p{FunctionalSpec(power_integrand(2, 2.5), h), Grid::uniform(unit(3), 6), Subdomain{unit(3)},
                        coord(2), std::nullopt, {}};
  MinimizeOptions o;
  o.seed = 12;
  o.initial_noise = 0.1;
  const auto a = minimize(p, o);
  const auto b = minimize(p, o);
  EXPECT_EQ(a.u.values, b.u.values);
  EXPECT_EQ(a.energy, b.energy);
}

TEST(GammaStudy, OscillatingTwoPhaseConvergesToOracle) {
  const auto seq = two_phase_sequence({2, 4, 8});
  const auto p = line_problem(sequence_member(seq, 1, 2), 256);
  const auto r = gamma_min_study(seq, p, GridRule{256, 0});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.reference_kind, "oracle");
  for (const auto& row : r.rows) {
    EXPECT_NEAR(row.min_energy, 1.6, 1e-9);
    EXPECT_TRUE(std::isfinite(row.wx_norm));
  }
  EXPECT_TRUE(r.converged);
}

TEST(GammaStudy, RefusesUnderResolvedOscillation) {
  const auto seq = two_phase_sequence({2, 64});
  const auto p = line_problem(sequence_member(seq, 1, 2), 256);
  EXPECT_THROW(gamma_min_study(seq, p, GridRule{256, 0}), ResolutionError);
  EXPECT_NO_THROW(gamma_min_study(two_phase_sequence({2, 4}), p, GridRule{0, 8}));
}

TEST(GammaStudy, AutonomousScalingGivesInverseHGaps) {
  const auto seq = j2_sequence(1, {1, 2, 4, 8, 16});
  auto p = line_problem(scaled_square(1, 1.0), 32);
  p.dirichlet = [](std::span<const double> x) { return x[0] * x[0]; };
  const auto r = gamma_min_study(seq, p, GridRule{32, 0});
  EXPECT_EQ(r.reference_kind, "limit_minimum");
  for (const auto& row : r.rows) EXPECT_NEAR(row.gap, r.reference / row.h, 1e-8 * r.reference);
  ASSERT_TRUE(r.gap_exponent.has_value());
  EXPECT_NEAR(*r.gap_exponent, 1.0, 1e-6);
  EXPECT_TRUE(r.gaps_decreasing);
}

TEST(GammaStudy, ConstantSequenceHasZeroGap) {
  SequenceSpec seq;
  seq.kind = SequenceKind::autonomous_sequence;
  seq.member = [](int) { return scaled_square(1, 1.0); };
  seq.limit = scaled_square(1, 1.0);
  seq.h_list = {1, 2, 3};
  auto p = line_problem(scaled_square(1, 1.0), 16);
  const auto r = gamma_min_study(seq, p, GridRule{16, 0});
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.min_energy, r.rows.front().min_energy);
    EXPECT_LE(row.gap, 1e-14);
  }
}

TEST(GammaStudy, ExtrapolatedReferenceWithoutLimit) {
  auto seq = j2_sequence(1, {2, 4, 8, 16});
  seq.limit.reset();
  auto p = line_problem(scaled_square(1, 1.0), 16);
  p.dirichlet = [](std::span<const double> x) { return x[0] * x[0]; };
  const auto r = gamma_min_study(seq, p, GridRule{16, 0});
  EXPECT_EQ(r.reference_kind, "extrapolated");
  // energies are (1 + 1/h) E: the tail estimate recovers E
  const double limit = r.rows.back().min_energy / (1 + 1.0 / 16);
  EXPECT_NEAR(r.reference, limit, 1e-8);
}

TEST(GammaStudy, EquicoercivityAndLiminfSurrogates) {
  const auto h = VectorFieldFamily::heisenberg(unit(3));
  const auto seq = j2_sequence(2, {1, 2, 4, 8});
  const EnergyProblem p{FunctionalSpec(scaled_square(2, 1.0), h), Grid::uniform(unit(3), 7), Subdomain{unit(3)},
                        [](std::span<const double> x) { return x[0] * x[1] + x[2]; }, std::nullopt, {}};
  const auto r = gamma_min_study(seq, p, GridRule{6, 0});
  const double data = sobolev_x_norm(ScalarField::sample(p.grid, p.dirichlet), h, 2.0);
  for (const auto& row : r.rows) {
    EXPECT_LE(row.wx_norm, std::sqrt(row.min_energy) * 2 + data);
    // u*_h for index h
    EnergyProblem ph = p;
    ph.spec = FunctionalSpec(seq.member(row.h), h);
    const auto u = minimize(ph).u;
    const double limit_value = evaluate_functional(FunctionalSpec(*seq.limit, h), u, p.area);
    const double member_value = evaluate_functional(ph.spec, u, p.area);
    EXPECT_LE(limit_value, member_value + member_value / row.h);
  }
}

TEST(PointwiseLimit, HeisenbergVerticalCoordinate) {
  const auto h = VectorFieldFamily::heisenberg(unit(3));
  const int cells = 16;
  const auto u = ScalarField::from_expression(Grid::uniform(unit(3), cells + 1), "x3");
  const auto r = pointwise_limit_functional_check(j2_sequence(2, {1, 2, 4, 8, 16, 32}), h, u, Subdomain{unit(3)}, 0.01);
  const double limit = 1.0 / 6 - 1.0 / (24.0 * cells * cells);
  EXPECT_NEAR(r.limit_value, limit, 1e-14);
  for (std::size_t i = 0; i < r.h.size(); ++i) EXPECT_NEAR(r.gaps[i], limit / r.h[i], 1e-10 * limit / r.h[i]);
  EXPECT_TRUE(r.check.passed);
}

TEST(PointwiseLimit, ConstantSequence) {
  const auto gr = VectorFieldFamily::grushin(unit(2));
  SequenceSpec seq;
  seq.kind = SequenceKind::autonomous_sequence;
  seq.member = [](int) { return scaled_square(2, 1.0); };
  seq.limit = scaled_square(2, 1.0);
  seq.h_list = {1, 2, 3, 4};
  const auto u = ScalarField::from_expression(Grid::uniform(unit(2), 9), "x1*x2");
  const auto r = pointwise_limit_functional_check(seq, gr, u, Subdomain{unit(2)}, 1e-14);
  for (double g : r.gaps) EXPECT_LE(g, 1e-14);
}

TEST(PointwiseLimit, VaryingExponent) {
  const auto gr = VectorFieldFamily::grushin(unit(2));
  SequenceSpec seq;
  seq.kind = SequenceKind::autonomous_sequence;
  seq.member = [](int h) { return power_integrand(2, 2.0 + 1.0 / h); };
  seq.limit = power_integrand(2, 2.0);
  seq.h_list = {1, 2, 4, 8, 16, 32, 64};
  const auto u = ScalarField::from_expression(Grid::uniform(unit(2), 17), "sin(x1)+x2^2");
  const auto r = pointwise_limit_functional_check(seq, gr, u, Subdomain{unit(2)}, 0.02);
  EXPECT_TRUE(r.check.passed);
  EXPECT_LT(r.gaps.back(), r.gaps.front());
}

TEST(PushforwardCheck, Examples) {
  SampleSpec s;
  s.args = default_arguments(3, 1);
  const MatrixField ident3 = [](std::span<const double>) { return Matrix(Matrix::Identity(3, 3)); };
  s.xs = {{0, 0, 0}, {0.3, -0.4, 0.9}};
  const auto h = VectorFieldFamily::heisenberg(Box::cube(3, -1, 1));
  EXPECT_TRUE(quadratic_limit_pushforward_check(ident3, h, s).passed);

  const auto e = VectorFieldFamily::euclidean(2, Box::cube(2, -1, 1));
  SampleSpec s2;
  s2.args = default_arguments(2, 1);
  s2.xs = lattice_points(e.domain(), 5);
  const MatrixField ae = [](std::span<const double> x) {
    Matrix a(2, 2);
    a << 2 + x[0], 0.5, 0.5, 1;
    return a;
  };
  const auto r = quadratic_limit_pushforward_check(ae, e, s2);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.worst_residual, 0.0);

  const auto gr = VectorFieldFamily::grushin(Box::cube(2, -2, 2));
  s2.xs = {{2, 0.5}, {0, 1}};
  const MatrixField ident2 = [](std::span<const double>) { return Matrix(Matrix::Identity(2, 2)); };
  const auto g = quadratic_limit_pushforward_check(ident2, gr, s2);
  EXPECT_TRUE(g.passed);
  EXPECT_EQ(g.skipped, 1u);
}

#include <catch2/catch_amalgamated.hpp>

#include "hjb/local_cost.hpp"
#include "hjb/problems.hpp"
#include "hjb/rng.hpp"

using namespace hjb;

namespace {

// Defining identity of the surrogate, evaluated independently:
// beta * I[V](x + h f(x,u)) + h * l(x,u), anchored at the departure node.
double surrogate_reference(const ScalarField& f, const Idx& node, uint32_t sector,
                           const Dynamics& dyn, const RunningCost& cost, double h, const V3& u) {
  const V3 x = f.grid.node(node);
  const V3 arrival = axpy(h, dyn.eval(x, u), x, f.grid.dim());
  const double beta =
      cost.kind == RunningCost::Kind::MinimumTime ? std::exp(-h) : 1.0 - cost.lambda * h;
  const double interp = sector_interpolant(f, node, sector).eval_point(arrival);
  const double stage = cost.kind == RunningCost::Kind::MinimumTime
                           ? 1.0 - beta
                           : h * cost.evaluate(x, u, f.grid.dim(), dyn.m);
  return cost.kind == RunningCost::Kind::MinimumTime ? beta * interp + stage
                                                     : beta * interp + stage;
}

V3 random_in_sector(Rng& rng, const Sector& s) {
  for (;;) {
    V3 u{};
    if (s.geom == Sector::Geom::IntervalBox) {
      for (int j = 0; j < s.m; ++j) u[j] = rng.uniform(s.lo[j], s.hi[j]);
      return u;
    }
    for (int j = 0; j < s.m; ++j) u[j] = rng.uniform(-s.radius, s.radius);
    if (s.contains(u)) return u;
  }
}

}  // namespace

TEST_CASE("zero field kills the interpolant terms", "[local]") {
  Grid g(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.05);
  ScalarField zero(g, 0.0);
  const auto dyn = make_eikonal(2);
  const auto U = ControlSet::ball(2, 1.0);
  RunningCost cost;
  cost.kind = RunningCost::Kind::Quadratic;
  cost.lambda = 0.1;
  cost.gamma2 = 2.0;
  const double h = std::sqrt(2.0) / 4.0 * 0.05;
  const Idx origin{20, 20, 0};
  REQUIRE(g.node(origin)[0] == 0.0);
  for (const auto& s : decompose(dyn, U, g.node(origin))) {
    const LocalCost lc = assemble(zero, origin, s, dyn, cost, h);
    CHECK(lc.quad[0] == Catch::Approx(2 * h).margin(1e-15));
    CHECK(lc.quad[1] == Catch::Approx(2 * h).margin(1e-15));
    CHECK(lc.bilin == 0.0);
    CHECK(lc.lin[0] == 0.0);
    CHECK(lc.lin[1] == 0.0);
    CHECK(lc.constant == 0.0);
    CHECK(lc.family == CostFamily::Quadratic);
  }
}

TEST_CASE("affine field gives the discounted slope in every sector", "[local]") {
  Grid g(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.05);
  auto f = ScalarField::sample(g, [](const V3& x) { return x[0]; });
  const auto dyn = make_eikonal(2);
  const auto U = ControlSet::ball(2, 1.0);
  RunningCost cost;
  cost.lambda = 0.1;
  cost.gamma2 = 2.0;
  const double h = std::sqrt(2.0) / 4.0 * 0.05;
  const double beta = 1.0 - cost.lambda * h;
  const Idx node{8, 31, 0};
  Rng rng(3);
  for (const auto& s : decompose(dyn, U, g.node(node))) {
    const LocalCost lc = assemble(f, node, s, dyn, cost, h);
    CHECK(lc.lin[0] == Catch::Approx(beta * h).epsilon(1e-12));
    CHECK(lc.lin[1] == Catch::Approx(0.0).margin(1e-12));

    // Cross-check the linear term by central differences of the reference.
    const V3 u0 = random_in_sector(rng, s);
    const double du = 1e-6;
    V3 up = u0, um = u0;
    up[0] += du;
    um[0] -= du;
    const double fd = (surrogate_reference(f, node, s.index_set, dyn, cost, h, up) -
                       surrogate_reference(f, node, s.index_set, dyn, cost, h, um)) /
                      (2 * du);
    const double analytic = lc.quad[0] * u0[0] + lc.lin[0];
    CHECK(fd == Catch::Approx(analytic).margin(1e-6));
  }
}

TEST_CASE("minimum time with a flat field reduces to the constant", "[local]") {
  Grid g(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.1);
  ScalarField zero(g, 0.0);
  const auto dyn = make_eikonal(2);
  const auto U = ControlSet::ball(2, 1.0);
  RunningCost cost;
  cost.kind = RunningCost::Kind::MinimumTime;
  const double h = 0.02;
  const Idx node{4, 4, 0};
  Rng rng(17);
  for (const auto& s : decompose(dyn, U, g.node(node))) {
    const LocalCost lc = assemble(zero, node, s, dyn, cost, h);
    CHECK(lc.family == CostFamily::MinTime);
    for (int trial = 0; trial < 20; ++trial) {
      const V3 u = random_in_sector(rng, s);
      CHECK(lc.eval(u) == Catch::Approx(1.0 - std::exp(-h)).margin(1e-14));
    }
  }
}

TEST_CASE("eval matches a hand-expanded polynomial", "[local]") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    LocalCost lc;
    lc.m = 2;
    lc.quad = V3{rng.uniform(0, 2), rng.uniform(0, 2), 0};
    lc.bilin = rng.uniform(-1, 1);
    lc.l1 = V3{rng.uniform(0, 1), rng.uniform(0, 1), 0};
    lc.lin = V3{rng.uniform(-2, 2), rng.uniform(-2, 2), 0};
    lc.constant = rng.uniform(-1, 1);
    const V3 u{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
    const double direct = 0.5 * lc.quad[0] * u[0] * u[0] + lc.bilin * u[0] * u[1] +
                          0.5 * lc.quad[1] * u[1] * u[1] + lc.l1[0] * std::abs(u[0]) +
                          lc.l1[1] * std::abs(u[1]) + lc.lin[0] * u[0] + lc.lin[1] * u[1] +
                          lc.constant;
    CHECK(lc.eval(u) == Catch::Approx(direct).margin(1e-14));
    CHECK(lc.eval(V3{0, 0, 0}) == Catch::Approx(lc.constant).margin(1e-14));

    // Symmetric coefficients: swapping the control components is neutral.
    LocalCost sym = lc;
    sym.quad[1] = sym.quad[0];
    sym.l1[1] = sym.l1[0];
    sym.lin[1] = sym.lin[0];
    CHECK(sym.eval(u) == Catch::Approx(sym.eval(V3{u[1], u[0], 0})).margin(1e-14));
  }
}

TEST_CASE("surrogate fidelity over random nodes, sectors and controls", "[local]") {
  Rng rng(29);
  struct Case {
    Dynamics dyn;
    ControlSet U;
    Grid grid;
    RunningCost cost;
    double h;
  };
  RunningCost quad;
  quad.kind = RunningCost::Kind::Quadratic;
  RunningCost quad_l1;
  quad_l1.kind = RunningCost::Kind::QuadraticL1;
  quad_l1.gamma1 = 0.4;
  RunningCost mt;
  mt.kind = RunningCost::Kind::MinimumTime;

  std::vector<Case> cases;
  cases.push_back({make_eikonal(2), ControlSet::ball(2, 1.0), Grid(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.1),
                   quad, std::sqrt(2.0) / 4.0 * 0.1});
  cases.push_back({make_eikonal(2), ControlSet::ball(2, 1.0), Grid(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.1),
                   quad_l1, std::sqrt(2.0) / 4.0 * 0.1});
  cases.push_back({make_eikonal(2), ControlSet::ball(2, 1.0), Grid(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.1),
                   mt, std::sqrt(2.0) / 4.0 * 0.1});
  cases.push_back({make_triple_integrator(), ControlSet::box(2, V3{-0.3, -0.3, 0}, V3{0.3, 0.3, 0}),
                   Grid(3, V3{-1, -1, -1}, V3{1, 1, 1}, 0.25), quad, 0.05});
  cases.push_back({make_eikonal(3), ControlSet::ball(3, 1.0),
                   Grid(3, V3{-1, -1, -1}, V3{1, 1, 1}, 0.25), quad, 0.125});

  for (const auto& c : cases) {
    ScalarField f(c.grid, 0.0);
    for (auto& v : f.values) v = rng.uniform(-1, 1);
    int checked = 0;
    while (checked < 200) {
      Idx node{};
      for (int a = 0; a < c.grid.dim(); ++a) node[a] = rng.uniform_int(c.grid.count(a));
      const auto sectors = decompose(c.dyn, c.U, c.grid.node(node));
      const auto& s = sectors[rng.uniform_int(static_cast<int>(sectors.size()))];
      if (s.empty) continue;
      const LocalCost lc = assemble(f, node, s, c.dyn, c.cost, c.h);
      const V3 u = random_in_sector(rng, s);
      const double expect = surrogate_reference(f, node, s.index_set, c.dyn, c.cost, c.h, u);
      CHECK(lc.eval(u) == Catch::Approx(expect).margin(1e-12));
      ++checked;
    }
  }
}

TEST_CASE("positive diagonal quadratic surrogates are strictly convex", "[local]") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    LocalCost lc;
    lc.m = 2;
    lc.quad = V3{rng.uniform(0.1, 2), rng.uniform(0.1, 2), 0};
    lc.bilin = 0;
    lc.lin = V3{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
    lc.constant = rng.uniform(-1, 1);
    // Second difference along a random direction must be positive.
    const V3 u{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
    V3 dir{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
    const double n = norm2(dir, 2);
    dir = scale(1.0 / n, dir, 2);
    const double t = 1e-3;
    const double second =
        lc.eval(axpy(t, dir, u, 2)) - 2 * lc.eval(u) + lc.eval(axpy(-t, dir, u, 2));
    CHECK(second > 0.0);
  }
}

TEST_CASE("assemble rejects empty sectors", "[local]") {
  Grid g(3, V3{-1, -1, -1}, V3{1, 1, 1}, 0.5);
  ScalarField f(g, 0.0);
  const auto dyn = make_triple_integrator();
  const auto U = ControlSet::box(2, V3{-0.3, -0.3, 0}, V3{0.3, 0.3, 0});
  RunningCost cost;
  const Idx node{1, 2, 1};  // x2 = 0, x3 = -0.5... pick one with positive x2
  const V3 x = g.node(Idx{1, 3, 1});
  REQUIRE(x[1] > 0);
  const auto sectors = decompose(dyn, U, x);
  bool found_empty = false;
  for (const auto& s : sectors) {
    if (!s.empty) continue;
    found_empty = true;
    CHECK_THROWS_AS(assemble(f, node, s, dyn, cost, 0.05), std::invalid_argument);
  }
  CHECK(found_empty);
}

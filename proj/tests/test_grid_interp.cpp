#include <catch2/catch_amalgamated.hpp>

#include "hjb/grid.hpp"
#include "hjb/interp.hpp"
#include "hjb/rng.hpp"

using namespace hjb;

namespace {

// Independent evaluation through barycentric coordinates on the simplex
// spanned by the node and its signed axis neighbors.
double barycentric_eval(const ScalarField& f, const Idx& node, uint32_t sector, const V3& x) {
  const Grid& g = f.grid;
  const int d = g.dim();
  const V3 x0 = g.node(node);
  double value = 0, w0 = 1;
  for (int a = 0; a < d; ++a) {
    const int s = (sector >> a) & 1u ? 1 : -1;
    Idx nb = node;
    nb[a] += s;
    const double vb = g.in_range(nb) ? f.values[g.flat(nb)] : f.values[g.flat(node)];
    const double w = s * (x[a] - x0[a]) / g.spacing();
    value += w * vb;
    w0 -= w;
  }
  return value + w0 * f.values[g.flat(node)];
}

}  // namespace

TEST_CASE("grid validates spacing and reproduces node coordinates", "[grid]") {
  CHECK_THROWS_AS(Grid(2, V3{0, 0, 0}, V3{1, 1, 0}, 0.3), std::invalid_argument);
  Grid g(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.05);
  CHECK(g.count(0) == 41);
  CHECK(g.count(1) == 41);
  CHECK(g.num_nodes() == 41 * 41);
  const Idx idx{13, 7, 0};
  const V3 x = g.node(idx);
  CHECK(x[0] == -1.0 + 0.05 * 13);
  CHECK(x[1] == -1.0 + 0.05 * 7);
  CHECK(g.flat(g.unflat(g.flat(idx))) == g.flat(idx));
}

TEST_CASE("constant and affine fields are reproduced exactly", "[grid]") {
  Grid g(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.1);
  auto constant = ScalarField::sample(g, [](const V3&) { return 5.0; });
  auto linear = ScalarField::sample(g, [](const V3& x) { return x[0]; });
  for (uint32_t sector : {0u, 1u, 2u, 3u}) {
    const auto si_c = sector_interpolant(constant, Idx{5, 5, 0}, sector);
    CHECK(si_c.slope[0] == 0.0);
    CHECK(si_c.slope[1] == 0.0);
    CHECK(si_c.offset == 5.0);
    const auto si_l = sector_interpolant(linear, Idx{5, 5, 0}, sector);
    CHECK(si_l.slope[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(si_l.slope[1] == Catch::Approx(0.0).margin(1e-12));
    CHECK(si_l.offset == Catch::Approx(g.node(Idx{5, 5, 0})[0]).margin(1e-12));
  }
}

TEST_CASE("interpolant reproduces vertex values and matches the barycentric oracle", "[grid]") {
  Grid g(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.05);
  auto f = ScalarField::sample(g, [](const V3& x) { return 0.6589 * norm2_sq(x, 2); });
  const Idx node{30, 30, 0};  // (0.5, 0.5)
  REQUIRE(g.node(node)[0] == Catch::Approx(0.5));
  const uint32_t sector = 0b11;
  const auto si = sector_interpolant(f, node, sector);

  // Vertex reproduction.
  CHECK(si.eval_point(g.node(node)) == Catch::Approx(f.values[g.flat(node)]).epsilon(1e-12));
  for (int a = 0; a < 2; ++a) {
    Idx nb = node;
    nb[a] += 1;
    CHECK(si.eval_point(g.node(nb)) == Catch::Approx(f.values[g.flat(nb)]).epsilon(1e-12));
  }

  // Arrival inside the simplex, cross-checked against the barycentric form.
  const V3 arrival{0.52, 0.51, 0};
  CHECK(si.eval_point(arrival) ==
        Catch::Approx(barycentric_eval(f, node, sector, arrival)).epsilon(1e-12));
}

TEST_CASE("eval_arrival hits nodal values and linear midpoints", "[grid]") {
  Grid g(2, V3{0, 0, 0}, V3{1, 1, 0}, 0.25);
  ScalarField f(g, 0.0);
  for (int64_t i = 0; i < g.num_nodes(); ++i) f.values[i] = static_cast<double>(i % 7);
  const Idx node{2, 1, 0};
  CHECK(eval_arrival(f, g.node(node)) == f.values[g.flat(node)]);

  // Edge midpoint of two neighbors with values 1 and 3.
  ScalarField f2(g, 0.0);
  f2.values[g.flat(Idx{1, 1, 0})] = 1.0;
  f2.values[g.flat(Idx{2, 1, 0})] = 3.0;
  const V3 mid{0.25 * 1.5, 0.25, 0};
  CHECK(eval_arrival(f2, mid) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("eval_arrival agrees with the explicit per-sector path on random points", "[grid]") {
  Grid g(2, V3{-1, -1, 0}, V3{1, 1, 0}, 0.1);
  Rng rng(1234);
  ScalarField f(g, 0.0);
  for (auto& v : f.values) v = rng.uniform(-2, 2);
  for (int trial = 0; trial < 10000; ++trial) {
    const V3 x{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
    const Idx anchor = g.nearest_node(x);
    const V3 t = sub(x, g.node(anchor), 2);
    const uint32_t sector = displacement_sector(t, 2);
    const double direct = sector_interpolant(f, anchor, sector).eval_displacement(t);
    CHECK(eval_arrival(f, x) == Catch::Approx(direct).margin(1e-12));
  }
}

TEST_CASE("affine reproduction, monotonicity and sector continuity", "[grid]") {
  Rng rng(99);
  for (int dim : {2, 3}) {
    Grid g(dim, V3{-1, -1, -1}, V3{1, 1, 1}, 0.2);
    auto aff = ScalarField::sample(
        g, [](const V3& x) { return 0.3 + 1.7 * x[0] - 0.4 * x[1] + 0.9 * x[2]; });
    for (int trial = 0; trial < 2000; ++trial) {
      V3 x{};
      for (int a = 0; a < dim; ++a) x[a] = rng.uniform(-1, 1);
      const double expect = 0.3 + 1.7 * x[0] - 0.4 * x[1] + (dim == 3 ? 0.9 * x[2] : 0.0);
      CHECK(eval_arrival(aff, x) == Catch::Approx(expect).margin(1e-12));
    }

    // Monotonicity: a point inside a simplex stays within the vertex range.
    ScalarField f(g, 0.0);
    for (auto& v : f.values) v = rng.uniform(-1, 1);
    for (int trial = 0; trial < 2000; ++trial) {
      Idx node{};
      for (int a = 0; a < dim; ++a) node[a] = 1 + rng.uniform_int(g.count(a) - 2);
      const uint32_t sector = static_cast<uint32_t>(rng.uniform_int(1 << dim));
      // Random barycentric weights.
      V3 w{};
      double rest = 1.0;
      for (int a = 0; a < dim; ++a) {
        w[a] = rng.uniform(0, rest);
        rest -= w[a];
      }
      double lo = f.values[g.flat(node)], hi = lo;
      V3 x = g.node(node);
      for (int a = 0; a < dim; ++a) {
        const int s = (sector >> a) & 1u ? 1 : -1;
        Idx nb = node;
        nb[a] += s;
        lo = std::min(lo, f.values[g.flat(nb)]);
        hi = std::max(hi, f.values[g.flat(nb)]);
        x[a] += s * w[a] * g.spacing();
      }
      const double v = sector_interpolant(f, node, sector).eval_point(x);
      CHECK(v >= lo - 1e-12);
      CHECK(v <= hi + 1e-12);
    }

    // Continuity across a sector boundary around the same node.
    for (int trial = 0; trial < 500; ++trial) {
      Idx node{};
      for (int a = 0; a < dim; ++a) node[a] = 1 + rng.uniform_int(g.count(a) - 2);
      const int axis = rng.uniform_int(dim);
      V3 t{};
      for (int a = 0; a < dim; ++a) t[a] = rng.uniform(0, 0.4 * g.spacing());
      t[axis] = 1e-11 * g.spacing();
      V3 t_neg = t;
      t_neg[axis] = -t[axis];
      const uint32_t sec_pos = displacement_sector(t, dim);
      const uint32_t sec_neg = displacement_sector(t_neg, dim);
      const double va = sector_interpolant(f, node, sec_pos).eval_displacement(t);
      const double vb = sector_interpolant(f, node, sec_neg).eval_displacement(t_neg);
      CHECK(va == Catch::Approx(vb).margin(1e-10));
    }
  }
}

TEST_CASE("boundary nodes use the clamped one-sided patch", "[grid]") {
  Grid g(2, V3{0, 0, 0}, V3{1, 1, 0}, 0.5);
  ScalarField f(g, 0.0);
  for (int64_t i = 0; i < g.num_nodes(); ++i) f.values[i] = static_cast<double>(i);
  // Top-right corner, sector pointing outside: zero slope, nodal value.
  const Idx corner{2, 2, 0};
  const auto si = sector_interpolant(f, corner, 0b11);
  CHECK(si.slope[0] == 0.0);
  CHECK(si.slope[1] == 0.0);
  // Arrival beyond the domain clamps onto the corner value.
  CHECK(eval_arrival(f, V3{1.4, 1.4, 0}) == f.values[g.flat(corner)]);
}

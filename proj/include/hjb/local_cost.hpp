#pragma once

// Per-node, per-sector explicit polynomial surrogate of the discretized
// Hamiltonian. Composing the affine sector interpolant with the affine-in-u
// arrival point x + h (g + B u) gives a cost over u of the form
//
//   sum_j quad_j/2 u_j^2 + bilin u_1 u_2 + sum_j l1_j |u_j|
//   + sum_j lin_j u_j + constant,
//
// minimized over the sector's feasible control set.

#include <cmath>
#include <stdexcept>

#include "hjb/control.hpp"
#include "hjb/interp.hpp"

namespace hjb {

struct RunningCost {
  enum class Kind { Quadratic, QuadraticL1, MinimumTime };
  Kind kind = Kind::Quadratic;
  double lambda = 0.1;       // discount rate (unused for minimum time)
  double gamma2 = 2.0;       // quadratic control weight
  double gamma1 = 0.0;       // l1 control weight
  double state_factor = 0.5; // state cost is state_factor * ||x||^2

  void validate() const {
    if (kind == Kind::MinimumTime) return;
    if (!(lambda > 0)) throw std::invalid_argument("running cost: lambda must be positive");
    if (!(gamma2 > 0)) throw std::invalid_argument("running cost: gamma2 must be positive");
    if (gamma1 < 0) throw std::invalid_argument("running cost: gamma1 must be nonnegative");
  }

  double evaluate(const V3& x, const V3& u, int d, int m) const {
    if (kind == Kind::MinimumTime) return 1.0;
    double v = state_factor * norm2_sq(x, d) + 0.5 * gamma2 * norm2_sq(u, m);
    if (kind == Kind::QuadraticL1) v += gamma1 * norm1(u, m);
    return v;
  }
};

enum class CostFamily {
  Quadratic,    // smooth quadratic
  MinTime,      // bilinear/linear only
  L1Only,       // l1 plus bilinear/linear
  QuadraticL1,  // quadratic plus l1
};

struct LocalCost {
  int m = 2;
  V3 quad{};        // diagonal quadratic coefficients
  double bilin = 0; // cross term (m = 2 only)
  V3 l1{};          // nonnegative l1 weights
  V3 lin{};         // linear coefficients
  double constant = 0;
  double discount = 1;  // the beta of the scheme, kept for reporting
  CostFamily family = CostFamily::Quadratic;
  Sector sector;

  double eval(const V3& u) const {
    double v = constant;
    for (int j = 0; j < m; ++j)
      v += 0.5 * quad[j] * u[j] * u[j] + l1[j] * std::abs(u[j]) + lin[j] * u[j];
    if (m == 2) v += bilin * u[0] * u[1];
    return v;
  }

  // Gradient and Hessian of the smooth part (quadratic + bilinear + linear).
  V3 grad_smooth(const V3& u) const {
    V3 g{};
    for (int j = 0; j < m; ++j) g[j] = quad[j] * u[j] + lin[j];
    if (m == 2) {
      g[0] += bilin * u[1];
      g[1] += bilin * u[0];
    }
    return g;
  }
  void hess_smooth(double H[3][3]) const {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) H[a][b] = 0;
    for (int j = 0; j < m; ++j) H[j][j] = quad[j];
    if (m == 2) H[0][1] = H[1][0] = bilin;
  }

  bool smooth() const { return l1[0] == 0 && l1[1] == 0 && l1[2] == 0; }

  static CostFamily classify(const V3& quad, const V3& l1, int m) {
    bool has_quad = false, has_l1 = false;
    for (int j = 0; j < m; ++j) {
      has_quad |= quad[j] != 0;
      has_l1 |= l1[j] != 0;
    }
    if (has_quad && has_l1) return CostFamily::QuadraticL1;
    if (has_quad) return CostFamily::Quadratic;
    if (has_l1) return CostFamily::L1Only;
    return CostFamily::MinTime;
  }
};

// Assembles the surrogate for a sector from pre-evaluated drift and input map.
// For discounted problems beta = 1 - lambda h and the constant carries the
// state cost at the departure point; for minimum time beta = exp(-h) and the
// constant carries 1 - beta.
inline LocalCost assemble_with(const SectorInterpolant& interp, const V3& x, const V3& g, const M3& B,
                               const Sector& sector, const RunningCost& cost, double h, int m) {
  if (sector.empty) throw std::invalid_argument("assemble: sector is empty");
  LocalCost lc;
  lc.m = m;
  lc.sector = sector;
  const int d = interp.dim;
  const double beta =
      cost.kind == RunningCost::Kind::MinimumTime ? std::exp(-h) : 1.0 - cost.lambda * h;
  lc.discount = beta;
  const V3 w = mat_tvec(B, interp.slope, d, m);
  for (int j = 0; j < m; ++j) lc.lin[j] = beta * h * w[j];
  const double interp_offset = interp.offset + h * dot(interp.slope, g, d);
  if (cost.kind == RunningCost::Kind::MinimumTime) {
    lc.constant = beta * interp_offset + (1.0 - beta);
    lc.family = CostFamily::MinTime;
  } else {
    lc.constant = beta * interp_offset + h * cost.state_factor * norm2_sq(x, d);
    for (int j = 0; j < m; ++j) {
      lc.quad[j] = h * cost.gamma2;
      if (cost.kind == RunningCost::Kind::QuadraticL1) lc.l1[j] = h * cost.gamma1;
    }
    lc.family = cost.kind == RunningCost::Kind::QuadraticL1 ? CostFamily::QuadraticL1
                                                            : CostFamily::Quadratic;
  }
  return lc;
}

inline LocalCost assemble(const ScalarField& field, const Idx& node, const Sector& sector,
                          const Dynamics& dyn, const RunningCost& cost, double h) {
  const V3 x = field.grid.node(node);
  return assemble_with(sector_interpolant(field, node, sector.index_set), x, dyn.drift(x),
                       dyn.input_map(x), sector, cost, h, dyn.m);
}

// Off-node variant anchored at a nearby grid node. The offset between the
// query point and the anchor is folded into the drift so the sector
// decomposition and the surrogate stay affine in u.
inline LocalCost assemble_at(const ScalarField& field, const V3& x, const Idx& anchor,
                             const Sector& sector, const Dynamics& dyn, const RunningCost& cost,
                             double h) {
  const V3 anchor_x = field.grid.node(anchor);
  V3 g = dyn.drift(x);
  for (int a = 0; a < dyn.d; ++a) g[a] += (x[a] - anchor_x[a]) / h;
  return assemble_with(sector_interpolant(field, anchor, sector.index_set), x, g, dyn.input_map(x),
                       sector, cost, h, dyn.m);
}

}  // namespace hjb

#pragma once

// Piecewise-linear interpolation over the signed simplex patch around a node.
// For a node x_D and an index set I (bitmask over state axes), the simplex is
// spanned by x_D and the axis neighbors x_D + k e_i for i in I and
// x_D - k e_i otherwise. The interpolant is affine in the displacement from
// x_D; missing neighbors at the domain boundary contribute zero slope, which
// is equivalent to clamping the evaluation point onto the boundary.

#include <cstdint>

#include "hjb/grid.hpp"

namespace hjb {

struct SectorInterpolant {
  uint32_t sector = 0;  // bit i set: positive direction along state axis i
  int dim = 2;
  V3 anchor{};  // node coordinates
  V3 slope{};   // one-sided difference per axis
  double offset = 0;  // nodal value at the anchor

  double eval_displacement(const V3& t) const { return offset + dot(slope, t, dim); }
  double eval_point(const V3& x) const { return eval_displacement(sub(x, anchor, dim)); }
};

// Sign pattern of a displacement; zero components count as positive.
inline uint32_t displacement_sector(const V3& t, int dim) {
  uint32_t mask = 0;
  for (int a = 0; a < dim; ++a)
    if (t[a] >= 0) mask |= (1u << a);
  return mask;
}

inline SectorInterpolant sector_interpolant(const ScalarField& f, const Idx& node, uint32_t sector) {
  const Grid& g = f.grid;
  SectorInterpolant si;
  si.sector = sector;
  si.dim = g.dim();
  si.anchor = g.node(node);
  si.offset = f.values[g.flat(node)];
  const double k = g.spacing();
  for (int a = 0; a < si.dim; ++a) {
    const int s = (sector >> a) & 1u ? 1 : -1;
    Idx nb = node;
    nb[a] += s;
    // Clamped ghost at the boundary: the missing vertex reuses the nodal
    // value, so the slope along that axis vanishes.
    si.slope[a] = g.in_range(nb) ? s * (f.values[g.flat(nb)] - si.offset) / k : 0.0;
  }
  return si;
}

inline double eval_arrival(const ScalarField& f, const V3& x, const Idx& anchor) {
  const V3 xc = f.grid.clamp_point(x);
  const V3 t = sub(xc, f.grid.node(anchor), f.grid.dim());
  const uint32_t sector = displacement_sector(t, f.grid.dim());
  return sector_interpolant(f, anchor, sector).eval_displacement(t);
}

inline double eval_arrival(const ScalarField& f, const V3& x) {
  return eval_arrival(f, x, f.grid.nearest_node(f.grid.clamp_point(x)));
}

}  // namespace hjb

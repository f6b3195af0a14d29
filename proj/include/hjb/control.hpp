#pragma once

// Admissible control sets (Euclidean ball or box), control-affine dynamics
// f(x,u) = g(x) + B(x) u, and the decomposition of the control set into the
// sectors whose arrival points land in a single simplex of the interpolation
// patch. A sector for index set I collects the controls u with
// sign_i (g(x_D)_i + b_i u) >= 0, sign_i = +1 for i in I and -1 otherwise.

#include <cstdint>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <vector>

#include "hjb/common.hpp"
#include "hjb/grid.hpp"

namespace hjb {

// Non-strict inequality slack used throughout the sector machinery.
inline constexpr double kSectorTol = 1e-12;

struct ControlSet {
  enum class Kind { Ball, Box };
  Kind kind = Kind::Ball;
  int m = 2;
  double radius = 1.0;  // ball
  V3 lower{}, upper{};  // box

  static ControlSet ball(int m, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("control set: ball radius must be positive");
    ControlSet u;
    u.kind = Kind::Ball;
    u.m = m;
    u.radius = radius;
    return u;
  }

  static ControlSet box(int m, const V3& lower, const V3& upper) {
    ControlSet u;
    u.kind = Kind::Box;
    u.m = m;
    u.lower = lower;
    u.upper = upper;
    for (int j = 0; j < m; ++j)
      if (!(lower[j] <= 0.0 && 0.0 <= upper[j]))
        throw std::invalid_argument("control set: box must satisfy lower <= 0 <= upper");
    return u;
  }

  bool contains(const V3& u, double tol = kSectorTol) const {
    if (kind == Kind::Ball) return norm2(u, m) <= radius + tol;
    for (int j = 0; j < m; ++j)
      if (u[j] < lower[j] - tol || u[j] > upper[j] + tol) return false;
    return true;
  }
};

struct Dynamics {
  int d = 2;  // state dimension
  int m = 2;  // control dimension
  std::function<V3(const V3&)> drift;      // g(x)
  std::function<M3(const V3&)> input_map;  // B(x), d x m

  V3 eval(const V3& x, const V3& u) const {
    return add(drift(x), mat_vec(input_map(x), u, d, m), d);
  }
};

struct Sector {
  enum class Geom { OrthantBall, IntervalBox, General };

  uint32_t index_set = 0;  // bit i set: i belongs to I
  int d = 2;
  int m = 2;
  bool empty = false;
  Geom geom = Geom::OrthantBall;

  // OrthantBall: per-component sign restriction (-1, 0 = free, +1) and radius.
  std::array<int8_t, 3> sign{};
  double radius = 1.0;

  // IntervalBox: feasible interval per control component.
  V3 lo{}, hi{};

  // Raw half-spaces a.u + b >= 0, kept for containment checks and for the
  // general-geometry fallback.
  int n_half = 0;
  std::array<V3, 3> half_a{};
  V3 half_b{};

  bool satisfies_halfspaces(const V3& u, double tol = kSectorTol) const {
    for (int i = 0; i < n_half; ++i)
      if (dot(half_a[i], u, m) + half_b[i] < -tol) return false;
    return true;
  }

  bool contains(const V3& u, double tol = kSectorTol) const {
    if (empty) return false;
    if (geom == Geom::IntervalBox) {
      for (int j = 0; j < m; ++j)
        if (u[j] < lo[j] - tol || u[j] > hi[j] + tol) return false;
      return true;
    }
    if (geom == Geom::OrthantBall) {
      if (norm2(u, m) > radius + tol) return false;
      for (int j = 0; j < m; ++j) {
        if (sign[j] > 0 && u[j] < -tol) return false;
        if (sign[j] < 0 && u[j] > tol) return false;
      }
      return true;
    }
    return satisfies_halfspaces(u, tol);
  }

  // Feasible sets coincide (used to solve duplicated sectors only once).
  bool same_feasible_set(const Sector& o, double tol = kSectorTol) const {
    if (empty != o.empty) return false;
    if (empty) return true;
    if (geom != o.geom || m != o.m) return false;
    if (geom == Geom::OrthantBall) return sign == o.sign && radius == o.radius;
    if (geom == Geom::IntervalBox) {
      for (int j = 0; j < m; ++j)
        if (std::abs(lo[j] - o.lo[j]) > tol || std::abs(hi[j] - o.hi[j]) > tol) return false;
      return true;
    }
    if (n_half != o.n_half) return false;
    for (int i = 0; i < n_half; ++i) {
      if (std::abs(half_b[i] - o.half_b[i]) > tol) return false;
      for (int j = 0; j < m; ++j)
        if (std::abs(half_a[i][j] - o.half_a[i][j]) > tol) return false;
    }
    return true;
  }
};

// Index sets of {1..d} in lexicographic order of their sorted element lists,
// e.g. d=2: {}, {1}, {1,2}, {2}. Returned as bitmasks.
inline std::vector<uint32_t> sector_mask_order(int d) {
  std::vector<uint32_t> out;
  std::function<void(int, uint32_t)> rec = [&](int next, uint32_t mask) {
    out.push_back(mask);
    for (int i = next; i < d; ++i) rec(i + 1, mask | (1u << i));
  };
  rec(0, 0);
  return out;
}

inline bool index_set_lex_less(uint32_t a, uint32_t b, int d) {
  for (int i = 0; i < d; ++i) {
    const bool ia = (a >> i) & 1u, ib = (b >> i) & 1u;
    if (ia != ib) return ia;  // smaller first element wins
  }
  return false;
}

namespace detail {

// Core of the decomposition, parameterized by the drift value so the same
// machinery serves both on-node and off-node (anchored) local problems.
inline std::vector<Sector> decompose_rows(const V3& g, const M3& B, const ControlSet& U, int d) {
  std::vector<Sector> sectors;
  const auto order = sector_mask_order(d);
  sectors.reserve(order.size());
  for (uint32_t mask : order) {
    Sector s;
    s.index_set = mask;
    s.d = d;
    s.m = U.m;
    s.radius = U.radius;
    if (U.kind == ControlSet::Kind::Ball) {
      s.geom = Sector::Geom::OrthantBall;
    } else {
      s.geom = Sector::Geom::IntervalBox;
      s.lo = U.lower;
      s.hi = U.upper;
    }
    for (int i = 0; i < d && !s.empty; ++i) {
      const int sgn = (mask >> i) & 1u ? 1 : -1;
      // Half-space sgn*(g_i + b_i.u) >= 0.
      V3 a = scale(sgn, B[i], U.m);
      const double b0 = sgn * g[i];
      s.half_a[s.n_half] = a;
      s.half_b[s.n_half] = b0;
      ++s.n_half;

      int nz = -1, nnz = 0;
      for (int j = 0; j < U.m; ++j)
        if (std::abs(B[i][j]) > 1e-14) {
          nz = j;
          ++nnz;
        }
      if (nnz == 0) {
        if (b0 < -kSectorTol) s.empty = true;  // constraint on data alone fails
        continue;
      }
      if (nnz > 1) {
        s.geom = Sector::Geom::General;
        continue;
      }
      const double coef = B[i][nz];
      const double bound = -g[i] / coef;
      const bool lower_bound = sgn * coef > 0;  // u_nz >= bound, else u_nz <= bound
      if (s.geom == Sector::Geom::IntervalBox) {
        if (lower_bound)
          s.lo[nz] = std::max(s.lo[nz], bound);
        else
          s.hi[nz] = std::min(s.hi[nz], bound);
      } else if (s.geom == Sector::Geom::OrthantBall) {
        if (std::abs(bound) <= kSectorTol) {
          const int8_t want = lower_bound ? int8_t{1} : int8_t{-1};
          if (s.sign[nz] == 0)
            s.sign[nz] = want;
          else if (s.sign[nz] != want)
            s.geom = Sector::Geom::General;  // axis pinned to zero, handled generally
        } else {
          s.geom = Sector::Geom::General;  // shifted half-space on a ball
        }
      }
    }
    if (s.geom == Sector::Geom::IntervalBox && !s.empty) {
      for (int j = 0; j < U.m; ++j) {
        if (s.lo[j] > s.hi[j] + kSectorTol) {
          s.empty = true;
          break;
        }
        s.hi[j] = std::max(s.hi[j], s.lo[j]);
      }
    }
    sectors.push_back(s);
  }
  return sectors;
}

}  // namespace detail

// All 2^d sectors at a departure point, in lexicographic index-set order.
// Infeasible sectors are returned with the empty flag set.
inline std::vector<Sector> decompose(const Dynamics& dyn, const ControlSet& U, const V3& x) {
  return detail::decompose_rows(dyn.drift(x), dyn.input_map(x), U, dyn.d);
}

// Projection onto a sign-restricted ball sector: clip the restricted
// components toward their orthant, then rescale into the ball.
inline V3 project_ball_sector(const V3& p, const std::array<int8_t, 3>& sign, double radius, int m) {
  V3 q{};
  for (int j = 0; j < m; ++j) {
    if (sign[j] > 0)
      q[j] = std::max(0.0, p[j]);
    else if (sign[j] < 0)
      q[j] = std::min(0.0, p[j]);
    else
      q[j] = p[j];
  }
  const double n = norm2(q, m);
  if (n > radius) {
    const double f = radius / n;
    for (int j = 0; j < m; ++j) q[j] *= f;
  }
  return q;
}

// Canonical nonnegative-sector projection on the unit ball.
inline V3 project_ball(const V3& p, int m) {
  return project_ball_sector(p, {int8_t{1}, int8_t{1}, int8_t{1}}, 1.0, m);
}

inline V3 project_box_sector(const V3& p, const V3& lo, const V3& hi, int m) {
  V3 q{};
  for (int j = 0; j < m; ++j) q[j] = std::min(hi[j], std::max(lo[j], p[j]));
  return q;
}

inline V3 sector_project(const Sector& s, const V3& p) {
  if (s.geom == Sector::Geom::IntervalBox) return project_box_sector(p, s.lo, s.hi, s.m);
  return project_ball_sector(p, s.sign, s.radius, s.m);
}

// Largest spectral norm of B over the given nodes, via power iteration on
// B^T B (m <= 3, deterministic start).
inline double operator_norm(const M3& B, int d, int m) {
  V3 v{};
  for (int j = 0; j < m; ++j) v[j] = 1.0 / std::sqrt(static_cast<double>(m));
  double lam = 0;
  for (int it = 0; it < 200; ++it) {
    V3 bv = mat_vec(B, v, d, m);
    V3 w = mat_tvec(B, bv, d, m);
    const double nw = norm2(w, m);
    if (nw < 1e-30) return 0.0;
    for (int j = 0; j < m; ++j) v[j] = w[j] / nw;
    if (std::abs(nw - lam) <= 1e-14 * std::max(1.0, nw)) {
      lam = nw;
      break;
    }
    lam = nw;
  }
  return std::sqrt(lam);
}

// Largest admissible time step: (sqrt(2)/2) k / sup ||g + B u||_2, with the
// sup taken over grid nodes and extreme controls. Ball sets use the bound
// ||g|| + radius ||B||; box sets enumerate the corners. Degenerate dynamics
// (sup = 0) yield +inf with a warning.
inline double max_timestep(const Dynamics& dyn, const ControlSet& U, const Grid& grid) {
  double speed = 0;
  for (int64_t i = 0; i < grid.num_nodes(); ++i) {
    const V3 x = grid.node(i);
    const V3 g = dyn.drift(x);
    const M3 B = dyn.input_map(x);
    if (U.kind == ControlSet::Kind::Ball) {
      speed = std::max(speed, norm2(g, dyn.d) + U.radius * operator_norm(B, dyn.d, dyn.m));
    } else {
      const int corners = 1 << U.m;
      for (int c = 0; c < corners; ++c) {
        V3 u{};
        for (int j = 0; j < U.m; ++j) u[j] = (c >> j) & 1 ? U.upper[j] : U.lower[j];
        speed = std::max(speed, norm2(dyn.eval(x, u), dyn.d));
      }
    }
  }
  if (speed <= 0) {
    std::cerr << "max_timestep: dynamics are identically zero, no step restriction\n";
    return kInf;
  }
  return (std::sqrt(2.0) / 2.0) * grid.spacing() / speed;
}

}  // namespace hjb

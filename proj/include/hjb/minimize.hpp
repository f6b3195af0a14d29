#pragma once

// Exact local minimization of the sector surrogates: a first-order
// primal-dual iteration, semismooth Newton methods for the smooth and the
// l1-penalized cases (Euclidean and box constraints), a safeguarded Newton
// search over the parameterized sphere for bilinear/linear costs, a
// sign-splitting reformulation, comparison over finite point sets, and a
// dense enumeration oracle used by tests and benchmarks.

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <vector>

#include "hjb/local_cost.hpp"

namespace hjb {

enum class Method {
  kAuto,
  kComparison,
  kChambollePock,
  kSsnSmooth,
  kSsnL1Ball,
  kSsnL1Box,
  kSphereNewton,
  kSplitting,
};

class ComparisonCache;

struct MinimizerConfig {
  Method method = Method::kAuto;
  double tolerance = 1e-4;
  int max_iters = 500;
  bool warm_start = true;
  bool record_residuals = false;

  // Primal-dual step sizes and extrapolation weight (coupling operator is the
  // identity, so tau*sigma <= 1 is required).
  double cp_tau = 0.7;
  double cp_sigma = 0.7;
  double cp_theta = 1.0;

  // Scale of the gradient step inside the smooth semismooth Newton system;
  // the effective step is theta_scale / max(1, ||hessian||_inf).
  double ssn_theta_scale = 1.0;

  // Width of the regularization tube for the l1 conjugate derivative.
  double l1_epsilon = 1e-3;

  // Comparison point budgets: full-circle/full-sphere counts, scaled down to
  // the angular extent of each sector.
  int cmp_angles = 128;
  int cmp_radii = 10;
  int cmp_az3 = 64;
  int cmp_pol3 = 16;
  int cmp_radii3 = 5;
  int cmp_box_axis = 32;

  const ComparisonCache* cache = nullptr;

  void validate() const {
    if (!(tolerance > 0)) throw std::invalid_argument("minimizer: tolerance must be positive");
    if (!(l1_epsilon > 0)) throw std::invalid_argument("minimizer: epsilon must be positive");
    if (cp_tau * cp_sigma > 1.0 + 1e-12)
      throw std::invalid_argument("minimizer: tau*sigma must not exceed 1");
    if (cp_theta < 0 || cp_theta > 1)
      throw std::invalid_argument("minimizer: theta must lie in [0,1]");
    if (max_iters < 1) throw std::invalid_argument("minimizer: max_iters must be positive");
  }
};

struct MinimizerResult {
  V3 u{};
  double value = kInf;
  int iterations = 0;
  bool converged = false;
  bool fallback = false;  // a substitute routine was used for this sector
  uint32_t sector = 0;
  std::vector<double> residuals;  // optimality-system norms, when recorded
};

// ---------------------------------------------------------------------------
// Point set generation (comparison and oracle).

namespace detail {

inline constexpr double kPi = std::numbers::pi;

// Angular interval of a sign-restricted planar sector.
inline void angular_interval(int8_t s1, int8_t s2, double* a, double* b) {
  if (s1 > 0 && s2 > 0) {
    *a = 0;
    *b = 0.5 * kPi;
  } else if (s1 < 0 && s2 > 0) {
    *a = 0.5 * kPi;
    *b = kPi;
  } else if (s1 < 0 && s2 < 0) {
    *a = kPi;
    *b = 1.5 * kPi;
  } else if (s1 > 0 && s2 < 0) {
    *a = 1.5 * kPi;
    *b = 2.0 * kPi;
  } else if (s1 == 0 && s2 > 0) {
    *a = 0;
    *b = kPi;
  } else if (s1 == 0 && s2 < 0) {
    *a = kPi;
    *b = 2.0 * kPi;
  } else if (s1 > 0 && s2 == 0) {
    *a = -0.5 * kPi;
    *b = 0.5 * kPi;
  } else if (s1 < 0 && s2 == 0) {
    *a = 0.5 * kPi;
    *b = 1.5 * kPi;
  } else {
    *a = 0;
    *b = 2.0 * kPi;
  }
}

inline void polar_interval(int8_t s3, double* a, double* b) {
  if (s3 > 0) {
    *a = 0;
    *b = 0.5 * kPi;
  } else if (s3 < 0) {
    *a = 0.5 * kPi;
    *b = kPi;
  } else {
    *a = 0;
    *b = kPi;
  }
}

}  // namespace detail

// Deterministic point set covering one sector. Ball sectors use a polar or
// spherical grid with cell-centered angles plus the origin; box sectors use a
// per-axis inclusive grid. General sectors filter a full-range grid through
// the half-space list.
inline std::vector<V3> comparison_points(const Sector& s, const MinimizerConfig& cfg) {
  std::vector<V3> pts;
  if (s.empty) return pts;
  if (s.geom == Sector::Geom::IntervalBox) {
    std::array<std::vector<double>, 3> axes;
    int64_t total = 1;
    for (int j = 0; j < s.m; ++j) {
      const int n = s.hi[j] - s.lo[j] < kSectorTol ? 1 : std::max(2, cfg.cmp_box_axis);
      axes[j].resize(n);
      for (int i = 0; i < n; ++i)
        axes[j][i] = n == 1 ? s.lo[j] : s.lo[j] + (s.hi[j] - s.lo[j]) * i / (n - 1);
      total *= n;
    }
    pts.reserve(total);
    for (int64_t f = 0; f < total; ++f) {
      int64_t rem = f;
      V3 u{};
      for (int j = s.m - 1; j >= 0; --j) {
        u[j] = axes[j][rem % axes[j].size()];
        rem /= axes[j].size();
      }
      pts.push_back(u);
    }
    return pts;
  }

  const bool general = s.geom == Sector::Geom::General;
  std::array<int8_t, 3> sg = general ? std::array<int8_t, 3>{} : s.sign;
  double az_a, az_b;
  detail::angular_interval(sg[0], sg[1], &az_a, &az_b);
  const double az_w = az_b - az_a;
  if (s.m == 2) {
    const int na = std::max(1, static_cast<int>(std::lround(cfg.cmp_angles * az_w / (2 * detail::kPi))));
    pts.reserve(static_cast<size_t>(na) * cfg.cmp_radii + 1);
    V3 origin{};
    if (!general || s.satisfies_halfspaces(origin)) pts.push_back(origin);
    for (int ia = 0; ia < na; ++ia) {
      const double th = az_a + az_w * (ia + 0.5) / na;
      for (int ir = 1; ir <= cfg.cmp_radii; ++ir) {
        const double r = s.radius * ir / cfg.cmp_radii;
        V3 u{r * std::cos(th), r * std::sin(th), 0};
        if (general && !s.satisfies_halfspaces(u)) continue;
        pts.push_back(u);
      }
    }
    return pts;
  }
  double pol_a, pol_b;
  detail::polar_interval(sg[2], &pol_a, &pol_b);
  const double pol_w = pol_b - pol_a;
  const int na = std::max(1, static_cast<int>(std::lround(cfg.cmp_az3 * az_w / (2 * detail::kPi))));
  const int np = std::max(1, static_cast<int>(std::lround(cfg.cmp_pol3 * pol_w / detail::kPi)));
  pts.reserve(static_cast<size_t>(na) * np * cfg.cmp_radii3 + 1);
  V3 origin{};
  if (!general || s.satisfies_halfspaces(origin)) pts.push_back(origin);
  for (int ia = 0; ia < na; ++ia) {
    const double az = az_a + az_w * (ia + 0.5) / na;
    for (int ip = 0; ip < np; ++ip) {
      const double pol = pol_a + pol_w * (ip + 0.5) / np;
      for (int ir = 1; ir <= cfg.cmp_radii3; ++ir) {
        const double r = s.radius * ir / cfg.cmp_radii3;
        V3 u{r * std::cos(az) * std::sin(pol), r * std::sin(az) * std::sin(pol), r * std::cos(pol)};
        if (general && !s.satisfies_halfspaces(u)) continue;
        pts.push_back(u);
      }
    }
  }
  return pts;
}

// Shared per-sector point sets; built serially before a sweep, read-only
// afterwards so concurrent node solves can use it without locking.
class ComparisonCache {
 public:
  const std::vector<V3>* find(const Sector& s) const {
    for (const auto& e : entries_)
      if (e.first.same_feasible_set(s)) return &e.second;
    return nullptr;
  }
  const std::vector<V3>& get_or_build(const Sector& s, const MinimizerConfig& cfg) {
    if (const auto* p = find(s)) return *p;
    entries_.emplace_back(s, comparison_points(s, cfg));
    return entries_.back().second;
  }

 private:
  std::vector<std::pair<Sector, std::vector<V3>>> entries_;
};

// ---------------------------------------------------------------------------
// Comparison over an explicit finite point set.

inline MinimizerResult comparison(const LocalCost& lc, const V3* pts, int64_t n_pts) {
  MinimizerResult r;
  r.sector = lc.sector.index_set;
  r.converged = n_pts > 0;
  r.iterations = static_cast<int>(n_pts);  // work measure: evaluation count
  for (int64_t i = 0; i < n_pts; ++i) {
    const double v = lc.eval(pts[i]);
    if (v < r.value) {
      r.value = v;
      r.u = pts[i];
    }
  }
  return r;
}

inline MinimizerResult comparison(const LocalCost& lc, const std::vector<V3>& pts) {
  return comparison(lc, pts.data(), static_cast<int64_t>(pts.size()));
}

inline MinimizerResult comparison_auto(const LocalCost& lc, const MinimizerConfig& cfg) {
  if (cfg.cache != nullptr) {
    if (const auto* pts = cfg.cache->find(lc.sector)) return comparison(lc, *pts);
  }
  return comparison(lc, comparison_points(lc.sector, cfg));
}

// ---------------------------------------------------------------------------
// Dense enumeration oracle (tests and the benchmark command only).

inline MinimizerResult oracle(const LocalCost& lc, int64_t resolution) {
  const Sector& s = lc.sector;
  MinimizerResult r;
  r.sector = s.index_set;
  r.converged = true;
  if (s.empty) return r;
  auto consider = [&](const V3& u) {
    const double v = lc.eval(u);
    if (v < r.value) {
      r.value = v;
      r.u = u;
    }
  };
  const bool general = s.geom == Sector::Geom::General;
  if (s.geom == Sector::Geom::IntervalBox) {
    const int n = std::max(2, static_cast<int>(std::lround(std::pow(double(resolution), 1.0 / s.m))));
    std::array<int, 3> counts{1, 1, 1};
    int64_t total = 1;
    for (int j = 0; j < s.m; ++j) {
      counts[j] = s.hi[j] - s.lo[j] < kSectorTol ? 1 : n;
      total *= counts[j];
    }
    for (int64_t f = 0; f < total; ++f) {
      int64_t rem = f;
      V3 u{};
      for (int j = s.m - 1; j >= 0; --j) {
        const int i = static_cast<int>(rem % counts[j]);
        rem /= counts[j];
        u[j] = counts[j] == 1 ? s.lo[j] : s.lo[j] + (s.hi[j] - s.lo[j]) * i / (counts[j] - 1);
      }
      consider(u);
    }
    return r;
  }
  std::array<int8_t, 3> sg = general ? std::array<int8_t, 3>{} : s.sign;
  double az_a, az_b;
  detail::angular_interval(sg[0], sg[1], &az_a, &az_b);
  if (!general || s.satisfies_halfspaces(V3{})) consider(V3{});
  if (s.m == 2) {
    const int na = std::max(2, static_cast<int>(std::lround(std::sqrt(double(resolution)))));
    const int nr = std::max(1, static_cast<int>(resolution / na));
    for (int ia = 0; ia < na; ++ia) {
      const double th = az_a + (az_b - az_a) * ia / (na - 1);
      const double c = std::cos(th), sn = std::sin(th);
      for (int ir = 1; ir <= nr; ++ir) {
        const double rad = s.radius * ir / nr;
        V3 u{rad * c, rad * sn, 0};
        if (general && !s.satisfies_halfspaces(u)) continue;
        consider(u);
      }
    }
    return r;
  }
  double pol_a, pol_b;
  detail::polar_interval(sg[2], &pol_a, &pol_b);
  const int n = std::max(2, static_cast<int>(std::lround(std::cbrt(double(resolution)))));
  for (int ia = 0; ia < n; ++ia) {
    const double az = az_a + (az_b - az_a) * ia / (n - 1);
    for (int ip = 0; ip < n; ++ip) {
      const double pol = pol_a + (pol_b - pol_a) * ip / (n - 1);
      const V3 dir{std::cos(az) * std::sin(pol), std::sin(az) * std::sin(pol), std::cos(pol)};
      for (int ir = 1; ir <= n; ++ir) {
        const double rad = s.radius * ir / n;
        V3 u = scale(rad, dir, 3);
        if (general && !s.satisfies_halfspaces(u)) continue;
        consider(u);
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Canonicalization: sign flips plus scaling to the unit ball, so the Newton
// style routines only ever see the all-nonnegative unit-ball sector.

namespace detail {

struct BallCanon {
  int m = 2;
  double radius = 1;
  V3 flip{1, 1, 1};
  V3 quad{}, lin{}, l1{};
  double bilin = 0;
  std::array<bool, 3> constrained{};

  static BallCanon from(const LocalCost& lc) {
    BallCanon c;
    c.m = lc.m;
    c.radius = lc.sector.radius;
    const double r = c.radius, r2 = r * r;
    for (int j = 0; j < lc.m; ++j) {
      c.flip[j] = lc.sector.sign[j] < 0 ? -1.0 : 1.0;
      c.constrained[j] = lc.sector.sign[j] != 0;
      c.quad[j] = lc.quad[j] * r2;
      c.lin[j] = lc.lin[j] * c.flip[j] * r;
      c.l1[j] = lc.l1[j] * r;
    }
    c.bilin = lc.m == 2 ? lc.bilin * c.flip[0] * c.flip[1] * r2 : 0.0;
    return c;
  }

  V3 to_original(const V3& v) const {
    V3 u{};
    for (int j = 0; j < m; ++j) u[j] = flip[j] * radius * v[j];
    return u;
  }
  V3 to_canonical(const V3& u) const {
    V3 v{};
    for (int j = 0; j < m; ++j) v[j] = flip[j] * u[j] / radius;
    return v;
  }

  V3 grad(const V3& v) const {
    V3 g{};
    for (int j = 0; j < m; ++j) g[j] = quad[j] * v[j] + lin[j];
    if (m == 2) {
      g[0] += bilin * v[1];
      g[1] += bilin * v[0];
    }
    return g;
  }
  double hess_inf() const {
    double h = 0;
    for (int j = 0; j < m; ++j) h = std::max(h, std::abs(quad[j]) + (m == 2 ? std::abs(bilin) : 0.0));
    return h;
  }

  // Clip of restricted components followed by unit-ball rescaling.
  V3 project(const V3& v) const {
    V3 q{};
    for (int j = 0; j < m; ++j) q[j] = constrained[j] ? std::max(0.0, v[j]) : v[j];
    const double n = norm2(q, m);
    if (n > 1.0)
      for (int j = 0; j < m; ++j) q[j] /= n;
    return q;
  }

  V3 start(const MinimizerConfig& cfg, const V3* warm, const Sector& sec) const {
    if (cfg.warm_start && warm != nullptr) return project(to_canonical(sector_project(sec, *warm)));
    int nc = 0;
    for (int j = 0; j < m; ++j) nc += constrained[j] ? 1 : 0;
    V3 v{};
    if (nc == 0) return v;
    for (int j = 0; j < m; ++j) v[j] = constrained[j] ? 0.5 / std::sqrt(double(nc)) : 0.0;
    return v;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// First-order primal-dual iteration (resolvent form). Requires a smooth
// convex surrogate; the sector enters through its projection.

inline MinimizerResult chambolle_pock(const LocalCost& lc, const MinimizerConfig& cfg,
                                      const V3* warm = nullptr) {
  MinimizerResult r;
  r.sector = lc.sector.index_set;
  const int m = lc.m;
  const double tau = cfg.cp_tau, sigma = cfg.cp_sigma, theta = cfg.cp_theta;

  V3 u{};
  if (cfg.warm_start && warm != nullptr) {
    u = sector_project(lc.sector, *warm);
  } else if (lc.sector.geom == Sector::Geom::IntervalBox) {
    for (int j = 0; j < m; ++j) u[j] = 0.5 * (lc.sector.lo[j] + lc.sector.hi[j]);
  } else {
    int nc = 0;
    for (int j = 0; j < m; ++j) nc += lc.sector.sign[j] != 0 ? 1 : 0;
    if (nc > 0)
      for (int j = 0; j < m; ++j)
        u[j] = lc.sector.sign[j] != 0 ? lc.sector.sign[j] * 0.5 * lc.sector.radius / std::sqrt(double(nc))
                                      : 0.0;
  }
  V3 ubar = u, y{};

  // (I + (1/sigma) dF)^{-1}: solve (sigma I + Q) w = sigma z - lin.
  auto resolvent = [&](const V3& z) {
    V3 w{};
    if (m == 2 && lc.bilin != 0) {
      const double a00 = sigma + lc.quad[0], a11 = sigma + lc.quad[1], a01 = lc.bilin;
      const double det = a00 * a11 - a01 * a01;
      const double b0 = sigma * z[0] - lc.lin[0], b1 = sigma * z[1] - lc.lin[1];
      w[0] = (a11 * b0 - a01 * b1) / det;
      w[1] = (a00 * b1 - a01 * b0) / det;
      return w;
    }
    for (int j = 0; j < m; ++j) w[j] = (sigma * z[j] - lc.lin[j]) / (sigma + lc.quad[j]);
    return w;
  };

  for (int it = 1; it <= cfg.max_iters; ++it) {
    V3 z{};
    for (int j = 0; j < m; ++j) z[j] = y[j] / sigma + ubar[j];
    const V3 w = resolvent(z);
    V3 y_next{};
    for (int j = 0; j < m; ++j) y_next[j] = y[j] + sigma * ubar[j] - sigma * w[j];
    V3 u_arg{};
    for (int j = 0; j < m; ++j) u_arg[j] = u[j] - tau * y_next[j];
    const V3 u_next = sector_project(lc.sector, u_arg);
    V3 ubar_next{};
    for (int j = 0; j < m; ++j) ubar_next[j] = u_next[j] + theta * (u_next[j] - u[j]);

    double disp = 0;
    for (int j = 0; j < m; ++j) {
      disp += (y_next[j] - y[j]) * (y_next[j] - y[j]);
      disp += (u_next[j] - u[j]) * (u_next[j] - u[j]);
      disp += (ubar_next[j] - ubar[j]) * (ubar_next[j] - ubar[j]);
    }
    y = y_next;
    u = u_next;
    ubar = ubar_next;
    r.iterations = it;
    if (std::sqrt(disp) < cfg.tolerance) {
      r.converged = true;
      break;
    }
  }
  r.u = u;
  r.value = lc.eval(u);
  return r;
}

// ---------------------------------------------------------------------------
// Semismooth Newton for the smooth family on ball sectors. Solves
// E(u,p,beta) = (beta u - clip(p); u - theta grad F(u) - p; beta - max(1, ||clip(p)||)) = 0.

inline MinimizerResult ssn_smooth(const LocalCost& lc, const MinimizerConfig& cfg,
                                  const V3* warm = nullptr) {
  MinimizerResult r;
  r.sector = lc.sector.index_set;
  const auto c = detail::BallCanon::from(lc);
  const int m = c.m, n = 2 * m + 1;
  const double theta = cfg.ssn_theta_scale / std::max(1.0, c.hess_inf());

  V3 u = c.start(cfg, warm, lc.sector);
  V3 p{};
  {
    const V3 g = c.grad(u);
    for (int j = 0; j < m; ++j) p[j] = u[j] - theta * g[j];
  }
  auto clip = [&](const V3& q) {
    V3 t{};
    for (int j = 0; j < m; ++j) t[j] = c.constrained[j] ? std::max(0.0, q[j]) : q[j];
    return t;
  };
  double beta = std::max(1.0, norm2(clip(p), m));

  double H[3][3] = {};
  for (int j = 0; j < m; ++j) H[j][j] = c.quad[j];
  if (m == 2) H[0][1] = H[1][0] = c.bilin;

  auto residual = [&](const V3& uu, const V3& pp, double bb, double* E) {
    const V3 t = clip(pp);
    const V3 g = c.grad(uu);
    for (int j = 0; j < m; ++j) E[j] = bb * uu[j] - t[j];
    for (int j = 0; j < m; ++j) E[m + j] = uu[j] - theta * g[j] - pp[j];
    E[2 * m] = bb - std::max(1.0, norm2(t, m));
  };

  double E[7], J[49], delta[7];
  bool singular = false;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    residual(u, p, beta, E);
    double en = 0;
    for (int i = 0; i < n; ++i) en += E[i] * E[i];
    en = std::sqrt(en);
    if (cfg.record_residuals) r.residuals.push_back(en);
    if (en < 1e-15) {
      r.converged = true;
      r.iterations = it - 1;
      break;
    }

    const V3 t = clip(p);
    const double mc = norm2(t, m);
    for (int i = 0; i < n * n; ++i) J[i] = 0;
    for (int j = 0; j < m; ++j) {
      // d(beta u - clip(p)).
      J[j * n + j] = beta;
      const double dj = c.constrained[j] ? (p[j] >= 0 ? 1.0 : 0.0) : 1.0;
      J[j * n + (m + j)] = -dj;
      J[j * n + 2 * m] = u[j];
      // d(u - theta grad F - p).
      for (int k = 0; k < m; ++k) J[(m + j) * n + k] = (j == k ? 1.0 : 0.0) - theta * H[j][k];
      J[(m + j) * n + (m + j)] -= 1.0;
      // d(beta - max(1, ||clip(p)||)).
      if (mc >= 1.0) J[2 * m * n + (m + j)] = -t[j] / mc;
    }
    J[2 * m * n + 2 * m] = 1.0;

    for (int i = 0; i < n; ++i) delta[i] = -E[i];
    if (!solve_dense(n, J, delta)) {
      singular = true;
      break;
    }
    for (int j = 0; j < m; ++j) u[j] += delta[j];
    for (int j = 0; j < m; ++j) p[j] += delta[m + j];
    beta += delta[2 * m];
    r.iterations = it;

    double step = 0;
    for (int i = 0; i < n; ++i) step += delta[i] * delta[i];
    if (std::sqrt(step) < cfg.tolerance) {
      r.converged = true;
      break;
    }
  }
  if (singular) {
    MinimizerResult cp = chambolle_pock(lc, cfg, warm);
    cp.fallback = true;
    return cp;
  }
  if (cfg.record_residuals) {
    residual(u, p, beta, E);
    double en = 0;
    for (int i = 0; i < n; ++i) en += E[i] * E[i];
    r.residuals.push_back(std::sqrt(en));
  }
  r.u = c.to_original(c.project(u));
  r.value = lc.eval(r.u);
  return r;
}

// ---------------------------------------------------------------------------
// Minimization of a bilinear/linear cost over a ball sector: all minimizers
// sit on the sphere or at the origin, so compare the origin against a
// safeguarded 1D Newton search on the restriction to the sector's arc.

inline MinimizerResult sphere_newton(const LocalCost& lc, const MinimizerConfig& cfg,
                                     const V3* warm = nullptr) {
  MinimizerResult r;
  r.sector = lc.sector.index_set;
  r.converged = true;
  const double rho = lc.sector.radius;
  double a, b;
  detail::angular_interval(lc.sector.sign[0], lc.sector.sign[1], &a, &b);

  const double d1 = lc.lin[0], d2 = lc.lin[1], bb = lc.bilin;
  auto dF = [&](double phi) {
    return -d1 * rho * std::sin(phi) + d2 * rho * std::cos(phi) + bb * rho * rho * std::cos(2 * phi);
  };
  auto d2F = [&](double phi) {
    return -d1 * rho * std::cos(phi) - d2 * rho * std::sin(phi) - 2 * bb * rho * rho * std::sin(2 * phi);
  };

  std::array<double, 3> starts{};
  int n_starts = 0;
  if (bb == 0.0) {
    double phi0 = 0.5 * (a + b);
    if (cfg.warm_start && warm != nullptr && norm2(*warm, 2) > 1e-12) {
      phi0 = std::atan2((*warm)[1], (*warm)[0]);
      while (phi0 < a) phi0 += 2 * detail::kPi;
      if (phi0 > b) phi0 = std::abs(phi0 - b) < std::abs(phi0 - 2 * detail::kPi - a) ? b : a;
    }
    starts[n_starts++] = phi0;
  } else {
    starts[n_starts++] = a + 0.2 * (b - a);
    starts[n_starts++] = 0.5 * (a + b);
    starts[n_starts++] = a + 0.8 * (b - a);
  }

  const double angle_tol = std::max(1e-13, cfg.tolerance / std::max(1.0, rho));
  int steps = 0;
  double best_v = lc.eval(V3{});  // origin candidate
  V3 best_u{};
  auto consider_angle = [&](double phi) {
    const V3 u{rho * std::cos(phi), rho * std::sin(phi), 0};
    const double v = lc.eval(u);
    if (v < best_v) {
      best_v = v;
      best_u = u;
    }
  };
  consider_angle(a);
  consider_angle(b);
  for (int si = 0; si < n_starts; ++si) {
    double phi = starts[si];
    for (int it = 0; it < 30; ++it) {
      const double h2 = d2F(phi);
      if (std::abs(h2) < 1e-14) break;
      const double step = -dF(phi) / h2;
      phi = std::min(b, std::max(a, phi + step));
      ++steps;
      if (std::abs(step) < angle_tol) break;
    }
    consider_angle(phi);
  }
  r.iterations = steps;
  r.u = best_u;
  r.value = best_v;
  return r;
}

// ---------------------------------------------------------------------------
// Semismooth Newton for l1-penalized costs on ball sectors (m = 2, equal
// weights). Works on the coupled system q = -grad E(u), u = map_eps(q) where
// map_eps is the epsilon-regularized derivative of the conjugate of
// alpha ||u||_1 plus the sector indicator:
//
//   t = max(0, q - alpha),  map_eps(q) = t / max(eps, ||t||).
//
// This closed form reproduces the piecewise case table (dead zone, one-sided
// shrinkage, arc regime, ramps of width eps, radial corner disk) and is
// continuous everywhere.

inline MinimizerResult ssn_l1_ball(const LocalCost& lc, const MinimizerConfig& cfg,
                                   const V3* warm = nullptr) {
  MinimizerResult r;
  r.sector = lc.sector.index_set;
  const auto c = detail::BallCanon::from(lc);
  const double eps = cfg.l1_epsilon;
  const double alpha = 0.5 * (c.l1[0] + c.l1[1]);

  auto map_eps = [&](const V3& q) {
    V3 t{std::max(0.0, q[0] - alpha), std::max(0.0, q[1] - alpha), 0};
    const double nt = norm2(t, 2);
    const double s = std::max(eps, nt);
    return V3{t[0] / s, t[1] / s, 0};
  };
  auto dmap_eps = [&](const V3& q, double D[2][2]) {
    V3 t{std::max(0.0, q[0] - alpha), std::max(0.0, q[1] - alpha), 0};
    const bool a0 = q[0] > alpha, a1 = q[1] > alpha;
    const double nt = norm2(t, 2);
    D[0][0] = D[0][1] = D[1][0] = D[1][1] = 0;
    if (nt <= eps) {
      if (a0) D[0][0] = 1.0 / eps;
      if (a1) D[1][1] = 1.0 / eps;
      return;
    }
    const double n3 = nt * nt * nt;
    if (a0) {
      D[0][0] = (nt * nt - t[0] * t[0]) / n3;
      D[1][0] = -t[1] * t[0] / n3;
    }
    if (a1) {
      D[0][1] = -t[0] * t[1] / n3;
      D[1][1] = (nt * nt - t[1] * t[1]) / n3;
    }
  };

  double H[2][2] = {{c.quad[0], c.bilin}, {c.bilin, c.quad[1]}};
  V3 u = c.start(cfg, warm, lc.sector);
  V3 q{};
  {
    const V3 g = c.grad(u);
    q = V3{-g[0], -g[1], 0};
  }

  auto residual = [&](const V3& qq, const V3& uu, double* G) {
    const V3 g = c.grad(uu);
    const V3 mu = map_eps(qq);
    G[0] = qq[0] + g[0];
    G[1] = qq[1] + g[1];
    G[2] = uu[0] - mu[0];
    G[3] = uu[1] - mu[1];
  };

  double G[4], J[16], delta[4];
  bool singular = false;
  int stagnant = 0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    residual(q, u, G);
    const double gn = std::sqrt(G[0] * G[0] + G[1] * G[1] + G[2] * G[2] + G[3] * G[3]);
    if (cfg.record_residuals) r.residuals.push_back(gn);
    if (gn < 1e-15) {
      r.converged = true;
      r.iterations = it - 1;
      break;
    }
    double D[2][2];
    dmap_eps(q, D);
    // Rows: dG1/d(q,u) = [I, H]; dG2/d(q,u) = [-D, I].
    J[0] = 1;
    J[1] = 0;
    J[2] = H[0][0];
    J[3] = H[0][1];
    J[4] = 0;
    J[5] = 1;
    J[6] = H[1][0];
    J[7] = H[1][1];
    J[8] = -D[0][0];
    J[9] = -D[0][1];
    J[10] = 1;
    J[11] = 0;
    J[12] = -D[1][0];
    J[13] = -D[1][1];
    J[14] = 0;
    J[15] = 1;
    for (int i = 0; i < 4; ++i) delta[i] = -G[i];
    if (!solve_dense(4, J, delta)) {
      singular = true;
      break;
    }
    // Backtrack on the residual norm; a full step that fails to decrease it
    // is still accepted (piece changes), but repeated stagnation stops.
    double scale_step = 1.0;
    V3 q_try{}, u_try{};
    double Gt[4];
    bool decreased = false;
    for (int bt = 0; bt < 8; ++bt) {
      q_try = V3{q[0] + scale_step * delta[0], q[1] + scale_step * delta[1], 0};
      u_try = V3{u[0] + scale_step * delta[2], u[1] + scale_step * delta[3], 0};
      residual(q_try, u_try, Gt);
      const double gt = std::sqrt(Gt[0] * Gt[0] + Gt[1] * Gt[1] + Gt[2] * Gt[2] + Gt[3] * Gt[3]);
      if (gt < gn) {
        decreased = true;
        break;
      }
      scale_step *= 0.5;
    }
    if (!decreased) {
      scale_step = 1.0;
      q_try = V3{q[0] + delta[0], q[1] + delta[1], 0};
      u_try = V3{u[0] + delta[2], u[1] + delta[3], 0};
      if (++stagnant > 10) {
        q = q_try;
        u = u_try;
        r.iterations = it;
        break;
      }
    } else {
      stagnant = 0;
    }
    q = q_try;
    u = u_try;
    r.iterations = it;
    const double step = scale_step * std::sqrt(delta[0] * delta[0] + delta[1] * delta[1] +
                                               delta[2] * delta[2] + delta[3] * delta[3]);
    if (step < cfg.tolerance) {
      r.converged = true;
      break;
    }
  }
  if (singular) {
    MinimizerConfig fcfg = cfg;
    fcfg.cache = nullptr;
    fcfg.cmp_angles = 400;
    fcfg.cmp_radii = 25;  // ~1e4 points on the sector
    MinimizerResult cr = comparison_auto(lc, fcfg);
    cr.fallback = true;
    return cr;
  }
  if (cfg.record_residuals) {
    residual(q, u, G);
    r.residuals.push_back(std::sqrt(G[0] * G[0] + G[1] * G[1] + G[2] * G[2] + G[3] * G[3]));
  }
  r.u = c.to_original(map_eps(q));
  r.value = lc.eval(r.u);
  return r;
}

// ---------------------------------------------------------------------------
// Semismooth Newton for l1-penalized costs on interval (box) sectors. The
// conjugate derivative is separable: per component the exact map sends q to
// the interval endpoint selected by q - alpha (Danskin), with the point of
// the interval closest to zero on the dead zone; ramps of width eps make it
// continuous.

inline MinimizerResult ssn_l1_box(const LocalCost& lc, const MinimizerConfig& cfg,
                                  const V3* warm = nullptr) {
  MinimizerResult r;
  r.sector = lc.sector.index_set;
  const int m = lc.m;
  const double eps = cfg.l1_epsilon;
  const Sector& s = lc.sector;

  auto map_j = [&](int j, double qj, double* slope) {
    const double lo = s.lo[j], hi = s.hi[j];
    const double mid = std::min(hi, std::max(lo, 0.0));
    const double al = lc.l1[j];
    *slope = 0;
    if (qj >= al + eps) return hi;
    if (qj > al) {
      *slope = (hi - mid) / eps;
      return mid + (hi - mid) * (qj - al) / eps;
    }
    if (qj >= -al) return mid;
    if (qj > -al - eps) {
      *slope = (mid - lo) / eps;
      return mid + (lo - mid) * (-al - qj) / eps;
    }
    return lo;
  };

  double H[3][3];
  lc.hess_smooth(H);
  V3 u{};
  if (cfg.warm_start && warm != nullptr)
    u = sector_project(s, *warm);
  else
    for (int j = 0; j < m; ++j) u[j] = 0.5 * (s.lo[j] + s.hi[j]);
  V3 q = scale(-1.0, lc.grad_smooth(u), m);

  const int n = 2 * m;
  double G[6], J[36], delta[6], slopes[3];
  bool singular = false;
  int stagnant = 0;
  auto residual = [&](const V3& qq, const V3& uu, double* GG, double* sl) {
    const V3 g = lc.grad_smooth(uu);
    for (int j = 0; j < m; ++j) GG[j] = qq[j] + g[j];
    for (int j = 0; j < m; ++j) GG[m + j] = uu[j] - map_j(j, qq[j], &sl[j]);
  };

  for (int it = 1; it <= cfg.max_iters; ++it) {
    residual(q, u, G, slopes);
    double gn = 0;
    for (int i = 0; i < n; ++i) gn += G[i] * G[i];
    gn = std::sqrt(gn);
    if (cfg.record_residuals) r.residuals.push_back(gn);
    if (gn < 1e-15) {
      r.converged = true;
      r.iterations = it - 1;
      break;
    }
    for (int i = 0; i < n * n; ++i) J[i] = 0;
    for (int j = 0; j < m; ++j) {
      J[j * n + j] = 1.0;
      for (int k = 0; k < m; ++k) J[j * n + (m + k)] = H[j][k];
      J[(m + j) * n + j] = -slopes[j];
      J[(m + j) * n + (m + j)] = 1.0;
    }
    for (int i = 0; i < n; ++i) delta[i] = -G[i];
    if (!solve_dense(n, J, delta)) {
      singular = true;
      break;
    }
    double scale_step = 1.0;
    V3 q_try{}, u_try{};
    double Gt[6], st[3];
    bool decreased = false;
    for (int bt = 0; bt < 8; ++bt) {
      for (int j = 0; j < m; ++j) {
        q_try[j] = q[j] + scale_step * delta[j];
        u_try[j] = u[j] + scale_step * delta[m + j];
      }
      residual(q_try, u_try, Gt, st);
      double gt = 0;
      for (int i = 0; i < n; ++i) gt += Gt[i] * Gt[i];
      if (std::sqrt(gt) < gn) {
        decreased = true;
        break;
      }
      scale_step *= 0.5;
    }
    if (!decreased) {
      scale_step = 1.0;
      for (int j = 0; j < m; ++j) {
        q_try[j] = q[j] + delta[j];
        u_try[j] = u[j] + delta[m + j];
      }
      if (++stagnant > 10) {
        q = q_try;
        u = u_try;
        r.iterations = it;
        break;
      }
    } else {
      stagnant = 0;
    }
    q = q_try;
    u = u_try;
    r.iterations = it;
    double step = 0;
    for (int i = 0; i < n; ++i) step += delta[i] * delta[i];
    if (scale_step * std::sqrt(step) < cfg.tolerance) {
      r.converged = true;
      break;
    }
  }
  if (singular) {
    MinimizerConfig fcfg = cfg;
    fcfg.cache = nullptr;
    fcfg.cmp_box_axis = 100;  // ~1e4 points
    MinimizerResult cr = comparison_auto(lc, fcfg);
    cr.fallback = true;
    return cr;
  }
  if (cfg.record_residuals) {
    residual(q, u, G, slopes);
    double gn = 0;
    for (int i = 0; i < n; ++i) gn += G[i] * G[i];
    r.residuals.push_back(std::sqrt(gn));
  }
  V3 uo{};
  for (int j = 0; j < m; ++j) {
    double sl;
    uo[j] = map_j(j, q[j], &sl);
  }
  r.u = uo;
  r.value = lc.eval(uo);
  return r;
}

// ---------------------------------------------------------------------------
// Splitting: fix the sign pattern the sector allows for each component,
// rewrite |u_j| accordingly, and solve the resulting smooth problem with the
// routines above. Sectors whose intervals straddle zero enumerate both signs.

MinimizerResult minimize_sector(const LocalCost& lc, const MinimizerConfig& cfg, const V3* warm);

inline MinimizerResult splitting(const LocalCost& lc, const MinimizerConfig& cfg,
                                 const V3* warm = nullptr) {
  MinimizerResult best;
  best.sector = lc.sector.index_set;
  const int m = lc.m;
  std::array<std::array<int, 2>, 3> options{};  // candidate signs per component
  std::array<int, 3> n_opt{};
  for (int j = 0; j < m; ++j) {
    if (lc.sector.geom == Sector::Geom::OrthantBall) {
      if (lc.sector.sign[j] != 0) {
        options[j][0] = lc.sector.sign[j];
        n_opt[j] = 1;
      } else {
        options[j] = {1, -1};
        n_opt[j] = 2;
      }
    } else {
      n_opt[j] = 0;
      if (lc.sector.hi[j] > -kSectorTol) options[j][n_opt[j]++] = 1;
      if (lc.sector.lo[j] < kSectorTol) options[j][n_opt[j]++] = -1;
    }
  }
  int combos = 1;
  for (int j = 0; j < m; ++j) combos *= n_opt[j];
  int total_iters = 0;
  bool any = false;
  for (int ci = 0; ci < combos; ++ci) {
    int rem = ci;
    std::array<int, 3> pat{1, 1, 1};
    for (int j = 0; j < m; ++j) {
      pat[j] = options[j][rem % n_opt[j]];
      rem /= n_opt[j];
    }
    LocalCost sub = lc;
    sub.l1 = V3{};
    for (int j = 0; j < m; ++j) sub.lin[j] = lc.lin[j] + pat[j] * lc.l1[j];
    if (lc.sector.geom == Sector::Geom::OrthantBall) {
      for (int j = 0; j < m; ++j) sub.sector.sign[j] = static_cast<int8_t>(pat[j]);
    } else {
      bool feasible = true;
      for (int j = 0; j < m; ++j) {
        sub.sector.lo[j] = pat[j] > 0 ? std::max(lc.sector.lo[j], 0.0) : lc.sector.lo[j];
        sub.sector.hi[j] = pat[j] > 0 ? lc.sector.hi[j] : std::min(lc.sector.hi[j], 0.0);
        if (sub.sector.lo[j] > sub.sector.hi[j] + kSectorTol) feasible = false;
      }
      if (!feasible) continue;
    }
    sub.family = LocalCost::classify(sub.quad, sub.l1, m);
    MinimizerConfig sub_cfg = cfg;
    sub_cfg.method = Method::kAuto;
    MinimizerResult sr = minimize_sector(sub, sub_cfg, warm);
    total_iters += sr.iterations;
    const double v = lc.eval(sr.u);
    if (!any || v < best.value) {
      best.u = sr.u;
      best.value = v;
      best.converged = sr.converged;
      best.fallback = sr.fallback;
      any = true;
    }
  }
  best.iterations = total_iters;
  best.sector = lc.sector.index_set;
  return best;
}

// ---------------------------------------------------------------------------
// Dispatch.

namespace detail {

inline bool method_applicable(Method m, const LocalCost& lc) {
  const Sector& s = lc.sector;
  switch (m) {
    case Method::kComparison:
      return true;
    case Method::kChambollePock:
      return lc.smooth() && s.geom != Sector::Geom::General;
    case Method::kSsnSmooth:
      return lc.smooth() && s.geom == Sector::Geom::OrthantBall;
    case Method::kSphereNewton:
      return lc.family == CostFamily::MinTime && s.geom == Sector::Geom::OrthantBall && lc.m == 2;
    case Method::kSsnL1Ball:
      return s.geom == Sector::Geom::OrthantBall && lc.m == 2 && s.sign[0] != 0 && s.sign[1] != 0 &&
             std::abs(lc.l1[0] - lc.l1[1]) <= 1e-12 * std::max(1.0, std::abs(lc.l1[0]));
    case Method::kSsnL1Box:
      return s.geom == Sector::Geom::IntervalBox;
    case Method::kSplitting:
      return (s.geom == Sector::Geom::OrthantBall && lc.m == 2) ||
             s.geom == Sector::Geom::IntervalBox;
    default:
      return false;
  }
}

inline Method auto_route(const LocalCost& lc) {
  if (lc.sector.geom == Sector::Geom::General) return Method::kComparison;
  if (lc.family == CostFamily::MinTime) {
    if (method_applicable(Method::kSphereNewton, lc)) return Method::kSphereNewton;
    return Method::kChambollePock;
  }
  if (lc.smooth()) {
    if (lc.sector.geom == Sector::Geom::OrthantBall) return Method::kSsnSmooth;
    return Method::kChambollePock;
  }
  if (method_applicable(Method::kSsnL1Ball, lc)) return Method::kSsnL1Ball;
  if (lc.sector.geom == Sector::Geom::IntervalBox) return Method::kSsnL1Box;
  return Method::kComparison;
}

}  // namespace detail

inline MinimizerResult minimize_sector(const LocalCost& lc, const MinimizerConfig& cfg,
                                       const V3* warm) {
  Method m = cfg.method;
  bool rerouted = false;
  if (m == Method::kAuto) {
    m = detail::auto_route(lc);
  } else if (!detail::method_applicable(m, lc)) {
    m = detail::auto_route(lc);
    rerouted = true;
  }
  MinimizerResult r;
  switch (m) {
    case Method::kComparison:
      r = comparison_auto(lc, cfg);
      break;
    case Method::kChambollePock:
      r = chambolle_pock(lc, cfg, warm);
      break;
    case Method::kSsnSmooth:
      r = ssn_smooth(lc, cfg, warm);
      break;
    case Method::kSphereNewton:
      r = sphere_newton(lc, cfg, warm);
      break;
    case Method::kSsnL1Ball:
      r = ssn_l1_ball(lc, cfg, warm);
      break;
    case Method::kSsnL1Box:
      r = ssn_l1_box(lc, cfg, warm);
      break;
    case Method::kSplitting:
      r = splitting(lc, cfg, warm);
      break;
    default:
      r = comparison_auto(lc, cfg);
      break;
  }
  r.fallback = r.fallback || rerouted;
  return r;
}

// Nodal minimum over the sector surrogates. Sectors must arrive in
// lexicographic index-set order; duplicated feasible sets are solved once and
// exact value ties keep the earlier (lexicographically smaller) sector.
inline MinimizerResult minimize_node(const LocalCost* costs, int n, const MinimizerConfig& cfg,
                                     const V3* warm = nullptr) {
  MinimizerResult best;
  int total_iters = 0;
  int solved = 0;
  std::array<int, 8> active{};
  int n_active = 0;
  for (int i = 0; i < n; ++i) {
    if (costs[i].sector.empty) continue;
    bool dup = false;
    for (int k = 0; k < n_active && !dup; ++k)
      dup = costs[active[k]].sector.same_feasible_set(costs[i].sector);
    if (dup) continue;
    active[n_active++] = i;
    MinimizerResult r = minimize_sector(costs[i], cfg, warm);
    total_iters += r.iterations;
    ++solved;
    if (r.value < best.value) best = r;
  }
  if (solved == 0) throw std::invalid_argument("minimize_node: no nonempty sector");
  best.iterations = total_iters;
  return best;
}

inline MinimizerResult minimize_node(const std::vector<LocalCost>& costs, const MinimizerConfig& cfg,
                                     const V3* warm = nullptr) {
  return minimize_node(costs.data(), static_cast<int>(costs.size()), cfg, warm);
}

}  // namespace hjb

#pragma once

// Outer fixed-point (value) iteration of the semi-Lagrangian scheme over the
// grid, for discounted infinite-horizon and minimum-time problems. Sweeps are
// Jacobi style (the operator is applied to the previous iterate), so node
// updates within a sweep are independent and run in parallel with results
// that do not depend on the worker count.

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "hjb/minimize.hpp"
#include "hjb/parallel.hpp"

namespace hjb {

struct TargetRegion {
  enum class Kind { None, Ball, Box };
  Kind kind = Kind::None;
  V3 center{};
  double radius = 0;
  V3 lower{}, upper{};

  static TargetRegion ball(const V3& center, double radius) {
    TargetRegion t;
    t.kind = Kind::Ball;
    t.center = center;
    t.radius = radius;
    return t;
  }
  static TargetRegion box(const V3& lower, const V3& upper) {
    TargetRegion t;
    t.kind = Kind::Box;
    t.lower = lower;
    t.upper = upper;
    return t;
  }

  bool contains(const V3& x, int d) const {
    if (kind == Kind::Ball) return norm2(sub(x, center, d), d) <= radius + 1e-12;
    if (kind == Kind::Box) {
      for (int a = 0; a < d; ++a)
        if (x[a] < lower[a] - 1e-12 || x[a] > upper[a] + 1e-12) return false;
      return true;
    }
    return false;
  }
};

enum class SolveMode { InfiniteHorizon, MinimumTime };
enum class ResidualNorm { Sup, L1Mean };

struct ProblemSpec {
  Grid grid;
  Dynamics dyn;
  ControlSet control;
  RunningCost cost;
  double h = 0;
  SolveMode mode = SolveMode::InfiniteHorizon;
  TargetRegion target;
  MinimizerConfig minimizer;
  double stop_tol = -1;  // <= 0: defaults to spacing^2 / 5
  int max_sweeps = 10000;
  ResidualNorm residual_norm = ResidualNorm::Sup;
  int workers = 0;  // 0: all available cores

  double effective_stop_tol() const {
    return stop_tol > 0 ? stop_tol : grid.spacing() * grid.spacing() / 5.0;
  }

  void validate() const {
    cost.validate();
    minimizer.validate();
    if (!(h > 0)) throw std::invalid_argument("problem: time step must be positive");
    if (mode == SolveMode::MinimumTime && target.kind == TargetRegion::Kind::None)
      throw std::invalid_argument("problem: minimum-time mode needs a target region");
    if (mode == SolveMode::MinimumTime && cost.kind != RunningCost::Kind::MinimumTime)
      throw std::invalid_argument("problem: minimum-time mode needs the minimum-time cost");
  }
};

struct SolveReport {
  int sweeps = 0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<double> avg_subiterations;  // mean inner iterations per updated node
  double wall_seconds = 0;
  int64_t unconverged_nodes = 0;  // nodes whose last inner solve did not converge
  ScalarField value;
  VectorField control;
};

inline double residual(const ScalarField& a, const ScalarField& b, ResidualNorm norm) {
  double sup = 0, sum = 0;
  const int64_t n = static_cast<int64_t>(a.values.size());
  for (int64_t i = 0; i < n; ++i) {
    const double d = std::abs(a.values[i] - b.values[i]);
    sup = std::max(sup, d);
    sum += d;
  }
  return norm == ResidualNorm::Sup ? sup : sum / static_cast<double>(n);
}

inline double residual(const ScalarField& a, const ScalarField& b) {
  return residual(a, b, ResidualNorm::Sup);
}

namespace detail {

struct NodeContext {
  V3 x{};
  V3 drift{};
  M3 input{};
  double state_cost = 0;  // h * state_factor * ||x||^2 for discounted problems
  bool target = false;
  int n_sectors = 0;
  std::array<Sector, 8> sectors{};
  std::array<SectorInterpolant, 8> interps{};  // filled per sweep
};

}  // namespace detail

inline SolveReport value_iteration(const ProblemSpec& spec, const ScalarField* v0 = nullptr) {
  spec.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const Grid& grid = spec.grid;
  const int64_t n_nodes = grid.num_nodes();
  const int d = grid.dim(), m = spec.control.m;
  const bool min_time = spec.mode == SolveMode::MinimumTime;
  const double stop_tol = spec.effective_stop_tol();

  {
    const double h_bar = max_timestep(spec.dyn, spec.control, grid);
    if (spec.h > h_bar * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "value_iteration: time step " << spec.h << " exceeds the admissible bound " << h_bar;
      throw std::invalid_argument(os.str());
    }
  }

  // Static per-node data: coordinates, dynamics values, sector decomposition
  // (the duplicates are dropped by minimize_node on the fly).
  std::vector<detail::NodeContext> ctx(n_nodes);
  ComparisonCache cache;
  int64_t n_targets = 0;
  for (int64_t i = 0; i < n_nodes; ++i) {
    auto& c = ctx[i];
    c.x = grid.node(i);
    c.drift = spec.dyn.drift(c.x);
    c.input = spec.dyn.input_map(c.x);
    c.state_cost = spec.h * spec.cost.state_factor * norm2_sq(c.x, d);
    c.target = min_time && spec.target.contains(c.x, d);
    n_targets += c.target ? 1 : 0;
    auto sectors = detail::decompose_rows(c.drift, c.input, spec.control, d);
    for (const auto& s : sectors) {
      c.sectors[c.n_sectors++] = s;
      if (!s.empty) cache.get_or_build(s, spec.minimizer);
    }
  }
  if (min_time && n_targets == 0)
    throw std::invalid_argument("value_iteration: no grid node lies in the target region");

  MinimizerConfig cfg = spec.minimizer;
  cfg.cache = &cache;
  cfg.record_residuals = false;

  // Initial guess: zero for the discounted problem; for minimum time a large
  // constant off the target (the transformed value never exceeds 1).
  ScalarField v_old = v0 != nullptr ? *v0 : ScalarField(grid, 0.0);
  if (v0 == nullptr && min_time) {
    for (int64_t i = 0; i < n_nodes; ++i) v_old.values[i] = ctx[i].target ? 0.0 : 2.0;
  }
  if (v0 != nullptr) {
    if (!(v_old.grid == grid)) throw std::invalid_argument("value_iteration: initial field grid mismatch");
    if (!v_old.all_finite()) throw std::invalid_argument("value_iteration: initial field is not finite");
    if (min_time)
      for (int64_t i = 0; i < n_nodes; ++i)
        if (ctx[i].target) v_old.values[i] = 0.0;
  }

  ScalarField v_new(grid, 0.0);
  VectorField u_old(grid, m), u_new(grid, m);
  std::vector<int> iter_count(n_nodes, 0);
  std::vector<uint8_t> node_converged(n_nodes, 1);

  SolveReport report;
  std::atomic<int64_t> bad_node{-1};

  const double beta = min_time ? std::exp(-spec.h) : 1.0 - spec.cost.lambda * spec.h;
  const double mt_const = 1.0 - beta;

  for (int sweep = 1; sweep <= spec.max_sweeps; ++sweep) {
    parallel_for(n_nodes, spec.workers, [&](int64_t i) {
      auto& c = ctx[i];
      if (c.target) {
        v_new.values[i] = 0.0;
        u_new.set(i, V3{});
        iter_count[i] = 0;
        return;
      }
      std::array<LocalCost, 8> costs;
      int nc = 0;
      for (int si = 0; si < c.n_sectors; ++si) {
        const Sector& sec = c.sectors[si];
        if (sec.empty) continue;
        const SectorInterpolant interp = sector_interpolant(v_old, grid.unflat(i), sec.index_set);
        LocalCost lc;
        lc.m = m;
        lc.sector = sec;
        lc.discount = beta;
        const V3 w = mat_tvec(c.input, interp.slope, d, m);
        for (int j = 0; j < m; ++j) lc.lin[j] = beta * spec.h * w[j];
        const double interp_offset = interp.offset + spec.h * dot(interp.slope, c.drift, d);
        if (min_time) {
          lc.constant = beta * interp_offset + mt_const;
          lc.family = CostFamily::MinTime;
        } else {
          lc.constant = beta * interp_offset + c.state_cost;
          for (int j = 0; j < m; ++j) {
            lc.quad[j] = spec.h * spec.cost.gamma2;
            if (spec.cost.kind == RunningCost::Kind::QuadraticL1)
              lc.l1[j] = spec.h * spec.cost.gamma1;
          }
          lc.family = spec.cost.kind == RunningCost::Kind::QuadraticL1 ? CostFamily::QuadraticL1
                                                                       : CostFamily::Quadratic;
        }
        costs[nc++] = lc;
      }
      const V3 warm = u_old.get(i);
      MinimizerResult res = minimize_node(costs.data(), nc, cfg, cfg.warm_start ? &warm : nullptr);
      if (!std::isfinite(res.value)) {
        bad_node.store(i);
        return;
      }
      v_new.values[i] = res.value;
      u_new.set(i, res.u);
      iter_count[i] = res.iterations;
      node_converged[i] = res.converged ? 1 : 0;
    });

    if (bad_node.load() >= 0) {
      const int64_t i = bad_node.load();
      const Idx idx = grid.unflat(i);
      std::ostringstream os;
      os << "value_iteration: non-finite value at node (" << idx[0] << "," << idx[1];
      if (d == 3) os << "," << idx[2];
      os << ") on sweep " << sweep;
      throw std::runtime_error(os.str());
    }

    double iter_sum = 0;
    int64_t updated = 0;
    for (int64_t i = 0; i < n_nodes; ++i) {
      if (ctx[i].target) continue;
      iter_sum += iter_count[i];
      ++updated;
    }
    report.avg_subiterations.push_back(updated > 0 ? iter_sum / updated : 0.0);
    const double res_norm = residual(v_new, v_old, spec.residual_norm);
    report.residual_history.push_back(res_norm);
    report.sweeps = sweep;

    std::swap(v_old.values, v_new.values);
    std::swap(u_old.values, u_new.values);
    if (res_norm <= stop_tol) {
      report.converged = true;
      break;
    }
  }

  report.unconverged_nodes = 0;
  for (int64_t i = 0; i < n_nodes; ++i)
    if (!node_converged[i]) ++report.unconverged_nodes;
  report.value = std::move(v_old);
  report.control = std::move(u_old);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

}  // namespace hjb

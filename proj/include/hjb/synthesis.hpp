#pragma once

// Feedback extraction from a converged value function and explicit Euler
// closed/open-loop simulation, optionally with additive structural and
// output noise.

#include <vector>

#include "hjb/rng.hpp"
#include "hjb/solver.hpp"

namespace hjb {

// Feedback control at an arbitrary state. On a grid node this is exactly the
// nodal minimization; off the node the local problems are anchored at the
// lower corner of the containing cell, with the offset folded into the drift.
inline V3 feedback(const ScalarField& value, const ProblemSpec& spec, const V3& x_in,
                   MinimizerResult* info = nullptr) {
  const Grid& grid = value.grid;
  const V3 x = grid.clamp_point(x_in);
  const int d = grid.dim(), m = spec.control.m;
  const Idx near = grid.nearest_node(x);
  const V3 near_x = grid.node(near);
  const bool on_node = norm_inf(sub(x, near_x, d), d) <= 1e-9 * grid.spacing();
  const Idx anchor = on_node ? near : grid.cell_lower_node(x);

  V3 g = spec.dyn.drift(x);
  if (!on_node) {
    const V3 ax = grid.node(anchor);
    for (int a = 0; a < d; ++a) g[a] += (x[a] - ax[a]) / spec.h;
  }
  const M3 B = spec.dyn.input_map(x);
  const auto sectors = detail::decompose_rows(g, B, spec.control, d);

  std::array<LocalCost, 8> costs;
  int nc = 0;
  for (const auto& sec : sectors) {
    if (sec.empty) continue;
    costs[nc++] = assemble_with(sector_interpolant(value, anchor, sec.index_set), x, g, B, sec,
                                spec.cost, spec.h, m);
  }
  MinimizerConfig cfg = spec.minimizer;
  cfg.record_residuals = false;
  MinimizerResult res = minimize_node(costs.data(), nc, cfg, nullptr);
  if (info != nullptr) *info = res;
  return res.u;
}

// Nodal feedback field (the argmin used for control error tables).
inline VectorField control_field(const ScalarField& value, const ProblemSpec& spec) {
  VectorField out(value.grid, spec.control.m);
  const Grid& grid = value.grid;
  parallel_for(grid.num_nodes(), spec.workers, [&](int64_t i) {
    const V3 x = grid.node(i);
    if (spec.mode == SolveMode::MinimumTime && spec.target.contains(x, grid.dim())) {
      out.set(i, V3{});
      return;
    }
    out.set(i, feedback(value, spec, x));
  });
  return out;
}

struct NoiseSpec {
  double structural = 0;  // amplitude of the additive state disturbance
  double output = 0;      // amplitude of the measurement disturbance
  uint64_t seed = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<V3> states;
  std::vector<V3> controls;       // one entry per step
  std::vector<double> cum_cost;   // discounted running cost, one per step
  bool closed_loop = true;
  int clamp_events = 0;
};

// Explicit Euler rollout. Closed loop re-evaluates the feedback at the
// (noisy) measured state every step; open loop replays the control sequence
// of the zero-noise closed-loop rollout from the same initial state. Noise
// components are i.i.d. uniform on [-amplitude, amplitude], output noise
// drawn before structural noise each step.
inline Trajectory simulate(const ScalarField& value, const ProblemSpec& spec, const V3& x0,
                           int steps, const NoiseSpec& noise, bool closed_loop) {
  const Grid& grid = value.grid;
  const int d = grid.dim();

  std::vector<V3> replay;
  if (!closed_loop) {
    const Trajectory nominal = simulate(value, spec, x0, steps, NoiseSpec{0, 0, noise.seed}, true);
    replay = nominal.controls;
  }

  Trajectory tr;
  tr.closed_loop = closed_loop;
  tr.times.reserve(steps + 1);
  tr.states.reserve(steps + 1);
  tr.controls.reserve(steps);
  tr.cum_cost.reserve(steps);
  Rng rng(noise.seed);

  V3 y = grid.clamp_point(x0);
  tr.times.push_back(0);
  tr.states.push_back(y);
  double cost_acc = 0;
  for (int n = 0; n < steps; ++n) {
    const double t = n * spec.h;
    V3 measured = y;
    if (noise.output > 0)
      for (int a = 0; a < d; ++a) measured[a] += rng.uniform(-noise.output, noise.output);
    const V3 u = closed_loop ? feedback(value, spec, grid.clamp_point(measured)) : replay[n];

    const double stage = spec.cost.kind == RunningCost::Kind::MinimumTime
                             ? spec.h
                             : std::exp(-spec.cost.lambda * t) * spec.h *
                                   spec.cost.evaluate(y, u, d, spec.control.m);
    cost_acc += stage;

    V3 y_next = axpy(spec.h, spec.dyn.eval(y, u), y, d);
    if (noise.structural > 0)
      for (int a = 0; a < d; ++a) y_next[a] += rng.uniform(-noise.structural, noise.structural);
    const V3 clamped = grid.clamp_point(y_next);
    if (norm_inf(sub(clamped, y_next, d), d) > 0) ++tr.clamp_events;
    y = clamped;

    tr.controls.push_back(u);
    tr.cum_cost.push_back(cost_acc);
    tr.times.push_back((n + 1) * spec.h);
    tr.states.push_back(y);
  }
  return tr;
}

}  // namespace hjb

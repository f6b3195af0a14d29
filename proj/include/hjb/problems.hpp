#pragma once

// Built-in problem registry: discounted eikonal control in 2D/3D, the triple
// integrator with two bounded controls, sparse (l1-penalized) eikonal
// control, a 3D car model, a discontinuous-speed eikonal variant, and a
// minimum-time eikonal problem. Registry names resolve to full problem
// specifications; spacing, l1 weight, minimizer and similar knobs can be
// overridden.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hjb/solver.hpp"

namespace hjb {

inline Dynamics make_eikonal(int d) {
  Dynamics dyn;
  dyn.d = d;
  dyn.m = d;
  dyn.drift = [](const V3&) { return V3{}; };
  dyn.input_map = [d](const V3&) {
    M3 B{};
    for (int i = 0; i < d; ++i) B[i][i] = 1.0;
    return B;
  };
  return dyn;
}

// Speed doubles above the threshold line x2 = 0.5.
inline Dynamics make_eikonal_disc(double threshold = 0.5) {
  Dynamics dyn;
  dyn.d = 2;
  dyn.m = 2;
  dyn.drift = [](const V3&) { return V3{}; };
  dyn.input_map = [threshold](const V3& x) {
    const double c = x[1] > threshold ? 2.0 : 1.0;
    M3 B{};
    B[0][0] = c;
    B[1][1] = c;
    return B;
  };
  return dyn;
}

// f(x,u) = (x2, x3 + u1, u2).
inline Dynamics make_triple_integrator() {
  Dynamics dyn;
  dyn.d = 3;
  dyn.m = 2;
  dyn.drift = [](const V3& x) { return V3{x[1], x[2], 0}; };
  dyn.input_map = [](const V3&) {
    M3 B{};
    B[1][0] = 1.0;
    B[2][1] = 1.0;
    return B;
  };
  return dyn;
}

// f(x,u) = (u1 cos x3, u1 sin x3, u2).
inline Dynamics make_car() {
  Dynamics dyn;
  dyn.d = 3;
  dyn.m = 2;
  dyn.drift = [](const V3&) { return V3{}; };
  dyn.input_map = [](const V3& x) {
    M3 B{};
    B[0][0] = std::cos(x[2]);
    B[1][0] = std::sin(x[2]);
    B[2][1] = 1.0;
    return B;
  };
  return dyn;
}

struct ProblemOptions {
  double spacing = -1;          // <= 0: registry default
  double gamma1 = -1;           // < 0: registry default
  Method method = Method::kAuto;  // kAuto: registry default
  double inner_tol = 1e-4;
  double l1_epsilon = 1e-3;
  bool warm_start = true;
  int workers = 0;
  double stop_tol = -1;
  int max_sweeps = 10000;
};

inline std::vector<std::string> registry_names() {
  return {"test1", "test2", "test3", "test4", "test5", "test1-disc", "test1-mt"};
}

// True when the closed-form reference applies (discounted eikonal control
// with a plain quadratic cost).
inline bool has_exact_reference(const std::string& name) {
  return name == "test1" || name == "test2";
}

inline ProblemSpec make_problem(const std::string& name, const ProblemOptions& opt = {}) {
  ProblemSpec spec;
  spec.cost.lambda = 0.1;
  spec.cost.gamma2 = 2.0;
  spec.cost.state_factor = 0.5;
  spec.workers = opt.workers;
  spec.max_sweeps = opt.max_sweeps;
  spec.stop_tol = opt.stop_tol;
  spec.minimizer.tolerance = opt.inner_tol;
  spec.minimizer.l1_epsilon = opt.l1_epsilon;
  spec.minimizer.warm_start = opt.warm_start;

  const double sqrt2 = std::sqrt(2.0);
  double k = opt.spacing;
  if (name == "test1" || name == "test1-disc" || name == "test1-mt") {
    if (k <= 0) k = 0.05;
    spec.grid = Grid(2, V3{-1, -1, 0}, V3{1, 1, 0}, k);
    spec.control = ControlSet::ball(2, 1.0);
    if (name == "test1-disc") {
      spec.dyn = make_eikonal_disc();
      spec.h = sqrt2 / 8.0 * k;  // speed reaches 2, so halve the eikonal step
    } else {
      spec.dyn = make_eikonal(2);
      spec.h = sqrt2 / 4.0 * k;
    }
    if (name == "test1-mt") {
      spec.mode = SolveMode::MinimumTime;
      spec.cost.kind = RunningCost::Kind::MinimumTime;
      spec.target = TargetRegion::ball(V3{}, 0.1);
      spec.minimizer.method = Method::kSphereNewton;
    } else {
      spec.cost.kind = RunningCost::Kind::Quadratic;
      spec.minimizer.method = Method::kSsnSmooth;
    }
  } else if (name == "test2") {
    if (k <= 0) k = 0.1;
    spec.grid = Grid(3, V3{-1, -1, -1}, V3{1, 1, 1}, k);
    spec.dyn = make_eikonal(3);
    spec.control = ControlSet::ball(3, 1.0);
    spec.h = 0.5 * k;
    spec.cost.kind = RunningCost::Kind::Quadratic;
    spec.minimizer.method = Method::kChambollePock;
  } else if (name == "test3") {
    if (k <= 0) k = 0.1;
    spec.grid = Grid(3, V3{-1, -1, -1}, V3{1, 1, 1}, k);
    spec.dyn = make_triple_integrator();
    spec.control = ControlSet::box(2, V3{-0.3, -0.3, 0}, V3{0.3, 0.3, 0});
    spec.h = k / 5.0;
    spec.cost.kind = RunningCost::Kind::Quadratic;
    spec.minimizer.method = Method::kChambollePock;
  } else if (name == "test4") {
    if (k <= 0) k = 0.025;
    spec.grid = Grid(2, V3{-1, -1, 0}, V3{1, 1, 0}, k);
    spec.dyn = make_eikonal(2);
    spec.control = ControlSet::ball(2, 1.0);
    spec.h = sqrt2 / 4.0 * k;
    spec.cost.kind = RunningCost::Kind::QuadraticL1;
    spec.cost.gamma1 = opt.gamma1 >= 0 ? opt.gamma1 : 0.1;
    spec.minimizer.method = Method::kSsnL1Ball;
  } else if (name == "test5") {
    // The requested spacing is snapped to an integer subdivision of [0, 2pi].
    if (k <= 0) k = 0.2;
    const double span = 2.0 * std::numbers::pi;
    const int cells = std::max(2, static_cast<int>(std::lround(span / k)));
    spec.grid = Grid::with_counts(3, V3{0, 0, 0}, V3{span, span, span}, cells + 1);
    spec.dyn = make_car();
    spec.control = ControlSet::box(2, V3{-0.3, -0.3, 0}, V3{0.3, 0.3, 0});
    spec.h = 0.2 * spec.grid.spacing();
    spec.cost.gamma1 = opt.gamma1 >= 0 ? opt.gamma1 : 0.5;
    spec.cost.kind = spec.cost.gamma1 > 0 ? RunningCost::Kind::QuadraticL1
                                          : RunningCost::Kind::Quadratic;
    spec.minimizer.method =
        spec.cost.gamma1 > 0 ? Method::kSsnL1Box : Method::kChambollePock;
  } else {
    throw std::invalid_argument("unknown problem '" + name + "'");
  }
  if (opt.gamma1 >= 0 && name != "test4" && name != "test5") {
    spec.cost.gamma1 = opt.gamma1;
    if (opt.gamma1 > 0 && spec.cost.kind == RunningCost::Kind::Quadratic)
      spec.cost.kind = RunningCost::Kind::QuadraticL1;
  }
  if (opt.method != Method::kAuto) spec.minimizer.method = opt.method;
  return spec;
}

}  // namespace hjb

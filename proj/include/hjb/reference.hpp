#pragma once

// Closed-form value function for the discounted control of eikonal dynamics
// on a ball: radially symmetric, quadratic inside the radius where the
// unconstrained control stays admissible and an exponential-corrected branch
// outside, glued to first order. Used as the accuracy reference and for
// convergence tables.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "hjb/grid.hpp"

namespace hjb {

struct ExactEikonalSolution {
  double lambda = 0.1;
  double gamma = 2.0;
  // Derived coefficients.
  double quad_coef = 0;    // value is quad_coef * r^2 on the inner branch
  double switch_radius = 0;
  double exp_coef = 0;     // coefficient of exp(-lambda r) on the outer branch

  ExactEikonalSolution(double lambda_, double gamma_) : lambda(lambda_), gamma(gamma_) {
    if (!(lambda > 0) || !(gamma > 0))
      throw std::invalid_argument("exact solution: lambda and gamma must be positive");
    const double root = std::sqrt(lambda * lambda + 4.0 / gamma);
    quad_coef = 0.25 * gamma * (root - lambda);
    switch_radius = 2.0 / (root - lambda);
    const double rb = switch_radius;
    exp_coef = std::exp(lambda * rb) *
               ((0.5 * gamma + 1.0 / (lambda * lambda)) * rb - rb * rb / (2.0 * lambda) -
                0.5 * gamma / lambda - 1.0 / (lambda * lambda * lambda));
  }

  double value_radial(double r) const {
    if (r <= switch_radius) return quad_coef * r * r;
    return r * r / (2.0 * lambda) - r / (lambda * lambda) + 0.5 * gamma / lambda +
           1.0 / (lambda * lambda * lambda) + exp_coef * std::exp(-lambda * r);
  }

  double deriv_radial(double r) const {
    if (r <= switch_radius) return 2.0 * quad_coef * r;
    return r / lambda - 1.0 / (lambda * lambda) - lambda * exp_coef * std::exp(-lambda * r);
  }

  double value(const V3& x, int d) const { return value_radial(norm2(x, d)); }

  // Optimal feedback: -grad v / gamma while that stays in the unit ball,
  // otherwise the unit vector against the gradient.
  V3 control(const V3& x, int d) const {
    const double r = norm2(x, d);
    if (r == 0) return V3{};
    const double dv = deriv_radial(r);
    const double mag = std::min(1.0, dv / gamma);
    return scale(-mag / r, x, d);
  }

  // Residual of the stationary equation
  //   lambda v + max_u { -u.grad v - ||x||^2/2 - gamma/2 ||u||^2 } = 0
  // with the maximum taken in closed form over the unit ball.
  double equation_residual(const V3& x, int d) const {
    const double r = norm2(x, d);
    const double v = value_radial(r);
    const double dv = deriv_radial(r);
    const double max_term =
        dv <= gamma ? dv * dv / (2.0 * gamma) : dv - 0.5 * gamma;
    return lambda * v + max_term - 0.5 * r * r;
  }
};

struct ErrorNorms {
  double l1 = 0;       // trapezoid-weighted integral of the absolute error
  double l1_mean = 0;  // plain nodal mean of the absolute error
  double linf = 0;
};

namespace detail {

// Trapezoid quadrature weight of a node: spacing^d halved once per axis on
// which the node sits on the boundary. The weights sum to the domain measure.
inline double node_weight(const Grid& g, const Idx& idx) {
  double w = 1;
  for (int a = 0; a < g.dim(); ++a) {
    w *= g.spacing();
    if (idx[a] == 0 || idx[a] == g.count(a) - 1) w *= 0.5;
  }
  return w;
}

}  // namespace detail

inline ErrorNorms scalar_error(const ScalarField& f, const std::function<double(const V3&)>& exact) {
  ErrorNorms e;
  const Grid& g = f.grid;
  for (int64_t i = 0; i < g.num_nodes(); ++i) {
    const Idx idx = g.unflat(i);
    const double diff = std::abs(f.values[i] - exact(g.node(idx)));
    e.l1 += detail::node_weight(g, idx) * diff;
    e.l1_mean += diff;
    e.linf = std::max(e.linf, diff);
  }
  e.l1_mean /= static_cast<double>(g.num_nodes());
  return e;
}

// Vector-field error with the per-node Euclidean norm of the difference.
inline ErrorNorms vector_error(const VectorField& f, const std::function<V3(const V3&)>& exact) {
  ErrorNorms e;
  const Grid& g = f.grid;
  for (int64_t i = 0; i < g.num_nodes(); ++i) {
    const Idx idx = g.unflat(i);
    const double diff = norm2(sub(f.get(i), exact(g.node(idx)), f.m), f.m);
    e.l1 += detail::node_weight(g, idx) * diff;
    e.l1_mean += diff;
    e.linf = std::max(e.linf, diff);
  }
  e.l1_mean /= static_cast<double>(g.num_nodes());
  return e;
}

}  // namespace hjb

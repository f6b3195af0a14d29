#pragma once

// Regular quadrangular mesh on a box domain, plus nodal scalar/vector data.
// Node coordinates are always reconstructed as lo + spacing * index so they
// are bit-identical wherever they are computed.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjb/common.hpp"

namespace hjb {

using Idx = std::array<int, 3>;

class Grid {
 public:
  Grid() = default;

  Grid(int dim, const V3& lo, const V3& hi, double spacing)
      : dim_(dim), lo_(lo), hi_(hi), spacing_(spacing) {
    if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("grid: dim must be 2 or 3");
    if (!(spacing > 0)) throw std::invalid_argument("grid: spacing must be positive");
    num_nodes_ = 1;
    for (int a = 0; a < dim; ++a) {
      const double span = hi[a] - lo[a];
      if (!(span > 0)) throw std::invalid_argument("grid: hi must exceed lo on every axis");
      const int cells = static_cast<int>(std::llround(span / spacing));
      if (cells < 1 || std::abs(span - cells * spacing) > 1e-12 * std::max(1.0, std::abs(span)))
        throw std::invalid_argument("grid: (hi-lo) is not an integer multiple of the spacing on axis " +
                                    std::to_string(a + 1));
      counts_[a] = cells + 1;
      num_nodes_ *= counts_[a];
    }
    for (int a = dim; a < kMaxDim; ++a) counts_[a] = 1;
  }

  // Builds a grid from a per-axis node count, deriving the spacing. All axes
  // must yield the same spacing. Used to snap a requested spacing onto a
  // domain whose extent is not an exact multiple of it.
  static Grid with_counts(int dim, const V3& lo, const V3& hi, int nodes_per_axis) {
    if (nodes_per_axis < 2) throw std::invalid_argument("grid: need at least 2 nodes per axis");
    double spacing = (hi[0] - lo[0]) / (nodes_per_axis - 1);
    for (int a = 1; a < dim; ++a) {
      const double s = (hi[a] - lo[a]) / (nodes_per_axis - 1);
      if (std::abs(s - spacing) > 1e-12 * std::max(1.0, spacing))
        throw std::invalid_argument("grid: axes disagree on the derived spacing");
    }
    return Grid(dim, lo, hi, spacing);
  }

  int dim() const { return dim_; }
  double spacing() const { return spacing_; }
  const V3& lo() const { return lo_; }
  const V3& hi() const { return hi_; }
  int count(int axis) const { return counts_[axis]; }
  int64_t num_nodes() const { return num_nodes_; }

  V3 node(const Idx& idx) const {
    V3 x{};
    for (int a = 0; a < dim_; ++a) x[a] = lo_[a] + spacing_ * idx[a];
    return x;
  }
  V3 node(int64_t flat) const { return node(unflat(flat)); }

  // Lexicographic flattening: axis 0 slowest, last axis fastest.
  int64_t flat(const Idx& idx) const {
    int64_t f = idx[0];
    for (int a = 1; a < dim_; ++a) f = f * counts_[a] + idx[a];
    return f;
  }

  Idx unflat(int64_t flat) const {
    Idx idx{};
    for (int a = dim_ - 1; a >= 1; --a) {
      idx[a] = static_cast<int>(flat % counts_[a]);
      flat /= counts_[a];
    }
    idx[0] = static_cast<int>(flat);
    return idx;
  }

  bool in_range(const Idx& idx) const {
    for (int a = 0; a < dim_; ++a)
      if (idx[a] < 0 || idx[a] >= counts_[a]) return false;
    return true;
  }

  V3 clamp_point(const V3& x) const {
    V3 r{};
    for (int a = 0; a < dim_; ++a) r[a] = std::min(hi_[a], std::max(lo_[a], x[a]));
    return r;
  }

  bool contains(const V3& x, double tol = 0.0) const {
    for (int a = 0; a < dim_; ++a)
      if (x[a] < lo_[a] - tol || x[a] > hi_[a] + tol) return false;
    return true;
  }

  Idx nearest_node(const V3& x) const {
    Idx idx{};
    for (int a = 0; a < dim_; ++a) {
      int i = static_cast<int>(std::floor((x[a] - lo_[a]) / spacing_ + 0.5));
      idx[a] = std::min(counts_[a] - 1, std::max(0, i));
    }
    return idx;
  }

  // Lower corner of the cell containing x, clamped so the full cell exists.
  Idx cell_lower_node(const V3& x) const {
    Idx idx{};
    for (int a = 0; a < dim_; ++a) {
      int i = static_cast<int>(std::floor((x[a] - lo_[a]) / spacing_));
      idx[a] = std::min(counts_[a] - 2, std::max(0, i));
    }
    return idx;
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && lo_ == o.lo_ && hi_ == o.hi_ && spacing_ == o.spacing_;
  }

 private:
  int dim_ = 2;
  V3 lo_{}, hi_{};
  double spacing_ = 1;
  std::array<int, 3> counts_{1, 1, 1};
  int64_t num_nodes_ = 0;
};

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.num_nodes(), fill) {}

  static ScalarField sample(const Grid& g, const std::function<double(const V3&)>& fn) {
    ScalarField f(g);
    for (int64_t i = 0; i < g.num_nodes(); ++i) f.values[i] = fn(g.node(i));
    return f;
  }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct VectorField {
  Grid grid;
  int m = 0;
  std::vector<double> values;  // node-major, m entries per node

  VectorField() = default;
  VectorField(const Grid& g, int m_) : grid(g), m(m_), values(g.num_nodes() * m_, 0.0) {}

  V3 get(int64_t node) const {
    V3 u{};
    for (int j = 0; j < m; ++j) u[j] = values[node * m + j];
    return u;
  }
  void set(int64_t node, const V3& u) {
    for (int j = 0; j < m; ++j) values[node * m + j] = u[j];
  }
};

}  // namespace hjb

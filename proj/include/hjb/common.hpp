#pragma once

// Small fixed-size vector/matrix helpers shared across the library.
// State and control dimensions are at most 3; unused slots stay zero.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace hjb {

inline constexpr int kMaxDim = 3;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

using V3 = std::array<double, 3>;
using M3 = std::array<V3, 3>;  // rows indexed by state axis, columns by control

inline double dot(const V3& a, const V3& b, int n) {
  double s = 0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(const V3& a, int n) { return dot(a, a, n); }
inline double norm2(const V3& a, int n) { return std::sqrt(norm2_sq(a, n)); }

inline double norm1(const V3& a, int n) {
  double s = 0;
  for (int i = 0; i < n; ++i) s += std::abs(a[i]);
  return s;
}

inline double norm_inf(const V3& a, int n) {
  double s = 0;
  for (int i = 0; i < n; ++i) s = std::max(s, std::abs(a[i]));
  return s;
}

inline V3 sub(const V3& a, const V3& b, int n) {
  V3 r{};
  for (int i = 0; i < n; ++i) r[i] = a[i] - b[i];
  return r;
}

inline V3 add(const V3& a, const V3& b, int n) {
  V3 r{};
  for (int i = 0; i < n; ++i) r[i] = a[i] + b[i];
  return r;
}

inline V3 scale(double t, const V3& a, int n) {
  V3 r{};
  for (int i = 0; i < n; ++i) r[i] = t * a[i];
  return r;
}

// y + t*x
inline V3 axpy(double t, const V3& x, const V3& y, int n) {
  V3 r{};
  for (int i = 0; i < n; ++i) r[i] = y[i] + t * x[i];
  return r;
}

inline V3 mat_vec(const M3& B, const V3& u, int d, int m) {
  V3 r{};
  for (int i = 0; i < d; ++i) r[i] = dot(B[i], u, m);
  return r;
}

// B^T w, result over control components.
inline V3 mat_tvec(const M3& B, const V3& w, int d, int m) {
  V3 r{};
  for (int j = 0; j < m; ++j) {
    double s = 0;
    for (int i = 0; i < d; ++i) s += B[i][j] * w[i];
    r[j] = s;
  }
  return r;
}

// Gaussian elimination with partial pivoting. a is n x n row-major and is
// overwritten; b receives the solution. Returns false on a (near-)singular
// pivot.
inline bool solve_dense(int n, double* a, double* b) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(a[col * n + col]);
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > 1e-14)) return false;
    if (piv != col) {
      for (int c = col; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

}  // namespace hjb

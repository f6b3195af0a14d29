#pragma once

// Field, trajectory and table export. CSV rows follow the lexicographic node
// order of the grid; doubles are printed with 17 significant digits so a
// read-back reproduces them bit for bit. VTK output uses the legacy
// structured-points format (x varies fastest there).

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hjb/grid.hpp"
#include "hjb/synthesis.hpp"

namespace hjb {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

}  // namespace detail

inline void write_scalar_csv(const ScalarField& f, const std::string& path) {
  auto os = detail::open_out(path);
  const Grid& g = f.grid;
  for (int a = 0; a < g.dim(); ++a) os << "x_" << (a + 1) << ",";
  os << "value\n";
  for (int64_t i = 0; i < g.num_nodes(); ++i) {
    const V3 x = g.node(i);
    for (int a = 0; a < g.dim(); ++a) os << format_double(x[a]) << ",";
    os << format_double(f.values[i]) << "\n";
  }
}

inline void write_vector_csv(const VectorField& f, const std::string& path) {
  auto os = detail::open_out(path);
  const Grid& g = f.grid;
  for (int a = 0; a < g.dim(); ++a) os << "x_" << (a + 1) << ",";
  for (int j = 0; j < f.m; ++j) os << "u_" << (j + 1) << (j + 1 < f.m ? "," : "\n");
  for (int64_t i = 0; i < g.num_nodes(); ++i) {
    const V3 x = g.node(i);
    for (int a = 0; a < g.dim(); ++a) os << format_double(x[a]) << ",";
    const V3 u = f.get(i);
    for (int j = 0; j < f.m; ++j) os << format_double(u[j]) << (j + 1 < f.m ? "," : "\n");
  }
}

// Reads back a scalar field CSV written by write_scalar_csv.
inline ScalarField read_scalar_csv(const Grid& g, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  std::getline(is, line);  // header
  ScalarField f(g);
  for (int64_t i = 0; i < g.num_nodes(); ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("csv: unexpected end of file");
    const auto pos = line.rfind(',');
    f.values[i] = std::strtod(line.c_str() + pos + 1, nullptr);
  }
  return f;
}

namespace detail {

inline void write_vtk_header(std::ofstream& os, const Grid& g, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS";
  for (int a = 0; a < 3; ++a) os << " " << (a < g.dim() ? g.count(a) : 1);
  os << "\nORIGIN";
  for (int a = 0; a < 3; ++a) os << " " << format_double(a < g.dim() ? g.lo()[a] : 0.0);
  os << "\nSPACING";
  for (int a = 0; a < 3; ++a) os << " " << format_double(g.spacing());
  os << "\nPOINT_DATA " << g.num_nodes() << "\n";
}

// VTK structured points run x fastest; grid flattening runs it slowest.
inline int64_t vtk_to_flat(const Grid& g, int64_t vtk_index) {
  Idx idx{};
  int64_t rem = vtk_index;
  for (int a = 0; a < g.dim(); ++a) {
    idx[a] = static_cast<int>(rem % g.count(a));
    rem /= g.count(a);
  }
  return g.flat(idx);
}

}  // namespace detail

inline void write_scalar_vtk(const ScalarField& f, const std::string& path,
                             const std::string& name = "value") {
  auto os = detail::open_out(path);
  detail::write_vtk_header(os, f.grid, name);
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int64_t i = 0; i < f.grid.num_nodes(); ++i)
    os << format_double(f.values[detail::vtk_to_flat(f.grid, i)]) << "\n";
}

inline void write_vector_vtk(const VectorField& f, const std::string& path,
                             const std::string& name = "control") {
  auto os = detail::open_out(path);
  detail::write_vtk_header(os, f.grid, name);
  os << "VECTORS " << name << " double\n";
  for (int64_t i = 0; i < f.grid.num_nodes(); ++i) {
    const V3 u = f.get(detail::vtk_to_flat(f.grid, i));
    os << format_double(u[0]) << " " << format_double(u[1]) << " " << format_double(u[2]) << "\n";
  }
}

inline void write_trajectory_csv(const Trajectory& tr, int d, int m, const std::string& path) {
  auto os = detail::open_out(path);
  os << "t";
  for (int a = 0; a < d; ++a) os << ",x_" << (a + 1);
  for (int j = 0; j < m; ++j) os << ",u_" << (j + 1);
  os << ",cumulative_cost\n";
  for (size_t n = 0; n < tr.states.size(); ++n) {
    os << format_double(tr.times[n]);
    for (int a = 0; a < d; ++a) os << "," << format_double(tr.states[n][a]);
    const bool has_u = n < tr.controls.size();
    for (int j = 0; j < m; ++j) os << "," << (has_u ? format_double(tr.controls[n][j]) : "");
    os << "," << (has_u ? format_double(tr.cum_cost[n]) : "") << "\n";
  }
}

}  // namespace hjb

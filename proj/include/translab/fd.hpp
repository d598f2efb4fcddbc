#pragma once

// Second-order finite differences on tensor grids: central stencils in the
// interior, one-sided second-order stencils on the boundary layer.

#include "translab/grid.hpp"

namespace translab::fd {

// First derivative along `axis`.
inline Field d1(const Grid& grid, const Field& f, Eigen::Index axis) {
  Field out(grid.size());
  const double h = grid.spacing()(axis);
  const int last = grid.shape()(axis) - 1;
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const int c = grid.coordinate_index(node, axis);
    if (c == 0) {
      out(node) = (-3.0 * f(node) + 4.0 * f(grid.neighbor(node, axis, 1)) -
                   f(grid.neighbor(node, axis, 2))) /
                  (2.0 * h);
    } else if (c == last) {
      out(node) = (3.0 * f(node) - 4.0 * f(grid.neighbor(node, axis, -1)) +
                   f(grid.neighbor(node, axis, -2))) /
                  (2.0 * h);
    } else {
      out(node) = (f(grid.neighbor(node, axis, 1)) -
                   f(grid.neighbor(node, axis, -1))) /
                  (2.0 * h);
    }
  }
  return out;
}

// Pure second derivative along `axis`.
inline Field d2(const Grid& grid, const Field& f, Eigen::Index axis) {
  Field out(grid.size());
  const double h2 = grid.spacing()(axis) * grid.spacing()(axis);
  const int last = grid.shape()(axis) - 1;
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const int c = grid.coordinate_index(node, axis);
    if (c == 0) {
      out(node) = (2.0 * f(node) - 5.0 * f(grid.neighbor(node, axis, 1)) +
                   4.0 * f(grid.neighbor(node, axis, 2)) -
                   f(grid.neighbor(node, axis, 3))) /
                  h2;
    } else if (c == last) {
      out(node) = (2.0 * f(node) - 5.0 * f(grid.neighbor(node, axis, -1)) +
                   4.0 * f(grid.neighbor(node, axis, -2)) -
                   f(grid.neighbor(node, axis, -3))) /
                  h2;
    } else {
      out(node) = (f(grid.neighbor(node, axis, 1)) - 2.0 * f(node) +
                   f(grid.neighbor(node, axis, -1))) /
                  h2;
    }
  }
  return out;
}

// Mixed second derivative; the pure case dispatches to the dedicated stencil.
inline Field d2_mixed(const Grid& grid, const Field& f, Eigen::Index axis_a,
                      Eigen::Index axis_b) {
  if (axis_a == axis_b) return d2(grid, f, axis_a);
  return d1(grid, d1(grid, f, axis_b), axis_a);
}

// All first derivatives: column i holds d1 along axis i.
inline Eigen::MatrixXd gradient(const Grid& grid, const Field& f) {
  Eigen::MatrixXd out(grid.size(), grid.dim());
  for (Eigen::Index i = 0; i < grid.dim(); ++i) out.col(i) = d1(grid, f, i);
  return out;
}

}  // namespace translab::fd

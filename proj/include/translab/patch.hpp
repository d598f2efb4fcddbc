#pragma once

// Sampled graphs u: Omega in R^n -> R^m with a unit translation direction V
// in R^{n+m}, and general immersed patches (sampled maps Omega -> R^{n+m})
// used for normal variations. Patches are frozen after construction; all
// operations take them by const reference.

#include "translab/grid.hpp"

#include <functional>
#include <stdexcept>
#include <utility>

namespace translab {

inline constexpr double kUnitDirectionTol = 1e-14;
inline constexpr int kMinNodesPerAxis = 5;

struct GraphPatch {
  Grid grid;                  // base domain, dim n
  Eigen::MatrixXd values;     // size x m
  Eigen::VectorXd direction;  // V in R^{n+m}, |V| = 1

  Eigen::Index n() const { return grid.dim(); }
  Eigen::Index m() const { return values.cols(); }
  Eigen::Index ambient_dim() const { return n() + m(); }

  Eigen::VectorXd position(Eigen::Index node) const {
    Eigen::VectorXd x(ambient_dim());
    x.head(n()) = grid.node(node);
    x.tail(m()) = values.row(node);
    return x;
  }

  // <V, X> per node.
  Field height() const {
    Field f(grid.size());
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
      f(node) = direction.dot(position(node));
    }
    return f;
  }
};

inline GraphPatch make_patch(Grid grid, Eigen::MatrixXd values,
                             Eigen::VectorXd direction) {
  if (values.rows() != grid.size() || values.cols() < 1) {
    throw std::invalid_argument("make_patch: value table shape mismatch");
  }
  if (direction.size() != grid.dim() + values.cols()) {
    throw std::invalid_argument("make_patch: direction dimension mismatch");
  }
  if (std::abs(direction.norm() - 1.0) > kUnitDirectionTol) {
    throw std::invalid_argument("make_patch: direction not unit length");
  }
  for (Eigen::Index i = 0; i < grid.dim(); ++i) {
    if (grid.shape()(i) < kMinNodesPerAxis) {
      throw std::invalid_argument("make_patch: fewer than 5 nodes on an axis");
    }
  }
  if (!values.allFinite()) {
    throw std::invalid_argument("make_patch: non-finite graph values");
  }
  return GraphPatch{std::move(grid), std::move(values), std::move(direction)};
}

inline GraphPatch sample_patch(
    Grid grid, Eigen::Index codim,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& u_of_x,
    Eigen::VectorXd direction) {
  Eigen::MatrixXd values(grid.size(), codim);
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    values.row(node) = u_of_x(grid.node(node));
  }
  return make_patch(std::move(grid), std::move(values), std::move(direction));
}

// A sampled immersion X: Omega -> R^{n+m}; only metric-level quantities are
// defined for these (enough for weighted volume under normal variations).
struct ImmersedPatch {
  Grid grid;
  Eigen::MatrixXd positions;  // size x (n+m)
  Eigen::VectorXd direction;
};

inline ImmersedPatch as_immersed(const GraphPatch& patch) {
  Eigen::MatrixXd positions(patch.grid.size(), patch.ambient_dim());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    positions.row(node) = patch.position(node);
  }
  return ImmersedPatch{patch.grid, std::move(positions), patch.direction};
}

}  // namespace translab

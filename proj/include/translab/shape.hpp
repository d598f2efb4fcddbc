#pragma once

// Pointwise extrinsic geometry of a graph patch: induced metric, normal
// frame, second fundamental form, mean curvature, |B|^2 and the S matrix.
// Per-node blocks are stored flattened row-major; the Map accessors give
// Eigen views into one node's data.

#include "translab/patch.hpp"

namespace translab {

// Per-node blocks are stored one node per row; row-major storage keeps each
// node's block contiguous so it can be mapped as a small matrix.
using NodeTable =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ShapeData {
  Eigen::Index n = 0, m = 0;

  NodeTable du;       // size x (n*m), entry (i,a) = d_i u^a
  NodeTable d2u;      // size x (n*n*m)
  NodeTable metric;   // size x (n*n)
  NodeTable metric_inv;
  Field sqrt_det_g;
  NodeTable tangent_frame;  // size x (n*(n+m)), orthonormal rows
  NodeTable tangent_coeff;  // size x (n*n): frame row a = sum_i c(a,i) T_i
  NodeTable normal_frame;   // size x (m*(n+m)), orthonormal rows
  NodeTable b_coord;        // size x (m*n*n): <X_ij, e_a>, coord tangent ij
  NodeTable b_orth;         // size x (m*n*n): same in orthonormal tangent frame
  NodeTable mean_curvature; // size x m: H^a = g^{ij} h_{a,ij}
  Field b_norm_sq;          // |B|^2
  NodeTable s_matrix;       // size x (m*m): S_ab = sum_{ij} hh

  using MapMat = Eigen::Map<const NodeTable>;

  MapMat g(Eigen::Index node) const { return {metric.row(node).data(), n, n}; }
  MapMat g_inv(Eigen::Index node) const {
    return {metric_inv.row(node).data(), n, n};
  }
  MapMat grad_u(Eigen::Index node) const { return {du.row(node).data(), n, m}; }
  MapMat tangent(Eigen::Index node) const {
    return {tangent_frame.row(node).data(), n, n + m};
  }
  MapMat normals(Eigen::Index node) const {
    return {normal_frame.row(node).data(), m, n + m};
  }
  MapMat b_coord_of(Eigen::Index node, Eigen::Index alpha) const {
    return {b_coord.row(node).data() + alpha * n * n, n, n};
  }
  MapMat b_orth_of(Eigen::Index node, Eigen::Index alpha) const {
    return {b_orth.row(node).data() + alpha * n * n, n, n};
  }
  MapMat s_of(Eigen::Index node) const {
    return {s_matrix.row(node).data(), m, m};
  }

  // Coordinate tangent vectors T_i = (e_i, d_i u) as rows.
  Eigen::MatrixXd coordinate_tangents(Eigen::Index node) const {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n + m);
    t.leftCols(n).setIdentity();
    t.rightCols(m) = grad_u(node);
    return t;
  }
};

// Metric-level data only (g, g^{-1}, sqrt(det g), du).
ShapeData induced_metric(const GraphPatch& patch);

// Full second-fundamental-form data.
ShapeData second_fundamental_form(const GraphPatch& patch);

// Independent recomputation of |B|^2 through pure g-contractions,
// tr(g^{-1} h_a g^{-1} h_a); used to cross-check the orthonormal-frame path.
Field b_norm_sq_via_contraction(const ShapeData& shape);

}  // namespace translab

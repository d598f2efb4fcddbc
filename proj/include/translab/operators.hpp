#pragma once

// Differential and integral operators on graph patches: Laplace-Beltrami,
// the drift Laplacian L = Delta + <V, grad .>, weighted volume, extrinsic
// radius, the Gauss map and the translator residual H - V^N.

#include "translab/grassmann.hpp"
#include "translab/patch.hpp"
#include "translab/shape.hpp"

#include <vector>

namespace translab {

// Nodes at boundary distance >= depth. Divergence-form second derivatives
// are fully central from depth 2 on.
std::vector<char> interior_mask(const Grid& grid, int depth = 2);

// (1/sqrt g) d_i ( sqrt g g^{ij} d_j f ). Valid on every node; the boundary
// layer uses one-sided stencils and carries larger constants.
Field laplace_beltrami(const GraphPatch& patch, const ShapeData& shape,
                       const Field& f);

// <V, grad f> = g^{ij} d_j f <V, T_i>.
Field drift_term(const GraphPatch& patch, const ShapeData& shape,
                 const Field& f);

inline Field drift_laplacian(const GraphPatch& patch, const ShapeData& shape,
                             const Field& f) {
  return laplace_beltrami(patch, shape, f) + drift_term(patch, shape, f);
}

Field drift_laplacian(const GraphPatch& patch, const Field& f);

// |grad f|^2 = g^{ij} d_i f d_j f.
Field gradient_norm_sq(const GraphPatch& patch, const ShapeData& shape,
                       const Field& f);

// integral of e^{<V,X>} dmu by composite trapezoid quadrature.
double weighted_volume(const GraphPatch& patch);
double weighted_volume(const ImmersedPatch& patch);

// Per-node quadrature weights of the weighted measure e^{<V,X>} dmu.
Field weighted_measure(const GraphPatch& patch, const ShapeData& shape);

// r(x) = |X - base| per node.
Field extrinsic_radius(const GraphPatch& patch, const Eigen::VectorXd& base);

// Oriented tangent plane at a node (orthonormalized coordinate tangents).
grassmann::Subspace<double> gauss_map(const ShapeData& shape,
                                      Eigen::Index node);

// Reference plane of the graph structure, span(eps_1..eps_n).
inline grassmann::Subspace<double> graph_reference_plane(
    const GraphPatch& patch) {
  return grassmann::horizontal_plane<double>(patch.n(), patch.m());
}

struct TranslatorResidual {
  Eigen::MatrixXd components;  // size x m, (H - V^N)^a in the normal frame
  Field norm;                  // per-node Euclidean norm
  double max_interior = 0.0;   // max over boundary distance >= 2
  double max_all = 0.0;
};

TranslatorResidual translator_residual(const GraphPatch& patch,
                                       const ShapeData& shape);
inline TranslatorResidual translator_residual(const GraphPatch& patch) {
  return translator_residual(patch, second_fundamental_form(patch));
}

}  // namespace translab

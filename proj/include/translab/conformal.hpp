#pragma once

// The conformal ambient metric e^{(2/n) <V,x>} * (Euclidean), n the
// submanifold dimension: closed-form sectional curvature and a fast-marching
// distance field from an origin.

#include "translab/grid.hpp"

namespace translab {

// Sectional curvature of the conformal metric on the 2-plane spanned by the
// Euclidean-orthonormal pair (e1, e2) at the ambient point x:
//   kappa = -(1/n^2) e^{-(2/n)<V,x>} (1 - |proj_span V|^2).
// Zero when V lies in the section, the pinching bound when V is normal to it.
double conformal_sectional_curvature(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& e1,
                                     const Eigen::VectorXd& e2,
                                     const Eigen::VectorXd& v, int n);

// First-order fast marching for |grad rho|_conformal = 1 on an ambient grid:
// Euclidean eikonal with local speed e^{-(1/n)<V,x>}. The origin must be a
// grid node (within a tenth of a spacing). Ambient dimension <= 3.
Field conformal_distance_field(const Grid& ambient,
                               const Eigen::VectorXd& origin,
                               const Eigen::VectorXd& v, int n);

// Multilinear interpolation of a node field at an ambient point.
double interpolate(const Grid& grid, const Field& f, const Eigen::VectorXd& x);

// Ambient grid with the prescribed spacing whose lattice contains `origin`
// as a node and covers [lo, hi].
Grid ambient_grid_through(const Eigen::VectorXd& origin,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          double spacing);

}  // namespace translab

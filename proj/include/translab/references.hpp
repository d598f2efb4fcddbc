#pragma once

// Closed-form and ODE reference solutions used as oracles by the solver
// tests and the acceptance suite.

#include <Eigen/Dense>

namespace translab {

// u(x) = -log cos(x), the planar translating curve; u'' = 1 + u'^2.
double grim_reaper_reference(double x);

// Rotationally symmetric translator profile: u''/(1+u'^2) + (n-1) u'/r = 1,
// u(0) = 0, u'(0) = 0, integrated by an adaptive embedded Runge-Kutta pair
// (Dormand-Prince 5(4)) with local tolerance `tol`. This routine IS the
// oracle for the 2-D solver tests; it is not derived from the PDE solver.
double bowl_reference(double r, int n, double tol = 1e-12);

// Value and first derivative, for tests of the axis expansion.
Eigen::Vector2d bowl_reference_state(double r, int n, double tol = 1e-12);

}  // namespace translab

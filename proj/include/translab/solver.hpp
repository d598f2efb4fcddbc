#pragma once

// Dirichlet solvers for the graphical translator equations on boxes:
// the codimension-one conservative flux form and the general nondivergence
// elliptic system, both with damped Newton iterations on analytically
// assembled sparse Jacobians.

#include "translab/patch.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace translab {

struct SolverConfig {
  double newton_tol = 1e-10;  // max-norm residual target
  int max_iter = 50;
  double damping = 0.5;      // backtracking factor
  double armijo = 1e-4;
  double linear_tol = 1e-12;  // kept for iterative fallbacks; direct solves ignore it

  void validate() const {
    if (!(newton_tol > 0) || !(linear_tol > 0) || max_iter < 1 ||
        !(damping > 0 && damping < 1)) {
      throw std::invalid_argument("SolverConfig: invalid settings");
    }
  }
};

struct BoundaryData {
  Eigen::MatrixXd values;  // size x m; only boundary rows are read

  void validate(const Grid& grid) const {
    if (values.rows() != grid.size()) {
      throw std::invalid_argument("BoundaryData: size mismatch");
    }
    if (!values.allFinite()) {
      throw std::invalid_argument("BoundaryData: non-finite values");
    }
  }
};

using BoundaryFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

BoundaryData sample_boundary(const Grid& grid, Eigen::Index m,
                             const BoundaryFn& fn);

struct SolveLog {
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& message, double final_residual)
      : std::runtime_error(message), final_residual_(final_residual) {}
  double final_residual() const { return final_residual_; }

 private:
  double final_residual_;
};

// div(Du / sqrt(1+|Du|^2)) = 1 / sqrt(1+|Du|^2), fluxes on half-grid points.
// Requires m = 1 and V along the vertical axis eps_{n+1}.
GraphPatch solve_codim1(const Grid& grid, const BoundaryData& boundary,
                        const Eigen::VectorXd& direction,
                        const SolverConfig& config, SolveLog* log = nullptr);

// g^{ij} u^a_{ij} = V_a - sum_i u^a_i V_i, central nondivergence stencils.
// Any m >= 1 and any unit V.
GraphPatch solve_system(const Grid& grid, const BoundaryData& boundary,
                        const Eigen::VectorXd& direction,
                        const SolverConfig& config, SolveLog* log = nullptr);

// Componentwise harmonic extension of the boundary data (the Newton seed).
Eigen::MatrixXd harmonic_extension(const Grid& grid,
                                   const BoundaryData& boundary,
                                   Eigen::Index m);

enum class Formulation { Codim1, System };

struct ConvergenceStudy {
  std::vector<double> errors;  // max-norm vs oracle per level
  std::vector<double> orders;  // log2(e_k / e_{k+1})
  bool exact = false;          // errors at machine precision, order undefined
};

ConvergenceStudy convergence_study(const Grid& coarse, int levels,
                                   Eigen::Index m, const BoundaryFn& boundary,
                                   const Eigen::VectorXd& direction,
                                   const SolverConfig& config,
                                   Formulation formulation,
                                   const BoundaryFn& oracle);

}  // namespace translab

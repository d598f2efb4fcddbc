#include "translab/solver.hpp"

#include "translab/parallel.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

namespace translab {

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct UnknownMap {
  std::vector<Eigen::Index> node_to_unknown;  // -1 for boundary
  std::vector<Eigen::Index> unknown_to_node;

  explicit UnknownMap(const Grid& grid)
      : node_to_unknown(static_cast<size_t>(grid.size()), -1) {
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
      if (!grid.is_boundary(node)) {
        node_to_unknown[static_cast<size_t>(node)] =
            static_cast<Eigen::Index>(unknown_to_node.size());
        unknown_to_node.push_back(node);
      }
    }
  }
  Eigen::Index count() const {
    return static_cast<Eigen::Index>(unknown_to_node.size());
  }
};

void check_direction(const Eigen::VectorXd& direction, Eigen::Index dim) {
  if (direction.size() != dim) {
    throw std::invalid_argument("solver: direction dimension mismatch");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("solver: direction not unit length");
  }
}

// Generic damped Newton on the interior unknowns.
template <typename ResidualFn, typename JacobianFn>
Eigen::MatrixXd newton_loop(const Grid& grid, const UnknownMap& map,
                            Eigen::MatrixXd u, Eigen::Index m,
                            const SolverConfig& config, SolveLog* log,
                            const ResidualFn& residual_of,
                            const JacobianFn& jacobian_of) {
  const Eigen::Index unknowns = map.count() * m;
  SolveLog local;
  SolveLog& out = log ? *log : local;
  out.residual_history.clear();

  Eigen::VectorXd residual = residual_of(u);
  double res_norm = residual.cwiseAbs().maxCoeff();
  out.residual_history.push_back(res_norm);

  for (int it = 0; it < config.max_iter; ++it) {
    if (res_norm <= config.newton_tol) {
      out.converged = true;
      out.iterations = it;
      out.final_residual = res_norm;
      return u;
    }
    Sparse jac(unknowns, unknowns);
    {
      std::vector<Triplet> triplets;
      jacobian_of(u, triplets);
      jac.setFromTriplets(triplets.begin(), triplets.end());
    }
    Eigen::SparseLU<Sparse> lu(jac);
    if (lu.info() != Eigen::Success) {
      // Identify the weakest pivot for the report.
      Eigen::Index worst = 0;
      double smallest = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < unknowns; ++k) {
        const double d = std::abs(jac.coeff(k, k));
        if (d < smallest) {
          smallest = d;
          worst = k;
        }
      }
      throw SolverError("singular Jacobian near node " +
                            std::to_string(map.unknown_to_node[static_cast<size_t>(
                                worst / m)]),
                        res_norm);
    }
    const Eigen::VectorXd step = lu.solve(-residual);

    double t = 1.0;
    Eigen::MatrixXd candidate;
    Eigen::VectorXd cand_residual;
    double cand_norm = res_norm;
    while (true) {
      candidate = u;
      for (Eigen::Index k = 0; k < map.count(); ++k) {
        for (Eigen::Index a = 0; a < m; ++a) {
          candidate(map.unknown_to_node[static_cast<size_t>(k)], a) +=
              t * step(k * m + a);
        }
      }
      cand_residual = residual_of(candidate);
      cand_norm = cand_residual.cwiseAbs().maxCoeff();
      if (cand_norm <= (1.0 - config.armijo * t) * res_norm || t < 1e-13) {
        break;
      }
      t *= config.damping;
    }
    if (cand_norm >= res_norm) {
      // No progress possible; residual is at the discretization's rounding
      // floor. Report non-convergence with the reached residual.
      out.converged = false;
      out.iterations = it + 1;
      out.final_residual = res_norm;
      throw SolverError(
          "Newton stalled at residual " + std::to_string(res_norm) +
              " (target " + std::to_string(config.newton_tol) + ")",
          res_norm);
    }
    u = candidate;
    residual = cand_residual;
    res_norm = cand_norm;
    out.residual_history.push_back(res_norm);
  }
  out.converged = res_norm <= config.newton_tol;
  out.iterations = config.max_iter;
  out.final_residual = res_norm;
  if (!out.converged) {
    throw SolverError("Newton did not converge after " +
                          std::to_string(config.max_iter) +
                          " iterations; final residual " +
                          std::to_string(res_norm),
                      res_norm);
  }
  return u;
}

}  // namespace

BoundaryData sample_boundary(const Grid& grid, Eigen::Index m,
                             const BoundaryFn& fn) {
  BoundaryData data;
  data.values = Eigen::MatrixXd::Zero(grid.size(), m);
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    if (grid.is_boundary(node)) {
      data.values.row(node) = fn(grid.node(node));
    }
  }
  return data;
}

Eigen::MatrixXd harmonic_extension(const Grid& grid,
                                   const BoundaryData& boundary,
                                   Eigen::Index m) {
  const UnknownMap map(grid);
  const Eigen::Index n = grid.dim();
  Eigen::MatrixXd u = boundary.values;

  std::vector<Triplet> triplets;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(map.count(), m);
  for (Eigen::Index k = 0; k < map.count(); ++k) {
    const Eigen::Index node = map.unknown_to_node[static_cast<size_t>(k)];
    double diag = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = 1.0 / (grid.spacing()(i) * grid.spacing()(i));
      diag += 2.0 * w;
      for (const int step : {-1, 1}) {
        const Eigen::Index nb = grid.neighbor(node, i, step);
        const Eigen::Index nb_unknown =
            map.node_to_unknown[static_cast<size_t>(nb)];
        if (nb_unknown >= 0) {
          triplets.emplace_back(k, nb_unknown, -w);
        } else {
          rhs.row(k) += w * boundary.values.row(nb);
        }
      }
    }
    triplets.emplace_back(k, k, diag);
  }
  Sparse laplace(map.count(), map.count());
  laplace.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Sparse> solver(laplace);
  if (solver.info() != Eigen::Success) {
    // Documented fallback: zero interior seed.
    return u;
  }
  const Eigen::MatrixXd interior = solver.solve(rhs);
  for (Eigen::Index k = 0; k < map.count(); ++k) {
    u.row(map.unknown_to_node[static_cast<size_t>(k)]) = interior.row(k);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Codimension one, conservative flux form.
// ---------------------------------------------------------------------------

GraphPatch solve_codim1(const Grid& grid, const BoundaryData& boundary,
                        const Eigen::VectorXd& direction,
                        const SolverConfig& config, SolveLog* log) {
  config.validate();
  boundary.validate(grid);
  const Eigen::Index n = grid.dim();
  check_direction(direction, n + 1);
  if (boundary.values.cols() != 1) {
    throw std::invalid_argument("solve_codim1: requires m = 1");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(direction(i)) > 1e-12) {
      throw std::invalid_argument(
          "solve_codim1: direction must be the vertical axis eps_{n+1}");
    }
  }
  if (direction(n) < 0) {
    throw std::invalid_argument("solve_codim1: direction must be +eps_{n+1}");
  }

  const UnknownMap map(grid);
  const Eigen::VectorXd h = grid.spacing();

  // Central gradient at a node (all axes), reading the current iterate.
  const auto central_gradient = [&](const Eigen::MatrixXd& u,
                                    Eigen::Index node) {
    Eigen::VectorXd p(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      p(j) = (u(grid.neighbor(node, j, 1), 0) -
              u(grid.neighbor(node, j, -1), 0)) /
             (2.0 * h(j));
    }
    return p;
  };

  // Gradient at the face between node and node+e_i.
  const auto face_gradient = [&](const Eigen::MatrixXd& u, Eigen::Index node,
                                 Eigen::Index axis) {
    Eigen::VectorXd p(n);
    const Eigen::Index right = grid.neighbor(node, axis, 1);
    p(axis) = (u(right, 0) - u(node, 0)) / h(axis);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == axis) continue;
      const double left_c = (u(grid.neighbor(node, j, 1), 0) -
                             u(grid.neighbor(node, j, -1), 0)) /
                            (2.0 * h(j));
      const double right_c = (u(grid.neighbor(right, j, 1), 0) -
                              u(grid.neighbor(right, j, -1), 0)) /
                             (2.0 * h(j));
      p(j) = 0.5 * (left_c + right_c);
    }
    return p;
  };

  const auto residual_of = [&](const Eigen::MatrixXd& u) {
    Eigen::VectorXd r(map.count());
    parallel_for(0, map.count(), [&](Eigen::Index k) {
      const Eigen::Index node = map.unknown_to_node[static_cast<size_t>(k)];
      double sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd pr = face_gradient(u, node, i);
        const Eigen::VectorXd pl =
            face_gradient(u, grid.neighbor(node, i, -1), i);
        const double flux_r = pr(i) / std::sqrt(1.0 + pr.squaredNorm());
        const double flux_l = pl(i) / std::sqrt(1.0 + pl.squaredNorm());
        sum += (flux_r - flux_l) / h(i);
      }
      const Eigen::VectorXd pc = central_gradient(u, node);
      r(k) = sum - 1.0 / std::sqrt(1.0 + pc.squaredNorm());
    });
    return r;
  };

  const auto jacobian_of = [&](const Eigen::MatrixXd& u,
                               std::vector<Triplet>& triplets) {
    triplets.reserve(static_cast<size_t>(map.count()) * (n == 1 ? 3 : 9));
    const auto add = [&](Eigen::Index row, Eigen::Index node, double value) {
      const Eigen::Index col = map.node_to_unknown[static_cast<size_t>(node)];
      if (col >= 0) triplets.emplace_back(row, col, value);
    };
    for (Eigen::Index k = 0; k < map.count(); ++k) {
      const Eigen::Index node = map.unknown_to_node[static_cast<size_t>(k)];
      for (Eigen::Index i = 0; i < n; ++i) {
        for (const int side : {+1, -1}) {
          // Face between `left` and `left + e_i`.
          const Eigen::Index left =
              side > 0 ? node : grid.neighbor(node, i, -1);
          const Eigen::Index right = grid.neighbor(left, i, 1);
          const Eigen::VectorXd p = face_gradient(u, left, i);
          const double w2 = 1.0 + p.squaredNorm();
          const double w = std::sqrt(w2);
          Eigen::VectorXd dphi(n);  // d(phi_i)/d(p_l)
          for (Eigen::Index l = 0; l < n; ++l) {
            dphi(l) = (l == i ? 1.0 / w : 0.0) - p(i) * p(l) / (w2 * w);
          }
          const double sign = side > 0 ? 1.0 : -1.0;
          const double scale = sign / h(i);
          // p_i depends on u(left), u(right).
          add(k, right, scale * dphi(i) / h(i));
          add(k, left, -scale * dphi(i) / h(i));
          // p_j (j != i) averages the central differences at left and right.
          for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double cw = scale * dphi(j) / (4.0 * h(j));
            add(k, grid.neighbor(left, j, 1), cw);
            add(k, grid.neighbor(left, j, -1), -cw);
            add(k, grid.neighbor(right, j, 1), cw);
            add(k, grid.neighbor(right, j, -1), -cw);
          }
        }
      }
      // RHS term -1/W(p_c): derivative +p_l/W^3 times central weights.
      const Eigen::VectorXd pc = central_gradient(u, node);
      const double w2 = 1.0 + pc.squaredNorm();
      const double w3 = w2 * std::sqrt(w2);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double cw = pc(j) / w3 / (2.0 * h(j));
        add(k, grid.neighbor(node, j, 1), cw);
        add(k, grid.neighbor(node, j, -1), -cw);
      }
    }
  };

  Eigen::MatrixXd u = harmonic_extension(grid, boundary, 1);
  u = newton_loop(grid, map, std::move(u), 1, config, log, residual_of,
                  jacobian_of);
  return make_patch(grid, std::move(u), direction);
}

// ---------------------------------------------------------------------------
// General elliptic system, nondivergence form.
// ---------------------------------------------------------------------------

GraphPatch solve_system(const Grid& grid, const BoundaryData& boundary,
                        const Eigen::VectorXd& direction,
                        const SolverConfig& config, SolveLog* log) {
  config.validate();
  boundary.validate(grid);
  const Eigen::Index n = grid.dim();
  const Eigen::Index m = boundary.values.cols();
  check_direction(direction, n + m);

  const UnknownMap map(grid);
  const Eigen::VectorXd h = grid.spacing();

  const auto gradient_at = [&](const Eigen::MatrixXd& u, Eigen::Index node) {
    Eigen::MatrixXd p(n, m);  // p(i,a) = d_i u^a
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index up = grid.neighbor(node, i, 1);
      const Eigen::Index dn = grid.neighbor(node, i, -1);
      for (Eigen::Index a = 0; a < m; ++a) {
        p(i, a) = (u(up, a) - u(dn, a)) / (2.0 * h(i));
      }
    }
    return p;
  };

  const auto second_at = [&](const Eigen::MatrixXd& u, Eigen::Index node,
                             Eigen::Index a) {
    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d2(i, i) = (u(grid.neighbor(node, i, 1), a) - 2.0 * u(node, a) +
                  u(grid.neighbor(node, i, -1), a)) /
                 (h(i) * h(i));
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double cross =
            (u(grid.neighbor(grid.neighbor(node, i, 1), j, 1), a) +
             u(grid.neighbor(grid.neighbor(node, i, -1), j, -1), a) -
             u(grid.neighbor(grid.neighbor(node, i, 1), j, -1), a) -
             u(grid.neighbor(grid.neighbor(node, i, -1), j, 1), a)) /
            (4.0 * h(i) * h(j));
        d2(i, j) = cross;
        d2(j, i) = cross;
      }
    }
    return d2;
  };

  const auto residual_of = [&](const Eigen::MatrixXd& u) {
    Eigen::VectorXd r(map.count() * m);
    parallel_for(0, map.count(), [&](Eigen::Index k) {
      const Eigen::Index node = map.unknown_to_node[static_cast<size_t>(k)];
      const Eigen::MatrixXd p = gradient_at(u, node);
      const Eigen::MatrixXd g =
          Eigen::MatrixXd::Identity(n, n) + p * p.transpose();
      const Eigen::MatrixXd ginv = g.inverse();
      for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::MatrixXd d2 = second_at(u, node, a);
        double value = (ginv * d2).trace() - direction(n + a);
        for (Eigen::Index i = 0; i < n; ++i) {
          value += p(i, a) * direction(i);
        }
        r(k * m + a) = value;
      }
    });
    return r;
  };

  const auto jacobian_of = [&](const Eigen::MatrixXd& u,
                               std::vector<Triplet>& triplets) {
    const auto add = [&](Eigen::Index row, Eigen::Index node, Eigen::Index b,
                         double value) {
      const Eigen::Index col = map.node_to_unknown[static_cast<size_t>(node)];
      if (col >= 0) triplets.emplace_back(row, col * m + b, value);
    };
    for (Eigen::Index k = 0; k < map.count(); ++k) {
      const Eigen::Index node = map.unknown_to_node[static_cast<size_t>(k)];
      const Eigen::MatrixXd p = gradient_at(u, node);
      const Eigen::MatrixXd g =
          Eigen::MatrixXd::Identity(n, n) + p * p.transpose();
      const Eigen::MatrixXd ginv = g.inverse();
      for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index row = k * m + a;
        const Eigen::MatrixXd d2 = second_at(u, node, a);

        // Second-derivative stencils (same component only).
        double diag = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double wii = ginv(i, i) / (h(i) * h(i));
          diag += -2.0 * wii;
          add(row, grid.neighbor(node, i, 1), a, wii);
          add(row, grid.neighbor(node, i, -1), a, wii);
          for (Eigen::Index j = i + 1; j < n; ++j) {
            const double wij = 2.0 * ginv(i, j) / (4.0 * h(i) * h(j));
            add(row, grid.neighbor(grid.neighbor(node, i, 1), j, 1), a, wij);
            add(row, grid.neighbor(grid.neighbor(node, i, -1), j, -1), a, wij);
            add(row, grid.neighbor(grid.neighbor(node, i, 1), j, -1), a, -wij);
            add(row, grid.neighbor(grid.neighbor(node, i, -1), j, 1), a, -wij);
          }
        }
        add(row, node, a, diag);

        // Drift term sum_i p(i,a) V_i (same component).
        for (Eigen::Index i = 0; i < n; ++i) {
          const double cw = direction(i) / (2.0 * h(i));
          add(row, grid.neighbor(node, i, 1), a, cw);
          add(row, grid.neighbor(node, i, -1), a, -cw);
        }

        // Metric dependence: d(tr(ginv d2))/d p^b = -2 (ginv d2 ginv p^b).
        for (Eigen::Index b = 0; b < m; ++b) {
          const Eigen::VectorXd coeff = -2.0 * (ginv * d2 * ginv * p.col(b));
          for (Eigen::Index r2 = 0; r2 < n; ++r2) {
            const double cw = coeff(r2) / (2.0 * h(r2));
            add(row, grid.neighbor(node, r2, 1), b, cw);
            add(row, grid.neighbor(node, r2, -1), b, -cw);
          }
        }
      }
    }
  };

  Eigen::MatrixXd u = harmonic_extension(grid, boundary, m);
  u = newton_loop(grid, map, std::move(u), m, config, log, residual_of,
                  jacobian_of);
  return make_patch(grid, std::move(u), direction);
}

ConvergenceStudy convergence_study(const Grid& coarse, int levels,
                                   Eigen::Index m, const BoundaryFn& boundary,
                                   const Eigen::VectorXd& direction,
                                   const SolverConfig& config,
                                   Formulation formulation,
                                   const BoundaryFn& oracle) {
  ConvergenceStudy study;
  Grid grid = coarse;
  for (int level = 0; level < levels; ++level) {
    const BoundaryData data = sample_boundary(grid, m, boundary);
    const GraphPatch patch =
        formulation == Formulation::Codim1
            ? solve_codim1(grid, data, direction, config)
            : solve_system(grid, data, direction, config);
    double err = 0.0;
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
      const Eigen::VectorXd expected = oracle(grid.node(node));
      err = std::max(
          err, (patch.values.row(node).transpose() - expected).cwiseAbs().maxCoeff());
    }
    study.errors.push_back(err);
    if (level + 1 < levels) grid = grid.refined();
  }
  study.exact = true;
  for (const double e : study.errors) study.exact = study.exact && e < 1e-12;
  if (!study.exact) {
    for (size_t k = 0; k + 1 < study.errors.size(); ++k) {
      study.orders.push_back(
          std::log2(study.errors[k] / study.errors[k + 1]));
    }
  }
  return study;
}

}  // namespace translab

#include "translab/operators.hpp"

#include "translab/fd.hpp"

namespace translab {

std::vector<char> interior_mask(const Grid& grid, int depth) {
  std::vector<char> mask(static_cast<size_t>(grid.size()), 0);
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    mask[static_cast<size_t>(node)] = grid.boundary_distance(node) >= depth;
  }
  return mask;
}

Field laplace_beltrami(const GraphPatch& patch, const ShapeData& shape,
                       const Field& f) {
  const Grid& grid = patch.grid;
  const Eigen::Index n = patch.n();
  Eigen::MatrixXd df = fd::gradient(grid, f);

  Field out = Field::Zero(grid.size());
  Field flux(grid.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index node = 0; node < grid.size(); ++node) {
      const auto ginv = shape.g_inv(node);
      double sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) sum += ginv(i, j) * df(node, j);
      flux(node) = shape.sqrt_det_g(node) * sum;
    }
    const Field dflux = fd::d1(grid, flux, i);
    out += dflux;
  }
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    out(node) /= shape.sqrt_det_g(node);
  }
  return out;
}

Field drift_term(const GraphPatch& patch, const ShapeData& shape,
                 const Field& f) {
  const Grid& grid = patch.grid;
  const Eigen::Index n = patch.n();
  const Eigen::Index m = patch.m();
  const Eigen::MatrixXd df = fd::gradient(grid, f);

  Field out(grid.size());
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const auto ginv = shape.g_inv(node);
    const auto du = shape.grad_u(node);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // <V, T_i> = V_i + sum_a V_{n+a} du(i,a)
      double vt = patch.direction(i);
      for (Eigen::Index a = 0; a < m; ++a) {
        vt += patch.direction(n + a) * du(i, a);
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        sum += ginv(i, j) * df(node, j) * vt;
      }
    }
    out(node) = sum;
  }
  return out;
}

Field drift_laplacian(const GraphPatch& patch, const Field& f) {
  const ShapeData shape = induced_metric(patch);
  return drift_laplacian(patch, shape, f);
}

Field gradient_norm_sq(const GraphPatch& patch, const ShapeData& shape,
                       const Field& f) {
  const Eigen::MatrixXd df = fd::gradient(patch.grid, f);
  Field out(patch.grid.size());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    const auto ginv = shape.g_inv(node);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < patch.n(); ++i) {
      for (Eigen::Index j = 0; j < patch.n(); ++j) {
        sum += ginv(i, j) * df(node, i) * df(node, j);
      }
    }
    out(node) = sum;
  }
  return out;
}

Field weighted_measure(const GraphPatch& patch, const ShapeData& shape) {
  const Field weights = patch.grid.trapezoid_weights();
  const Field height = patch.height();
  Field out(patch.grid.size());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    out(node) = weights(node) * std::exp(height(node)) * shape.sqrt_det_g(node);
  }
  return out;
}

double weighted_volume(const GraphPatch& patch) {
  const ShapeData shape = induced_metric(patch);
  return weighted_measure(patch, shape).sum();
}

double weighted_volume(const ImmersedPatch& patch) {
  const Grid& grid = patch.grid;
  const Eigen::Index n = grid.dim();
  const Eigen::Index dim = patch.positions.cols();

  // Tangents of the sampled immersion by finite differences per component.
  std::vector<Eigen::MatrixXd> tangents(
      static_cast<size_t>(n), Eigen::MatrixXd(grid.size(), dim));
  for (Eigen::Index c = 0; c < dim; ++c) {
    const Field component = patch.positions.col(c);
    for (Eigen::Index i = 0; i < n; ++i) {
      tangents[static_cast<size_t>(i)].col(c) = fd::d1(grid, component, i);
    }
  }

  const Field weights = grid.trapezoid_weights();
  double total = 0.0;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double gij = tangents[static_cast<size_t>(i)]
                               .row(node)
                               .dot(tangents[static_cast<size_t>(j)].row(node));
        g(i, j) = gij;
        g(j, i) = gij;
      }
    }
    const double height = patch.direction.dot(patch.positions.row(node));
    total += weights(node) * std::exp(height) * std::sqrt(g.determinant());
  }
  return total;
}

Field extrinsic_radius(const GraphPatch& patch, const Eigen::VectorXd& base) {
  if (base.size() != patch.ambient_dim()) {
    throw std::invalid_argument("extrinsic_radius: base point dimension");
  }
  Field out(patch.grid.size());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    out(node) = (patch.position(node) - base).norm();
  }
  return out;
}

grassmann::Subspace<double> gauss_map(const ShapeData& shape,
                                      Eigen::Index node) {
  return grassmann::Subspace<double>{shape.tangent(node)};
}

TranslatorResidual translator_residual(const GraphPatch& patch,
                                       const ShapeData& shape) {
  const Eigen::Index m = patch.m();
  const Eigen::Index size = patch.grid.size();
  TranslatorResidual res;
  res.components.resize(size, m);
  res.norm.resize(size);
  for (Eigen::Index node = 0; node < size; ++node) {
    const auto normals = shape.normals(node);
    double norm_sq = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      const double va = normals.row(a).dot(patch.direction);
      const double r = shape.mean_curvature(node, a) - va;
      res.components(node, a) = r;
      norm_sq += r * r;
    }
    res.norm(node) = std::sqrt(norm_sq);
    res.max_all = std::max(res.max_all, res.norm(node));
    if (patch.grid.boundary_distance(node) >= 2) {
      res.max_interior = std::max(res.max_interior, res.norm(node));
    }
  }
  return res;
}

}  // namespace translab

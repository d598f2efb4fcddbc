#include "translab/shape.hpp"

#include "translab/fd.hpp"
#include "translab/parallel.hpp"

#include <Eigen/Dense>

namespace translab {

namespace {

void fill_metric(const GraphPatch& patch, ShapeData& shape) {
  const Eigen::Index n = patch.n();
  const Eigen::Index m = patch.m();
  const Eigen::Index size = patch.grid.size();

  shape.n = n;
  shape.m = m;
  shape.du.resize(size, n * m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Field component = patch.values.col(a);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Field di = fd::d1(patch.grid, component, i);
      for (Eigen::Index node = 0; node < size; ++node) {
        shape.du(node, i * m + a) = di(node);
      }
    }
  }

  shape.metric.resize(size, n * n);
  shape.metric_inv.resize(size, n * n);
  shape.sqrt_det_g.resize(size);
  parallel_for(0, size, [&](Eigen::Index node) {
    const auto du = shape.grad_u(node);
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n) + du * du.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    double det = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) det *= llt.matrixL()(i, i);
    shape.sqrt_det_g(node) = det;
    Eigen::Map<NodeTable>(shape.metric.row(node).data(), n, n) = g;
    Eigen::Map<NodeTable>(shape.metric_inv.row(node).data(), n, n) = ginv;
  });
}

}  // namespace

ShapeData induced_metric(const GraphPatch& patch) {
  ShapeData shape;
  fill_metric(patch, shape);
  return shape;
}

ShapeData second_fundamental_form(const GraphPatch& patch) {
  ShapeData shape;
  fill_metric(patch, shape);

  const Eigen::Index n = patch.n();
  const Eigen::Index m = patch.m();
  const Eigen::Index dim = n + m;
  const Eigen::Index size = patch.grid.size();

  shape.d2u.resize(size, n * n * m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Field component = patch.values.col(a);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const Field dij = fd::d2_mixed(patch.grid, component, i, j);
        for (Eigen::Index node = 0; node < size; ++node) {
          shape.d2u(node, (i * n + j) * m + a) = dij(node);
          shape.d2u(node, (j * n + i) * m + a) = dij(node);
        }
      }
    }
  }

  shape.tangent_frame.resize(size, n * dim);
  shape.tangent_coeff.resize(size, n * n);
  shape.normal_frame.resize(size, m * dim);
  shape.b_coord.resize(size, m * n * n);
  shape.b_orth.resize(size, m * n * n);
  shape.mean_curvature.resize(size, m);
  shape.b_norm_sq.resize(size);
  shape.s_matrix.resize(size, m * m);

  parallel_for(0, size, [&](Eigen::Index node) {
    const auto du = shape.grad_u(node);  // n x m
    const auto ginv = shape.g_inv(node);

    // Orthonormal tangent frame: Gram-Schmidt on the coordinate tangents
    // T_i = (e_i, du_i) in order. The coefficients of the frame rows in the
    // T basis form a lower-triangular matrix with positive diagonal.
    Eigen::MatrixXd tangents = Eigen::MatrixXd::Zero(n, dim);
    tangents.leftCols(n).setIdentity();
    tangents.rightCols(m) = du;
    Eigen::MatrixXd frame = tangents;
    Eigen::MatrixXd coeff = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const double proj = frame.row(i).dot(frame.row(j));
        frame.row(i) -= proj * frame.row(j);
        coeff.row(i) -= proj * coeff.row(j);
      }
      const double norm = frame.row(i).norm();
      frame.row(i) /= norm;
      coeff.row(i) /= norm;
    }
    Eigen::Map<NodeTable>(shape.tangent_frame.row(node).data(), n, dim) =
        frame;
    Eigen::Map<NodeTable>(shape.tangent_coeff.row(node).data(), n, n) =
        coeff;

    // Normal frame: Gram-Schmidt on the graph normals (-du^a, delta^a).
    // The delta-slot entry of e_a stays positive, so the frame is smooth
    // wherever du is.
    Eigen::MatrixXd normals(m, dim);
    for (Eigen::Index a = 0; a < m; ++a) {
      normals.row(a).head(n) = -du.col(a).transpose();
      normals.row(a).tail(m).setZero();
      normals(a, n + a) = 1.0;
    }
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < a; ++b) {
        normals.row(a) -= normals.row(a).dot(normals.row(b)) * normals.row(b);
      }
      normals.row(a) /= normals.row(a).norm();
    }
    Eigen::Map<NodeTable>(shape.normal_frame.row(node).data(), m, dim) =
        normals;

    // h_{a,ij} = <X_ij, e_a>; X_ij = (0, d2u_ij) so only the normal's tail
    // participates.
    for (Eigen::Index a = 0; a < m; ++a) {
      Eigen::Map<NodeTable> h(shape.b_coord.row(node).data() + a * n * n,
                                    n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          double sum = 0.0;
          for (Eigen::Index b = 0; b < m; ++b) {
            sum += shape.d2u(node, (i * n + j) * m + b) * normals(a, n + b);
          }
          h(i, j) = sum;
        }
      }
      shape.mean_curvature(node, a) = (ginv * h).trace();
      Eigen::Map<NodeTable> ho(shape.b_orth.row(node).data() + a * n * n,
                                     n, n);
      ho = coeff * h * coeff.transpose();
    }

    Eigen::Map<NodeTable> s(shape.s_matrix.row(node).data(), m, m);
    double bsq = 0.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto ha = shape.b_orth_of(node, a);
      for (Eigen::Index b = a; b < m; ++b) {
        const auto hb = shape.b_orth_of(node, b);
        const double sab = ha.cwiseProduct(hb).sum();
        s(a, b) = sab;
        s(b, a) = sab;
      }
      bsq += s(a, a);
    }
    shape.b_norm_sq(node) = bsq;
  });

  return shape;
}

Field b_norm_sq_via_contraction(const ShapeData& shape) {
  Field out(shape.b_norm_sq.size());
  for (Eigen::Index node = 0; node < out.size(); ++node) {
    const auto ginv = shape.g_inv(node);
    double sum = 0.0;
    for (Eigen::Index a = 0; a < shape.m; ++a) {
      const auto h = shape.b_coord_of(node, a);
      sum += (ginv * h * ginv * h).trace();
    }
    out(node) = sum;
  }
  return out;
}

}  // namespace translab

#include "translab/diagnostics.hpp"

#include "translab/conformal.hpp"
#include "translab/fd.hpp"
#include "translab/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace translab {

namespace {

constexpr double kV2Margin = 1e-6;  // in-U2 node restriction v <= 2 - margin
constexpr double kV3Margin = 1e-6;

bool selected(const DiagnosticsOptions& options, const std::string& name) {
  if (options.selected.empty()) return true;
  return std::find(options.selected.begin(), options.selected.end(), name) !=
         options.selected.end();
}

struct SuiteContext {
  const GraphPatch& patch;
  DiagnosticsOptions options;
  ShapeData shape;
  std::vector<char> mask;
  Field w_field;
  Field v_field;
  bool translator = false;
  double residual = 0.0;
  double h_sq = 0.0;

  // Per-axis derivatives of the normal frame, mean curvature and V^a.
  std::vector<NodeTable> d_normal;  // axis -> size x (m*(n+m))
  std::vector<NodeTable> d_mean;    // axis -> size x m
  std::vector<NodeTable> d_vn;      // axis -> size x m
  NodeTable v_normal;               // size x m: V^a = <V, e_a>
};

SuiteContext make_context(const GraphPatch& patch,
                          const DiagnosticsOptions& options,
                          bool need_frame_derivatives) {
  SuiteContext ctx{patch, options, second_fundamental_form(patch), {}, {}, {},
                   false, 0.0, 0.0, {}, {}, {}, {}};
  ctx.mask = interior_mask(patch.grid, options.include_boundary_layer ? 0 : 2);
  ctx.h_sq = patch.grid.max_spacing() * patch.grid.max_spacing();

  const Eigen::Index n = patch.n();
  const Eigen::Index m = patch.m();
  const Eigen::Index size = patch.grid.size();

  ctx.w_field.resize(size);
  ctx.v_field.resize(size);
  for (Eigen::Index node = 0; node < size; ++node) {
    const double w = ctx.shape.tangent(node).leftCols(n).determinant();
    ctx.w_field(node) = w;
    ctx.v_field(node) =
        w > 0 ? 1.0 / w : std::numeric_limits<double>::infinity();
  }

  const TranslatorResidual res = translator_residual(patch, ctx.shape);
  ctx.residual = res.max_interior;
  switch (options.assume) {
    case TranslatorAssumption::Yes:
      ctx.translator = true;
      break;
    case TranslatorAssumption::No:
      ctx.translator = false;
      break;
    case TranslatorAssumption::Auto:
      ctx.translator = ctx.residual <= options.translator_detect_tol;
      break;
  }

  if (need_frame_derivatives) {
    ctx.v_normal.resize(size, m);
    for (Eigen::Index node = 0; node < size; ++node) {
      for (Eigen::Index a = 0; a < m; ++a) {
        ctx.v_normal(node, a) =
            ctx.shape.normals(node).row(a).dot(patch.direction);
      }
    }
    ctx.d_normal.resize(static_cast<size_t>(n));
    ctx.d_mean.resize(static_cast<size_t>(n));
    ctx.d_vn.resize(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& dn = ctx.d_normal[static_cast<size_t>(i)];
      dn.resize(size, ctx.shape.normal_frame.cols());
      for (Eigen::Index c = 0; c < ctx.shape.normal_frame.cols(); ++c) {
        dn.col(c) = fd::d1(patch.grid, ctx.shape.normal_frame.col(c), i);
      }
      auto& dh = ctx.d_mean[static_cast<size_t>(i)];
      dh.resize(size, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        dh.col(a) = fd::d1(patch.grid, ctx.shape.mean_curvature.col(a), i);
      }
      auto& dv = ctx.d_vn[static_cast<size_t>(i)];
      dv.resize(size, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        dv.col(a) = fd::d1(patch.grid, ctx.v_normal.col(a), i);
      }
    }
  }
  return ctx;
}

// Connection coefficients <d_i e_b, e_a> at a node.
Eigen::MatrixXd normal_connection(const SuiteContext& ctx, Eigen::Index node,
                                  Eigen::Index axis) {
  const Eigen::Index m = ctx.patch.m();
  const Eigen::Index dim = ctx.patch.ambient_dim();
  const auto normals = ctx.shape.normals(node);
  Eigen::MatrixXd conn(m, m);
  Eigen::Map<const NodeTable> dn(
      ctx.d_normal[static_cast<size_t>(axis)].row(node).data(), m, dim);
  for (Eigen::Index b = 0; b < m; ++b) {
    for (Eigen::Index a = 0; a < m; ++a) {
      conn(b, a) = dn.row(b).dot(normals.row(a));
    }
  }
  return conn;
}

// Normal covariant derivative of a normal field given per-node components
// W^a and their coordinate derivatives dW[axis]; returns the n x m matrix
// (nabla_{d_i} W)^a at the node.
Eigen::MatrixXd normal_covariant_derivative(
    const SuiteContext& ctx, Eigen::Index node,
    const NodeTable& components,
    const std::vector<NodeTable>& d_components) {
  const Eigen::Index n = ctx.patch.n();
  const Eigen::Index m = ctx.patch.m();
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd conn = normal_connection(ctx, node, i);
    for (Eigen::Index a = 0; a < m; ++a) {
      double value = d_components[static_cast<size_t>(i)](node, a);
      for (Eigen::Index b = 0; b < m; ++b) {
        value += components(node, b) * conn(b, a);
      }
      out(i, a) = value;
    }
  }
  return out;
}

// g-norm of an n x m covector-valued matrix: sum_a R_a^T g^{-1} R_a.
double covector_norm(const SuiteContext& ctx, Eigen::Index node,
                     const Eigen::MatrixXd& r) {
  const auto ginv = ctx.shape.g_inv(node);
  double sum = 0.0;
  for (Eigen::Index a = 0; a < r.cols(); ++a) {
    sum += r.col(a).dot(ginv * r.col(a));
  }
  return std::sqrt(std::max(sum, 0.0));
}

struct TwoSided {
  Field lhs, rhs;
  std::vector<char> eligible;
  Field scale_field;  // optional extra per-node magnitudes entering the scale
};

CheckResult finish_check(const SuiteContext& ctx, std::string name,
                         std::string anchor, const TwoSided& sides,
                         bool inequality = false,
                         double tolerance_override = -1.0) {
  CheckResult check;
  check.name = std::move(name);
  check.anchor = std::move(anchor);
  double scale = 1.0;
  double violation = 0.0;
  long evaluated = 0;
  long skipped = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index node = 0; node < ctx.patch.grid.size(); ++node) {
    if (!ctx.mask[static_cast<size_t>(node)]) continue;
    if (!sides.eligible.empty() && !sides.eligible[static_cast<size_t>(node)]) {
      ++skipped;
      continue;
    }
    const double lhs = sides.lhs(node);
    const double rhs = sides.rhs(node);
    if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
      ++skipped;
      continue;
    }
    ++evaluated;
    scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
    if (sides.scale_field.size() > 0) {
      scale = std::max(scale, std::abs(sides.scale_field(node)));
    }
    if (inequality) {
      const double slack = lhs - rhs;
      min_slack = std::min(min_slack, slack);
      violation = std::max(violation, std::max(0.0, -slack));
    } else {
      violation = std::max(violation, std::abs(lhs - rhs));
    }
  }
  check.max_violation = violation;
  check.tolerance = tolerance_override >= 0
                        ? tolerance_override * scale
                        : ctx.options.tolerance_constant * ctx.h_sq * scale;
  check.pass = check.max_violation <= check.tolerance;
  check.nodes_evaluated = evaluated;
  check.info["scale"] = scale;
  if (skipped > 0) check.info["nodes_skipped"] = double(skipped);
  if (inequality && evaluated > 0) check.info["min_slack"] = min_slack;
  return check;
}

// Graph coordinates of the plane spanned by `frame` over the adapted frames
// of the base plane.
Eigen::MatrixXd graph_coords_over(const grassmann::AdaptedFrames<double>& base,
                                  const Eigen::MatrixXd& frame) {
  const Eigen::MatrixXd a = frame * base.tangent.transpose();
  const Eigen::MatrixXd b = frame * base.normal.transpose();
  return a.partialPivLu().solve(b);
}

// dGauss along the orthonormal tangent frame directions, as adapted-coframe
// coefficient matrices; requires interior depth >= 1.
std::vector<Eigen::MatrixXd> gauss_differential(
    const SuiteContext& ctx, Eigen::Index node,
    const grassmann::AdaptedFrames<double>& adapted) {
  const Eigen::Index n = ctx.patch.n();
  std::vector<Eigen::MatrixXd> d_coord(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index up = ctx.patch.grid.neighbor(node, i, 1);
    const Eigen::Index dn = ctx.patch.grid.neighbor(node, i, -1);
    const Eigen::MatrixXd z_up = graph_coords_over(adapted, ctx.shape.tangent(up));
    const Eigen::MatrixXd z_dn = graph_coords_over(adapted, ctx.shape.tangent(dn));
    d_coord[static_cast<size_t>(i)] =
        (z_up - z_dn) / (2.0 * ctx.patch.grid.spacing()(i));
  }
  const auto coeff = Eigen::Map<const NodeTable>(
      ctx.shape.tangent_coeff.row(node).data(), n, n);
  std::vector<Eigen::MatrixXd> d_frame(static_cast<size_t>(n));
  for (Eigen::Index a = 0; a < n; ++a) {
    Eigen::MatrixXd sum =
        Eigen::MatrixXd::Zero(d_coord[0].rows(), d_coord[0].cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      sum += coeff(a, i) * d_coord[static_cast<size_t>(i)];
    }
    d_frame[static_cast<size_t>(a)] = sum;
  }
  return d_frame;
}

// Second fundamental form in the adapted frames of the node's Gauss plane:
// hb[a](i,j) = <B(t_i, t_j), n_a> with t, n the adapted tangent/normal rows.
std::vector<Eigen::MatrixXd> adapted_second_form(
    const SuiteContext& ctx, Eigen::Index node,
    const grassmann::AdaptedFrames<double>& adapted) {
  const Eigen::Index n = ctx.patch.n();
  const Eigen::Index m = ctx.patch.m();
  const Eigen::MatrixXd c = adapted.tangent * ctx.shape.tangent(node).transpose();
  const Eigen::MatrixXd q = ctx.shape.normals(node) * adapted.normal.transpose();
  std::vector<Eigen::MatrixXd> hb(static_cast<size_t>(m));
  for (Eigen::Index a = 0; a < m; ++a) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index b = 0; b < m; ++b) {
      sum += q(b, a) * ctx.shape.b_orth_of(node, b);
    }
    hb[static_cast<size_t>(a)] = c * sum * c.transpose();
  }
  return hb;
}

double flat_normal_bundle_defect(const SuiteContext& ctx) {
  const Eigen::Index m = ctx.patch.m();
  if (m == 1) return 0.0;
  double worst = 0.0;
  for (Eigen::Index node = 0; node < ctx.patch.grid.size(); ++node) {
    if (!ctx.mask[static_cast<size_t>(node)]) continue;
    for (Eigen::Index a = 0; a < m; ++a) {
      const Eigen::MatrixXd ha = ctx.shape.b_orth_of(node, a);
      for (Eigen::Index b = a + 1; b < m; ++b) {
        const Eigen::MatrixXd hb = ctx.shape.b_orth_of(node, b);
        worst = std::max(worst, (ha * hb - hb * ha).norm());
      }
    }
  }
  return worst;
}

Field random_test_function(const Grid& grid, Rng& rng) {
  const Eigen::Index n = grid.dim();
  const int modes = 6;
  Eigen::MatrixXi k(modes, n);
  Eigen::VectorXd amp(modes);
  for (int s = 0; s < modes; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      k(s, i) = 1 + static_cast<int>(rng.integer(4));
    }
    amp(s) = rng.normal();
  }
  Field f(grid.size());
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const Eigen::VectorXd x = grid.node(node);
    double value = 0.0;
    for (int s = 0; s < modes; ++s) {
      double prod = amp(s);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = (x(i) - grid.lo()(i)) / (grid.hi()(i) - grid.lo()(i));
        prod *= std::sin(k(s, i) * EIGEN_PI * xi);
      }
      value += prod;
    }
    f(node) = value;
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

DiagnosticsReport identity_suite(const GraphPatch& patch,
                                 const DiagnosticsOptions& options) {
  SuiteContext ctx = make_context(patch, options, true);
  const Eigen::Index n = patch.n();
  const Eigen::Index m = patch.m();
  const Eigen::Index size = patch.grid.size();

  DiagnosticsReport report;
  report.grid.n = n;
  report.grid.m = m;
  for (Eigen::Index i = 0; i < n; ++i) {
    report.grid.shape.push_back(patch.grid.shape()(i));
    report.grid.spacing.push_back(patch.grid.spacing()(i));
  }

  const bool run_translator_checks = ctx.translator;

  // --- H_gradient: nabla^N H = -B(V^T, .) -------------------------------
  if (run_translator_checks && selected(options, "H_gradient")) {
    TwoSided sides{Field::Zero(size), Field::Zero(size), {},
                   Field::Zero(size)};
    for (Eigen::Index node = 0; node < size; ++node) {
      if (!ctx.mask[static_cast<size_t>(node)]) continue;
      const Eigen::MatrixXd lhs = normal_covariant_derivative(
          ctx, node, ctx.shape.mean_curvature, ctx.d_mean);
      // (V^T)^j = g^{jk} <V, T_k>
      const auto ginv = ctx.shape.g_inv(node);
      const auto du = ctx.shape.grad_u(node);
      Eigen::VectorXd vt(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        double dot = patch.direction(k);
        for (Eigen::Index a = 0; a < m; ++a) {
          dot += patch.direction(n + a) * du(k, a);
        }
        vt(k) = dot;
      }
      const Eigen::VectorXd vt_up = ginv * vt;
      Eigen::MatrixXd rhs(n, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const auto h = ctx.shape.b_coord_of(node, a);
        rhs.col(a) = -(h * vt_up);
      }
      sides.lhs(node) = covector_norm(ctx, node, Eigen::MatrixXd(lhs - rhs));
      sides.scale_field(node) = std::max(covector_norm(ctx, node, lhs),
                                         covector_norm(ctx, node, rhs));
    }
    report.checks.push_back(finish_check(
        ctx, "H_gradient",
        "grad_N H + B(V^T, .) = 0 on translators", sides));
  }

  // --- tension: grad_N (H - V^N) = 0 ------------------------------------
  if (run_translator_checks && selected(options, "tension")) {
    TwoSided sides{Field::Zero(size), Field::Zero(size), {},
                   Field::Zero(size)};
    NodeTable diff = ctx.shape.mean_curvature - ctx.v_normal;
    std::vector<NodeTable> d_diff(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      d_diff[static_cast<size_t>(i)] =
          ctx.d_mean[static_cast<size_t>(i)] - ctx.d_vn[static_cast<size_t>(i)];
    }
    for (Eigen::Index node = 0; node < size; ++node) {
      if (!ctx.mask[static_cast<size_t>(node)]) continue;
      const Eigen::MatrixXd tension =
          normal_covariant_derivative(ctx, node, diff, d_diff);
      const Eigen::MatrixXd dh = normal_covariant_derivative(
          ctx, node, ctx.shape.mean_curvature, ctx.d_mean);
      const Eigen::MatrixXd dv =
          normal_covariant_derivative(ctx, node, ctx.v_normal, ctx.d_vn);
      sides.lhs(node) = covector_norm(ctx, node, tension);
      // The natural scale is the size of the two cancelling gradients.
      sides.scale_field(node) = std::max(covector_norm(ctx, node, dh),
                                         covector_norm(ctx, node, dv));
    }
    report.checks.push_back(finish_check(
        ctx, "tension", "tension field of the Gauss map vanishes", sides));
  }

  // --- w identity (flat normal bundle): L w + |B|^2 w = 0 ----------------
  const double flat_defect = flat_normal_bundle_defect(ctx);
  const bool flat_normal =
      m == 1 || flat_defect <= options.tolerance_constant * ctx.h_sq *
                                   std::max(1.0, ctx.shape.b_norm_sq.maxCoeff());
  if (run_translator_checks && flat_normal && selected(options, "w_identity")) {
    const Field lw = drift_laplacian(patch, ctx.shape, ctx.w_field);
    TwoSided sides{lw, Field(size), {}};
    for (Eigen::Index node = 0; node < size; ++node) {
      sides.rhs(node) = -ctx.shape.b_norm_sq(node) * ctx.w_field(node);
    }
    CheckResult check = finish_check(
        ctx, "w_identity", "L w = -|B|^2 w (flat normal bundle)", sides);
    check.info["flat_normal_defect"] = flat_defect;
    report.checks.push_back(check);
  }

  // --- w identity, general codimension -----------------------------------
  if (run_translator_checks && m >= 2 && selected(options, "w_identity_general")) {
    const Field lw = drift_laplacian(patch, ctx.shape, ctx.w_field);
    TwoSided sides{lw, Field::Zero(size), {}};
    for (Eigen::Index node = 0; node < size; ++node) {
      if (!ctx.mask[static_cast<size_t>(node)]) continue;
      const auto frame = ctx.shape.tangent(node);
      const auto normals = ctx.shape.normals(node);
      double extra = 0.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        const auto ha = ctx.shape.b_orth_of(node, a);
        for (Eigen::Index b = a + 1; b < m; ++b) {
          const auto hb = ctx.shape.b_orth_of(node, b);
          for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index k = 0; k < n; ++k) {
              if (j == k) continue;
              double coeff = 0.0;
              for (Eigen::Index i = 0; i < n; ++i) {
                coeff += ha(i, j) * hb(i, k) - hb(i, j) * ha(i, k);
              }
              if (coeff == 0.0) continue;
              Eigen::MatrixXd modified = frame.leftCols(n);
              modified.row(j) = normals.row(a).head(n);
              modified.row(k) = normals.row(b).head(n);
              extra += coeff * modified.determinant();
            }
          }
        }
      }
      sides.rhs(node) =
          -ctx.shape.b_norm_sq(node) * ctx.w_field(node) + extra;
    }
    report.checks.push_back(finish_check(
        ctx, "w_identity_general",
        "L w = -|B|^2 w + double-replacement term", sides));
  }

  // --- v identity: L v = v |B|^2 + slope quadratic ------------------------
  if (run_translator_checks && selected(options, "v_identity")) {
    const Field lv = drift_laplacian(patch, ctx.shape, ctx.v_field);
    TwoSided sides{lv, Field::Zero(size), {}};
    sides.eligible.assign(static_cast<size_t>(size), 0);
    const auto p0 = graph_reference_plane(patch);
    for (Eigen::Index node = 0; node < size; ++node) {
      if (!ctx.mask[static_cast<size_t>(node)]) continue;
      if (!(ctx.v_field(node) <= 2.0 - kV2Margin)) continue;
      sides.eligible[static_cast<size_t>(node)] = 1;
      const auto adapted =
          grassmann::svd_adapted_frames(gauss_map(ctx.shape, node), p0);
      const auto hb = adapted_second_form(ctx, node, adapted);
      const Eigen::Index p = adapted.angles.count();
      const double v = ctx.v_field(node);
      double sum = ctx.shape.b_norm_sq(node);
      for (Eigen::Index a = 0; a < p; ++a) {
        const double la = adapted.angles.lambda(a);
        for (Eigen::Index j = 0; j < n; ++j) {
          sum += 2.0 * la * la * hb[static_cast<size_t>(a)](a, j) *
                 hb[static_cast<size_t>(a)](a, j);
        }
        for (Eigen::Index b = 0; b < p; ++b) {
          if (a == b) continue;
          const double lb = adapted.angles.lambda(b);
          for (Eigen::Index j = 0; j < n; ++j) {
            sum += la * lb *
                   (hb[static_cast<size_t>(a)](a, j) *
                        hb[static_cast<size_t>(b)](b, j) +
                    hb[static_cast<size_t>(a)](b, j) *
                        hb[static_cast<size_t>(b)](a, j));
          }
        }
      }
      sides.rhs(node) = v * sum;
    }
    report.checks.push_back(finish_check(
        ctx, "v_identity", "L v = v|B|^2 + v * slope quadratic on {v < 2}",
        sides));
  }

  // --- composition formula: L (v o Gauss) = Hess v (dGauss, dGauss) ------
  if (run_translator_checks && selected(options, "composition")) {
    const Field lv = drift_laplacian(patch, ctx.shape, ctx.v_field);
    TwoSided sides{lv, Field::Zero(size), {}};
    sides.eligible.assign(static_cast<size_t>(size), 0);
    const auto p0 = graph_reference_plane(patch);
    for (Eigen::Index node = 0; node < size; ++node) {
      if (!ctx.mask[static_cast<size_t>(node)]) continue;
      if (!(ctx.v_field(node) <= 2.0 - kV2Margin)) continue;
      sides.eligible[static_cast<size_t>(node)] = 1;
      const auto adapted =
          grassmann::svd_adapted_frames(gauss_map(ctx.shape, node), p0);
      const auto dgamma = gauss_differential(ctx, node, adapted);
      double sum = 0.0;
      for (const auto& direction : dgamma) {
        sum += grassmann::hess_v_quadratic_form(adapted.angles, direction);
      }
      sides.rhs(node) = sum;
    }
    report.checks.push_back(finish_check(
        ctx, "composition",
        "L (F o Gauss) = Hess F(dGauss e_i, dGauss e_i), F = v", sides));
  }

  // --- Gauss map energy: |dGauss|^2 = |B|^2 ------------------------------
  if (selected(options, "gauss_energy")) {
    TwoSided sides{Field::Zero(size), ctx.shape.b_norm_sq, {}};
    const auto p0 = graph_reference_plane(patch);
    for (Eigen::Index node = 0; node < size; ++node) {
      if (!ctx.mask[static_cast<size_t>(node)]) continue;
      const auto adapted =
          grassmann::svd_adapted_frames(gauss_map(ctx.shape, node), p0);
      const auto dgamma = gauss_differential(ctx, node, adapted);
      double sum = 0.0;
      for (const auto& direction : dgamma) sum += direction.squaredNorm();
      sides.lhs(node) = sum;
    }
    report.checks.push_back(
        finish_check(ctx, "gauss_energy", "|dGauss|^2 = |B|^2", sides));
  }

  // --- radius Laplacian: Delta r^2 = 2n + 2 <H, X - X0> -------------------
  if (selected(options, "radius_laplacian")) {
    Eigen::VectorXd base = patch.position(patch.grid.size() / 2);
    const Field r = extrinsic_radius(patch, base);
    const Field r2 = r.cwiseProduct(r);
    const Field lap = laplace_beltrami(patch, ctx.shape, r2);
    TwoSided sides{lap, Field(size), {}};
    for (Eigen::Index node = 0; node < size; ++node) {
      const Eigen::VectorXd offset = patch.position(node) - base;
      double hx = 0.0;
      for (Eigen::Index a = 0; a < m; ++a) {
        hx += ctx.shape.mean_curvature(node, a) *
              ctx.shape.normals(node).row(a).dot(offset);
      }
      sides.rhs(node) = 2.0 * double(n) + 2.0 * hx;
    }
    report.checks.push_back(finish_check(
        ctx, "radius_laplacian", "Delta r^2 = 2n + 2<H, X - X0>", sides));
  }

  // --- graph slope identity: v o Gauss = sqrt(det(I + Du Du^T)) ----------
  if (selected(options, "graph_slope")) {
    TwoSided sides{ctx.v_field, ctx.shape.sqrt_det_g, {}};
    report.checks.push_back(finish_check(ctx, "graph_slope",
                                         "v(Gauss, P0) = sqrt(det(I+Du Du^T))",
                                         sides, false, 1e-10));
  }

  for (auto& check : report.checks) {
    check.info["translator"] = ctx.translator ? 1.0 : 0.0;
    check.info["translator_residual"] = ctx.residual;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Inequality suite
// ---------------------------------------------------------------------------

DiagnosticsReport inequality_suite(const GraphPatch& patch,
                                   const DiagnosticsOptions& options) {
  SuiteContext ctx = make_context(patch, options, false);
  const Eigen::Index size = patch.grid.size();

  DiagnosticsReport report;
  report.grid.n = patch.n();
  report.grid.m = patch.m();
  for (Eigen::Index i = 0; i < patch.n(); ++i) {
    report.grid.shape.push_back(patch.grid.shape()(i));
    report.grid.spacing.push_back(patch.grid.spacing()(i));
  }

  const double flat_defect = flat_normal_bundle_defect(ctx);
  const bool flat_normal =
      patch.m() == 1 ||
      flat_defect <= options.tolerance_constant * ctx.h_sq *
                         std::max(1.0, ctx.shape.b_norm_sq.maxCoeff());
  const int k_constant =
      options.force_simons_k.value_or(flat_normal ? 2 : 3);

  // --- Simons-type inequality: L |B|^2 >= 2 |grad |B||^2 - k |B|^4 --------
  if (ctx.translator && selected(options, "simons")) {
    const Field bsq = ctx.shape.b_norm_sq;
    const Field lb = drift_laplacian(patch, ctx.shape, bsq);
    const Field babs = bsq.cwiseMax(0.0).cwiseSqrt();
    const Field grad_b = gradient_norm_sq(patch, ctx.shape, babs);
    TwoSided sides{lb, Field(size), {}};
    for (Eigen::Index node = 0; node < size; ++node) {
      sides.rhs(node) =
          2.0 * grad_b(node) - k_constant * bsq(node) * bsq(node);
    }
    CheckResult check = finish_check(
        ctx, "simons", "L |B|^2 >= 2 |grad |B||^2 - k |B|^4", sides, true);
    check.info["k"] = k_constant;
    check.info["flat_normal_defect"] = flat_defect;
    report.checks.push_back(check);
  }

  // --- gradient bound: |grad v|^2 <= v^4 |B|^2 ----------------------------
  if (selected(options, "gradient_v_bound")) {
    const Field grad_v = gradient_norm_sq(patch, ctx.shape, ctx.v_field);
    TwoSided sides{Field(size), grad_v, {}};
    for (Eigen::Index node = 0; node < size; ++node) {
      const double v = ctx.v_field(node);
      sides.lhs(node) = v * v * v * v * ctx.shape.b_norm_sq(node);
    }
    report.checks.push_back(finish_check(
        ctx, "gradient_v_bound", "|grad v|^2 <= v^4 |B|^2", sides, true));
  }

  // --- h drift bound: L h >= 3 h |B|^2 on {v < 2} -------------------------
  if (ctx.translator && selected(options, "h_drift")) {
    Field h_field(size);
    for (Eigen::Index node = 0; node < size; ++node) {
      const double v = ctx.v_field(node);
      h_field(node) = v <= 2.0 - kV2Margin
                          ? grassmann::h_function(v)
                          : std::numeric_limits<double>::quiet_NaN();
    }
    const Field lh = drift_laplacian(patch, ctx.shape, h_field);
    TwoSided sides{lh, Field(size), {}};
    sides.eligible.assign(static_cast<size_t>(size), 0);
    for (Eigen::Index node = 0; node < size; ++node) {
      const bool ok = ctx.v_field(node) <= 2.0 - kV2Margin;
      sides.eligible[static_cast<size_t>(node)] = ok;
      sides.rhs(node) =
          ok ? 3.0 * h_field(node) * ctx.shape.b_norm_sq(node) : 0.0;
    }
    report.checks.push_back(finish_check(
        ctx, "h_drift", "L h >= 3 h |B|^2 on {v < 2}", sides, true));
  }

  // --- v drift nonnegativity on {v < 3} -----------------------------------
  if (ctx.translator && selected(options, "v_drift_nonneg")) {
    const Field lv = drift_laplacian(patch, ctx.shape, ctx.v_field);
    TwoSided sides{lv, Field::Zero(size), {}};
    sides.eligible.assign(static_cast<size_t>(size), 0);
    for (Eigen::Index node = 0; node < size; ++node) {
      sides.eligible[static_cast<size_t>(node)] =
          ctx.v_field(node) <= 3.0 - kV3Margin;
    }
    report.checks.push_back(finish_check(
        ctx, "v_drift_nonneg", "L v >= 0 on {v < 3}", sides, true));
  }

  // --- reported ratio inf L v / |B|^2 on {v <= b0} (never asserted) -------
  if (ctx.translator && selected(options, "v_drift_ratio")) {
    const Field lv = drift_laplacian(patch, ctx.shape, ctx.v_field);
    CheckResult check;
    check.name = "v_drift_ratio";
    check.anchor = "reported inf L v / |B|^2 on {v <= b0}";
    check.asserted = false;
    check.tolerance = std::numeric_limits<double>::infinity();
    const double b0 = 3.0 - kV3Margin;
    double ratio = std::numeric_limits<double>::infinity();
    long evaluated = 0;
    for (Eigen::Index node = 0; node < size; ++node) {
      if (!ctx.mask[static_cast<size_t>(node)]) continue;
      if (!(ctx.v_field(node) <= b0)) continue;
      const double bsq = ctx.shape.b_norm_sq(node);
      if (bsq < 1e-12) continue;
      ratio = std::min(ratio, lv(node) / bsq);
      ++evaluated;
    }
    check.nodes_evaluated = evaluated;
    check.pass = true;
    check.max_violation = 0.0;
    check.info["K0_estimate"] = evaluated > 0 ? ratio : 0.0;
    check.info["b0"] = b0;
    report.checks.push_back(check);
  }

  for (auto& check : report.checks) {
    check.info["translator"] = ctx.translator ? 1.0 : 0.0;
    check.info["k_branch"] = k_constant;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Variational probes
// ---------------------------------------------------------------------------

Field bump_field(const Grid& grid, const Eigen::VectorXd& center,
                 double radius) {
  Field f = Field::Zero(grid.size());
  for (Eigen::Index node = 0; node < grid.size(); ++node) {
    const double rho_sq = (grid.node(node) - center).squaredNorm() /
                          (radius * radius);
    if (rho_sq < 1.0) f(node) = std::exp(-1.0 / (1.0 - rho_sq));
  }
  return f;
}

VariationCheck second_variation_check(const GraphPatch& patch,
                                      const Field& phi, double delta) {
  if (patch.m() != 1) {
    throw std::invalid_argument("second_variation_check: requires m = 1");
  }
  if (phi.size() != patch.grid.size()) {
    throw std::invalid_argument("second_variation_check: field size mismatch");
  }
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    if (patch.grid.boundary_distance(node) <= 2 && phi(node) != 0.0) {
      throw std::invalid_argument(
          "second_variation_check: phi must vanish on a boundary collar");
    }
  }

  const ShapeData shape = second_fundamental_form(patch);
  const ImmersedPatch base = as_immersed(patch);

  const auto volume_at = [&](double s) {
    ImmersedPatch moved = base;
    for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
      moved.positions.row(node) +=
          s * phi(node) * shape.normals(node).row(0);
    }
    return weighted_volume(moved);
  };

  VariationCheck result;
  const double f_plus = volume_at(delta);
  const double f_zero = volume_at(0.0);
  const double f_minus = volume_at(-delta);
  result.fd_value = (f_plus - 2.0 * f_zero + f_minus) / (delta * delta);
  result.first_variation = (f_plus - f_minus) / (2.0 * delta);
  result.scale = f_zero;

  const Field lphi = drift_laplacian(patch, shape, phi);
  const Field measure = weighted_measure(patch, shape);
  double formula = 0.0;
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    formula -= measure(node) * phi(node) *
               (lphi(node) + shape.b_norm_sq(node) * phi(node));
  }
  result.formula_value = formula;
  result.rel_err = std::abs(result.fd_value - formula) /
                   std::max(std::abs(formula), 1e-300);
  return result;
}

RayleighProbe stability_rayleigh_probe(const GraphPatch& patch, int trials,
                                       std::uint64_t seed) {
  if (patch.m() != 1) {
    throw std::invalid_argument("stability_rayleigh_probe: requires m = 1");
  }
  const ShapeData shape = second_fundamental_form(patch);
  const Field measure = weighted_measure(patch, shape);
  Rng rng(seed);

  RayleighProbe probe;
  probe.min_quotient = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Field phi = random_test_function(patch.grid, rng);
    const Field lphi = drift_laplacian(patch, shape, phi);
    double numerator = 0.0;
    double denominator = 0.0;
    for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
      numerator += measure(node) * phi(node) *
                   (-lphi(node) - shape.b_norm_sq(node) * phi(node));
      denominator += measure(node) * phi(node) * phi(node);
    }
    const double quotient = numerator / denominator;
    probe.quotients.push_back(quotient);
    probe.min_quotient = std::min(probe.min_quotient, quotient);
  }
  return probe;
}

CompetitorProbe minimality_competitor_test(const GraphPatch& patch, int trials,
                                           double amplitude,
                                           std::uint64_t seed) {
  if (patch.m() != 1) {
    throw std::invalid_argument("minimality_competitor_test: requires m = 1");
  }
  for (Eigen::Index i = 0; i < patch.n(); ++i) {
    if (std::abs(patch.direction(i)) > 1e-12) {
      throw std::invalid_argument(
          "minimality_competitor_test: requires V = eps_{n+1}");
    }
  }
  Rng rng(seed);
  CompetitorProbe probe;
  probe.base_volume = weighted_volume(patch);
  probe.min_gap = std::numeric_limits<double>::infinity();

  const auto competitor_volume = [&](const Field& psi) {
    GraphPatch moved = patch;
    moved.values.col(0) += psi;
    return weighted_volume(moved);
  };

  Field first_direction;
  for (int t = 0; t < trials; ++t) {
    Field psi = random_test_function(patch.grid, rng);
    const double peak = psi.cwiseAbs().maxCoeff();
    if (peak > 0) psi *= amplitude / peak;
    if (t == 0) first_direction = psi;
    const double gap = competitor_volume(psi) - probe.base_volume;
    probe.min_gap = std::min(probe.min_gap, gap);
    if (!(gap > 0.0)) probe.positive_for_nonzero = false;
  }
  probe.min_gap_relative = probe.min_gap / probe.base_volume;

  // Growth of the gap along one fixed direction.
  std::vector<double> log_c, log_gap;
  for (const double factor : {0.25, 0.5, 0.75, 1.0}) {
    const Field psi = factor * first_direction;
    const double gap = competitor_volume(psi) - probe.base_volume;
    if (gap > 0) {
      log_c.push_back(std::log(factor * amplitude));
      log_gap.push_back(std::log(gap));
    }
  }
  if (log_c.size() >= 2) {
    const double mean_x =
        std::accumulate(log_c.begin(), log_c.end(), 0.0) / log_c.size();
    const double mean_y =
        std::accumulate(log_gap.begin(), log_gap.end(), 0.0) / log_gap.size();
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < log_c.size(); ++i) {
      sxx += (log_c[i] - mean_x) * (log_c[i] - mean_x);
      sxy += (log_c[i] - mean_x) * (log_gap[i] - mean_y);
    }
    probe.fitted_exponent = sxy / sxx;
  }
  return probe;
}

// ---------------------------------------------------------------------------
// Volume growth
// ---------------------------------------------------------------------------

GrowthProfile volume_growth_profile(const GraphPatch& patch,
                                    const GrowthOptions& options) {
  const Eigen::Index n = patch.n();
  const Eigen::Index dim = patch.ambient_dim();
  if (dim > 3) {
    throw std::domain_error("volume_growth_profile: ambient dimension > 3");
  }

  Eigen::VectorXd origin_base =
      options.origin_base.value_or((patch.grid.lo() + patch.grid.hi()) / 2.0);
  // Snap to the nearest node so the origin lies on the patch.
  Eigen::VectorXi mi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    mi(i) = static_cast<int>(std::lround(
        (origin_base(i) - patch.grid.lo()(i)) / patch.grid.spacing()(i)));
  }
  const Eigen::Index origin_node = patch.grid.flat(mi);
  const Eigen::VectorXd origin = patch.position(origin_node);

  // Ambient bounding box with a margin.
  Eigen::VectorXd lo(dim), hi(dim);
  lo.setConstant(std::numeric_limits<double>::infinity());
  hi.setConstant(-std::numeric_limits<double>::infinity());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    const Eigen::VectorXd x = patch.position(node);
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double spacing = options.ambient_spacing > 0
                             ? options.ambient_spacing
                             : patch.grid.spacing().minCoeff() / 2.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double margin = 0.05 * (hi(i) - lo(i)) + 2.0 * spacing;
    lo(i) -= margin;
    hi(i) += margin;
  }
  const Grid ambient =
      ambient_grid_through(origin, lo, hi, spacing);
  const Field distance = conformal_distance_field(
      ambient, origin, patch.direction, static_cast<int>(n));

  Field rho(patch.grid.size());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    rho(node) = interpolate(ambient, distance, patch.position(node));
  }

  double inscribed = std::numeric_limits<double>::infinity();
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    if (patch.grid.is_boundary(node)) {
      inscribed = std::min(inscribed, rho(node));
    }
  }

  GrowthProfile profile;
  profile.rho_limit = inscribed;
  if (options.rho_max) {
    profile.truncated = *options.rho_max > inscribed;
    profile.rho_limit = std::min(*options.rho_max, inscribed);
  }

  // Cumulative conformal volume, piecewise linear in rho.
  const ShapeData shape = induced_metric(patch);
  const Field measure = weighted_measure(patch, shape);
  std::vector<Eigen::Index> order(static_cast<size_t>(patch.grid.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return rho(a) < rho(b); });
  std::vector<double> breakpoints, cumulative;
  double running = 0.0;
  for (const Eigen::Index node : order) {
    running += measure(node);
    breakpoints.push_back(rho(node));
    cumulative.push_back(running);
  }
  const auto volume_at = [&](double r) {
    const auto it =
        std::upper_bound(breakpoints.begin(), breakpoints.end(), r);
    const size_t k = static_cast<size_t>(it - breakpoints.begin());
    if (k == 0) return 0.0;
    if (k >= breakpoints.size()) return cumulative.back();
    const double c0 = cumulative[k - 1];
    const double span = breakpoints[k] - breakpoints[k - 1];
    if (span <= 0) return cumulative[k];
    return c0 + (cumulative[k] - c0) * (r - breakpoints[k - 1]) / span;
  };

  const int steps = std::max(options.steps, 2);
  const double rho_lo = options.rho_min_fraction * profile.rho_limit;
  for (int s = 0; s < steps; ++s) {
    const double r = rho_lo + (profile.rho_limit - rho_lo) * s / (steps - 1);
    profile.rho.push_back(r);
    profile.volume.push_back(volume_at(r));
    profile.ratio.push_back(profile.volume.back() / std::pow(r, double(n)));
  }
  for (size_t s = 0; s + 1 < profile.ratio.size(); ++s) {
    const double dip =
        (profile.ratio[s] - profile.ratio[s + 1]) / profile.ratio[s];
    profile.max_relative_dip = std::max(profile.max_relative_dip, dip);
  }
  return profile;
}

// ---------------------------------------------------------------------------
// Generalized maximum principle probe
// ---------------------------------------------------------------------------

OmoriYauProbe omori_yau_probe(const GraphPatch& patch, const Field& f,
                              const std::vector<double>& epsilons,
                              const Eigen::VectorXd& base) {
  const ShapeData shape = second_fundamental_form(patch);
  const Field r = extrinsic_radius(patch, base);
  const Field grad_sq = gradient_norm_sq(patch, shape, f);
  const Field lf = drift_laplacian(patch, shape, f);

  OmoriYauProbe probe;
  // Sublinearity heuristic: fitted df/dr over the outer radius band.
  const double r_max = r.maxCoeff();
  double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
  long count = 0;
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    if (r(node) < 0.5 * r_max) continue;
    sx += r(node);
    sy += f(node);
    ++count;
  }
  if (count >= 2) {
    const double mean_r = sx / count;
    const double mean_f = sy / count;
    for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
      if (r(node) < 0.5 * r_max) continue;
      sxx += (r(node) - mean_r) * (r(node) - mean_r);
      sxy += (r(node) - mean_r) * (f(node) - mean_f);
    }
    probe.fitted_slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  probe.sublinear_hypothesis = std::abs(probe.fitted_slope) < 0.8;

  for (const double eps : epsilons) {
    OmoriYauSample sample;
    sample.epsilon = eps;
    double best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
      const double value = f(node) - eps * r(node);
      if (value > best) {
        best = value;
        sample.argmax = node;
      }
    }
    sample.f_value = f(sample.argmax);
    sample.gradient_norm = std::sqrt(std::max(grad_sq(sample.argmax), 0.0));
    sample.drift_laplacian = lf(sample.argmax);
    probe.samples.push_back(sample);
  }
  return probe;
}

// ---------------------------------------------------------------------------
// Curvature estimate probe
// ---------------------------------------------------------------------------

CurvatureGrowthProbe curvature_estimate_probe(const GraphPatch& patch,
                                              const Eigen::VectorXd& base,
                                              const std::vector<double>& radii,
                                              double h2) {
  if (radii.empty()) {
    throw std::invalid_argument("curvature_estimate_probe: empty radius list");
  }
  const ShapeData shape = second_fundamental_form(patch);
  const Field r = extrinsic_radius(patch, base);
  const double a_max = *std::max_element(radii.begin(), radii.end());

  Field h_field(patch.grid.size());
  for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
    if (r(node) > a_max) {
      h_field(node) = 0.0;
      continue;
    }
    const double w = shape.tangent(node).leftCols(patch.n()).determinant();
    const double v = 1.0 / w;
    if (!(v < 2.0)) {
      throw std::domain_error(
          "curvature_estimate_probe: v >= 2 inside the largest ball");
    }
    h_field(node) = grassmann::h_function(v);
    if (h_field(node) >= h2) {
      throw std::domain_error(
          "curvature_estimate_probe: h >= h2 inside the largest ball");
    }
  }

  CurvatureGrowthProbe probe;
  probe.zero_function = true;
  for (const double a : radii) {
    double worst = 0.0;
    for (Eigen::Index node = 0; node < patch.grid.size(); ++node) {
      if (r(node) > a) continue;
      const double margin = a * a - r(node) * r(node);
      const double denom = h2 - h_field(node);
      const double value = margin * margin * shape.b_norm_sq(node) /
                           (denom * denom);
      worst = std::max(worst, value);
    }
    probe.radii.push_back(a);
    probe.max_f.push_back(worst);
    if (worst > 1e-14) probe.zero_function = false;
  }
  if (!probe.zero_function) {
    double sx = 0.0, sy = 0.0;
    for (size_t k = 0; k < probe.radii.size(); ++k) {
      sx += std::log(probe.radii[k]);
      sy += std::log(std::max(probe.max_f[k], 1e-300));
    }
    const double mean_x = sx / probe.radii.size();
    const double mean_y = sy / probe.radii.size();
    double sxx = 0.0, sxy = 0.0;
    for (size_t k = 0; k < probe.radii.size(); ++k) {
      const double dx = std::log(probe.radii[k]) - mean_x;
      sxx += dx * dx;
      sxy += dx * (std::log(std::max(probe.max_f[k], 1e-300)) - mean_y);
    }
    probe.fitted_exponent = sxx > 0 ? sxy / sxx : 0.0;
  }
  return probe;
}

double sobolev_threshold(int n, int k, double kappa) {
  if (n < 2) throw std::domain_error("sobolev_threshold: requires n >= 2");
  if (k != 2 && k != 3) {
    throw std::domain_error("sobolev_threshold: k must be 2 or 3");
  }
  if (!(kappa > 0)) throw std::domain_error("sobolev_threshold: kappa <= 0");
  return std::sqrt(4.0 * (n - 1) / (double(k) * n * n * kappa));
}

}  // namespace translab

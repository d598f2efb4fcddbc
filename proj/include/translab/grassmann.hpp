#pragma once

// Oriented n-planes in R^{n+m}: the w-pairing, Jordan angles, the slope
// functions v and h, Hessian quadratic forms, geodesics, and the rigidity
// threshold constants. Everything here is exact linear algebra (no grids).

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace translab::grassmann {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kFrameOrthonormalityTol = 1e-12;
// Angles closer to pi/2 than this make tan(theta) unusable.
inline constexpr double kRightAngleGuard = 1e-8;

// An oriented n-plane in R^{n+m}, stored as n orthonormal frame rows.
// The row order carries the orientation; the pairing w is sensitive to it.
template <typename Scalar = double>
struct Subspace {
  Matrix<Scalar> frame;  // n x (n+m)

  Eigen::Index dim() const { return frame.rows(); }
  Eigen::Index ambient_dim() const { return frame.cols(); }
  Eigen::Index codim() const { return frame.cols() - frame.rows(); }
};

template <typename Scalar = double>
struct JordanAngles {
  Vector<Scalar> theta;   // descending, in [0, pi/2]
  Vector<Scalar> mu;      // cos(theta)
  Vector<Scalar> lambda;  // tan(theta); +inf when theta = pi/2

  Eigen::Index count() const { return theta.size(); }
};

// Graph coordinates: the plane spanned by the rows of [I_n | Z] after
// orthonormalization. Always lies in U = {w(.,P0) > 0}.
template <typename Scalar = double>
struct GraphCoordinates {
  Matrix<Scalar> Z;  // n x m
};

namespace detail {

// Modified Gram-Schmidt on rows, in order. The leading nonzero structure of
// our inputs ([I|Z] rows, graph normal seeds) makes the result deterministic
// with positive diagonal factors.
template <typename Scalar>
Matrix<Scalar> orthonormalize_rows(Matrix<Scalar> a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      a.row(i) -= a.row(i).dot(a.row(j)) * a.row(j);
    }
    const Scalar norm = a.row(i).norm();
    if (!(norm > Scalar(0))) {
      throw std::invalid_argument("orthonormalize_rows: rank-deficient input");
    }
    a.row(i) /= norm;
  }
  return a;
}

template <typename Scalar>
void check_same_shape(const Subspace<Scalar>& p, const Subspace<Scalar>& q,
                      const char* where) {
  if (p.dim() != q.dim() || p.ambient_dim() != q.ambient_dim()) {
    throw std::invalid_argument(std::string(where) +
                                ": subspace dimension mismatch");
  }
}

}  // namespace detail

template <typename Scalar = double>
Subspace<Scalar> make_subspace(Matrix<Scalar> frame) {
  if (frame.rows() < 1 || frame.cols() <= frame.rows()) {
    throw std::invalid_argument("make_subspace: need 1 <= n < ambient dim");
  }
  const Matrix<Scalar> gram = frame * frame.transpose();
  const double defect =
      (gram - Matrix<Scalar>::Identity(frame.rows(), frame.rows()))
          .cwiseAbs()
          .maxCoeff();
  if (defect > kFrameOrthonormalityTol) {
    throw std::invalid_argument("make_subspace: frame rows not orthonormal");
  }
  return Subspace<Scalar>{std::move(frame)};
}

// span(eps_1, ..., eps_n) in R^{n+m}.
template <typename Scalar = double>
Subspace<Scalar> horizontal_plane(Eigen::Index n, Eigen::Index m) {
  Matrix<Scalar> frame = Matrix<Scalar>::Zero(n, n + m);
  frame.template leftCols(n).setIdentity();
  return Subspace<Scalar>{std::move(frame)};
}

template <typename Scalar>
Subspace<Scalar> subspace_from_graph(const GraphCoordinates<Scalar>& coords) {
  const Eigen::Index n = coords.Z.rows();
  const Eigen::Index m = coords.Z.cols();
  Matrix<Scalar> rows(n, n + m);
  rows.template leftCols(n).setIdentity();
  rows.template rightCols(m) = coords.Z;
  return Subspace<Scalar>{detail::orthonormalize_rows<Scalar>(std::move(rows))};
}

// w(P,Q) = det(W), W_ij = <e_i, f_j>. |w| <= 1 and w(P,P) = 1.
template <typename Scalar>
Scalar pairing_w(const Subspace<Scalar>& p, const Subspace<Scalar>& q) {
  detail::check_same_shape(p, q, "pairing_w");
  const Matrix<Scalar> w = p.frame * q.frame.transpose();
  return w.determinant();
}

// The p = min(n,m) Jordan angles between P and Q, sorted descending.
// The remaining n-p singular values of W must equal 1 (checked to 1e-10).
template <typename Scalar>
JordanAngles<Scalar> jordan_angles(const Subspace<Scalar>& p,
                                   const Subspace<Scalar>& q) {
  detail::check_same_shape(p, q, "jordan_angles");
  const Eigen::Index n = p.dim();
  const Eigen::Index np = std::min(n, p.codim());
  const Matrix<Scalar> w = p.frame * q.frame.transpose();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(w);
  const Vector<Scalar>& sv = svd.singularValues();  // descending
  for (Eigen::Index i = 0; i + np < n; ++i) {
    if (std::abs(double(sv(i) - Scalar(1))) > 1e-10) {
      throw std::logic_error(
          "jordan_angles: singular value forced to 1 deviates beyond 1e-10");
    }
  }
  JordanAngles<Scalar> angles;
  angles.theta.resize(np);
  angles.mu.resize(np);
  angles.lambda.resize(np);
  for (Eigen::Index a = 0; a < np; ++a) {
    // smallest singular value -> largest angle first
    const Scalar mu =
        std::min(Scalar(1), std::max(Scalar(0), sv(n - 1 - a)));
    const Scalar theta = std::acos(mu);
    angles.theta(a) = theta;
    angles.mu(a) = mu;
    angles.lambda(a) = mu > Scalar(0)
                           ? std::tan(theta)
                           : std::numeric_limits<Scalar>::infinity();
  }
  return angles;
}

// v(P,P0) = 1/w(P,P0) on U = {w > 0}; equals sqrt(det(I + Z Z^T)) in graph
// coordinates and prod sec(theta_a) in Jordan angles.
template <typename Scalar>
Scalar v_function(const Subspace<Scalar>& p, const Subspace<Scalar>& p0) {
  const Scalar w = pairing_w(p, p0);
  if (!(w > Scalar(0))) {
    throw std::domain_error("v_function: plane outside U (w(P,P0) <= 0)");
  }
  return Scalar(1) / w;
}

// h = (v/(2-v))^{3/2} on U2 = {1 <= v < 2}; increasing, h(1) = 1.
template <typename Scalar>
Scalar h_function(Scalar v) {
  if (!(v >= Scalar(1) - Scalar(1e-12))) {
    throw std::domain_error("h_function: v < 1 is not a slope value");
  }
  if (!(v < Scalar(2))) {
    throw std::domain_error("h_function: v >= 2 lies outside U2");
  }
  using std::pow;
  return pow(v / (Scalar(2) - v), Scalar(1.5));
}

struct RigidityThresholds {
  double v0;        // 2*3^{2/3} / (1 + 3^{2/3})
  double u2_bound;  // 2
  double u3_bound;  // 3
};

// v0 evaluated in extended precision, then rounded once to double.
inline RigidityThresholds rigidity_thresholds() {
  const long double c = cbrtl(9.0L);  // 3^{2/3}
  const long double v0 = 2.0L * c / (1.0L + c);
  return RigidityThresholds{static_cast<double>(v0), 2.0, 3.0};
}

// Frames adapted to the singular structure of W = P.frame * P0.frame^T.
// Row a of `tangent` pairs with row a of `normal` for a < p, ordered by
// descending Jordan angle; `tangent` spans P with the orientation of P,
// `reference` spans P0 (orientation possibly flipped; used only to build
// normals), `normal` spans the orthogonal complement of P.
template <typename Scalar = double>
struct AdaptedFrames {
  Matrix<Scalar> tangent;    // n x (n+m)
  Matrix<Scalar> reference;  // n x (n+m)
  Matrix<Scalar> normal;     // m x (n+m)
  JordanAngles<Scalar> angles;
};

template <typename Scalar>
AdaptedFrames<Scalar> svd_adapted_frames(const Subspace<Scalar>& p,
                                         const Subspace<Scalar>& p0) {
  detail::check_same_shape(p, p0, "svd_adapted_frames");
  const Eigen::Index n = p.dim();
  const Eigen::Index m = p.codim();
  const Eigen::Index np = std::min(n, m);
  const Eigen::Index dim = n + m;

  const Matrix<Scalar> w = p.frame * p0.frame.transpose();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(
      w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix<Scalar> u = svd.matrixU();
  Matrix<Scalar> v = svd.matrixV();
  Vector<Scalar> sigma = svd.singularValues();

  // Reorder to descending angle (ascending singular value).
  u.rowwise().reverseInPlace();
  v.rowwise().reverseInPlace();
  sigma.reverseInPlace();

  // Deterministic signs: first nonzero entry of each left singular vector
  // positive, flipping the right vector along with it.
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(double(u(i, k))) > 1e-12) {
        if (u(i, k) < Scalar(0)) {
          u.col(k) *= Scalar(-1);
          v.col(k) *= Scalar(-1);
        }
        break;
      }
    }
  }
  // The adapted tangent frame must carry the orientation of P.
  if (u.determinant() < Scalar(0)) {
    u.col(n - 1) *= Scalar(-1);
    v.col(n - 1) *= Scalar(-1);
  }

  AdaptedFrames<Scalar> frames;
  frames.tangent = u.transpose() * p.frame;
  frames.reference = v.transpose() * p0.frame;

  frames.angles.theta.resize(np);
  frames.angles.mu.resize(np);
  frames.angles.lambda.resize(np);
  for (Eigen::Index a = 0; a < np; ++a) {
    const Scalar mu = std::min(Scalar(1), std::max(Scalar(0), sigma(a)));
    frames.angles.theta(a) = std::acos(mu);
    frames.angles.mu(a) = mu;
    frames.angles.lambda(a) = mu > Scalar(0)
                                  ? std::tan(frames.angles.theta(a))
                                  : std::numeric_limits<Scalar>::infinity();
  }

  // Paired normals from the rotation planes; the rest by completion.
  frames.normal.resize(m, dim);
  std::vector<Eigen::Index> unpaired;
  Eigen::Index built = 0;
  for (Eigen::Index a = 0; a < np; ++a) {
    const Scalar theta = frames.angles.theta(a);
    if (theta > Scalar(kRightAngleGuard)) {
      frames.normal.row(a) = (std::cos(theta) * frames.tangent.row(a) -
                              frames.reference.row(a)) /
                             std::sin(theta);
      built = a + 1;
    } else {
      break;  // angles are descending; the rest are (numerically) zero
    }
  }
  for (Eigen::Index a = built; a < m; ++a) unpaired.push_back(a);

  Eigen::Index next = 0;
  for (Eigen::Index cand = 0; cand < dim && next < Eigen::Index(unpaired.size());
       ++cand) {
    Vector<Scalar> seed = Vector<Scalar>::Zero(dim);
    seed(cand) = Scalar(1);
    seed -= frames.tangent.transpose() * (frames.tangent * seed);
    for (Eigen::Index b = 0; b < built + next; ++b) {
      const Eigen::Index row = b < built ? b : unpaired[b - built];
      seed -= frames.normal.row(row).dot(seed.transpose()) *
              frames.normal.row(row).transpose();
    }
    const Scalar norm = seed.norm();
    if (norm > Scalar(0.5)) {
      frames.normal.row(unpaired[next]) = seed.transpose() / norm;
      ++next;
    }
  }
  if (next != Eigen::Index(unpaired.size())) {
    throw std::logic_error("svd_adapted_frames: normal completion failed");
  }
  return frames;
}

namespace detail {

template <typename Scalar>
void require_finite_lambda(const JordanAngles<Scalar>& angles,
                           const char* where) {
  for (Eigen::Index a = 0; a < angles.count(); ++a) {
    if (!(angles.theta(a) <
          Scalar(EIGEN_PI) / Scalar(2) - Scalar(kRightAngleGuard))) {
      throw std::domain_error(std::string(where) +
                              ": Jordan angle at pi/2, tan(theta) infinite");
    }
  }
}

}  // namespace detail

template <typename Scalar>
Scalar v_from_angles(const JordanAngles<Scalar>& angles) {
  Scalar v(1);
  for (Eigen::Index a = 0; a < angles.count(); ++a) v /= angles.mu(a);
  return v;
}

// Hess(v)(E,E) in the singular-adapted coframe: direction given by its
// components x_{ia}, rows = tangent slots (first p paired), cols = normal
// slots. Evaluates
//   v * ( |E|^2 + 2 sum_a lambda_a^2 x_aa^2
//         + sum_{a != b} lambda_a lambda_b (x_aa x_bb + x_ab x_ba) ).
template <typename Scalar>
Scalar hess_v_quadratic_form(const JordanAngles<Scalar>& angles,
                             const Matrix<Scalar>& direction) {
  detail::require_finite_lambda(angles, "hess_v_quadratic_form");
  const Eigen::Index np = angles.count();
  if (direction.rows() < np || direction.cols() < np) {
    throw std::invalid_argument(
        "hess_v_quadratic_form: direction smaller than angle count");
  }
  const Scalar v = v_from_angles(angles);
  Scalar sum = direction.squaredNorm();
  for (Eigen::Index a = 0; a < np; ++a) {
    const Scalar la = angles.lambda(a);
    sum += Scalar(2) * la * la * direction(a, a) * direction(a, a);
    for (Eigen::Index b = 0; b < np; ++b) {
      if (a == b) continue;
      sum += la * angles.lambda(b) *
             (direction(a, a) * direction(b, b) +
              direction(a, b) * direction(b, a));
    }
  }
  return v * sum;
}

// dv(E) = v sum_a lambda_a x_aa in the same coframe.
template <typename Scalar>
Scalar dv_linear_form(const JordanAngles<Scalar>& angles,
                      const Matrix<Scalar>& direction) {
  detail::require_finite_lambda(angles, "dv_linear_form");
  Scalar sum(0);
  for (Eigen::Index a = 0; a < angles.count(); ++a) {
    sum += angles.lambda(a) * direction(a, a);
  }
  return v_from_angles(angles) * sum;
}

// Coefficient of dv \otimes dv in the Hessian lower bound on U2:
//   (v-1)/(p v (v^{2/p}-1)) + (p+1)/(p v),
// evaluated stably through expm1/log near v = 1.
template <typename Scalar>
Scalar hess_v_lower_bound_coefficient(Scalar v, Eigen::Index p) {
  using std::expm1;
  using std::log;
  const Scalar t = log(v);
  const Scalar ratio =
      t == Scalar(0) ? Scalar(p) / Scalar(2)
                     : expm1(t) / expm1(Scalar(2) * t / Scalar(p));
  return ratio / (Scalar(p) * v) + (Scalar(p) + Scalar(1)) / (Scalar(p) * v);
}

// Hess(v)(E,E) - [ v(2-v)|E|^2 + c_p(v) dv(E)^2 ]; nonnegative on U2.
template <typename Scalar>
Scalar hess_lower_bound_residual(const JordanAngles<Scalar>& angles,
                                 const Matrix<Scalar>& direction) {
  const Scalar v = v_from_angles(angles);
  if (!(v < Scalar(2))) {
    throw std::domain_error(
        "hess_lower_bound_residual: v >= 2 lies outside U2");
  }
  const Scalar lhs = hess_v_quadratic_form(angles, direction);
  const Scalar dv = dv_linear_form(angles, direction);
  const Scalar coeff = hess_v_lower_bound_coefficient(v, angles.count());
  return lhs - (v * (Scalar(2) - v) * direction.squaredNorm() + coeff * dv * dv);
}

// A simple rotation of frame row `row` toward the unit normal `target`.
template <typename Scalar = double>
struct PlaneRotation {
  Eigen::Index row;
  Vector<Scalar> target;
  Scalar rate;
};

// Geodesic from `base`: row i_k rotates as
//   e_i(t) = cos(r_k t) e_i + sin(r_k t) target_k.
// Targets must be unit, orthogonal to the base plane and to each other,
// and attached to distinct rows.
template <typename Scalar>
Subspace<Scalar> grassmann_geodesic(
    const Subspace<Scalar>& base,
    const std::vector<PlaneRotation<Scalar>>& rotations, Scalar t) {
  const Eigen::Index n = base.dim();
  const Eigen::Index dim = base.ambient_dim();
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (size_t k = 0; k < rotations.size(); ++k) {
    const auto& rot = rotations[k];
    if (rot.row < 0 || rot.row >= n || used[static_cast<size_t>(rot.row)]) {
      throw std::invalid_argument("grassmann_geodesic: bad or repeated row");
    }
    used[static_cast<size_t>(rot.row)] = true;
    if (rot.target.size() != dim ||
        std::abs(double(rot.target.norm() - Scalar(1))) > 1e-10) {
      throw std::invalid_argument("grassmann_geodesic: target not unit");
    }
    if ((base.frame * rot.target).cwiseAbs().maxCoeff() > Scalar(1e-10)) {
      throw std::invalid_argument(
          "grassmann_geodesic: target not orthogonal to base plane");
    }
    for (size_t j = 0; j < k; ++j) {
      if (std::abs(double(rotations[j].target.dot(rot.target))) > 1e-10) {
        throw std::invalid_argument(
            "grassmann_geodesic: targets not mutually orthogonal");
      }
    }
  }
  Matrix<Scalar> frame = base.frame;
  for (const auto& rot : rotations) {
    frame.row(rot.row) = std::cos(rot.rate * t) * base.frame.row(rot.row) +
                         std::sin(rot.rate * t) * rot.target.transpose();
  }
  return Subspace<Scalar>{std::move(frame)};
}

// Geodesic through the plane of `frames` with velocity sum_{ia} X_{ia}
// tangent_i (x) normal_a. Preserves the orientation of the base plane.
template <typename Scalar>
Subspace<Scalar> geodesic_through(const AdaptedFrames<Scalar>& frames,
                                  const Matrix<Scalar>& velocity, Scalar t) {
  const Eigen::Index n = frames.tangent.rows();
  const Eigen::Index m = frames.normal.rows();
  if (velocity.rows() != n || velocity.cols() != m) {
    throw std::invalid_argument("geodesic_through: velocity shape mismatch");
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(
      velocity, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix<Scalar> u = svd.matrixU();
  Matrix<Scalar> w = svd.matrixV();
  const Vector<Scalar>& rates = svd.singularValues();
  const Eigen::Index r = std::min(n, m);

  Matrix<Scalar> a = u.transpose() * frames.tangent;
  Matrix<Scalar> b = w.transpose() * frames.normal;
  if (u.determinant() < Scalar(0)) {
    a.row(n - 1) *= Scalar(-1);
    if (n - 1 < r) b.row(n - 1) *= Scalar(-1);
  }
  Matrix<Scalar> frame(n, frames.tangent.cols());
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k < r && rates(k) > Scalar(0)) {
      frame.row(k) = std::cos(rates(k) * t) * a.row(k) +
                     std::sin(rates(k) * t) * b.row(k);
    } else {
      frame.row(k) = a.row(k);
    }
  }
  return Subspace<Scalar>{std::move(frame)};
}

}  // namespace translab::grassmann

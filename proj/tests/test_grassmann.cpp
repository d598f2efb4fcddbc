#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "translab/grassmann.hpp"
#include "translab/rng.hpp"

#include <cmath>

using namespace translab;
namespace gr = translab::grassmann;

namespace {

gr::Matrix<double> random_orthonormal_rows(Eigen::Index n, Eigen::Index dim,
                                           Rng& rng) {
  gr::Matrix<double> a(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = rng.normal();
  }
  return gr::detail::orthonormalize_rows(a);
}

gr::Subspace<double> random_plane_in_u(Eigen::Index n, Eigen::Index m,
                                       Rng& rng, double w_min = 0.2) {
  const auto p0 = gr::horizontal_plane<double>(n, m);
  while (true) {
    gr::Matrix<double> frame = random_orthonormal_rows(n, n + m, rng);
    gr::Subspace<double> plane{frame};
    double w = gr::pairing_w(plane, p0);
    if (w < 0) {
      plane.frame.row(0) *= -1;
      w = -w;
    }
    if (w > w_min) return plane;
  }
}

// Direct second difference of v along a geodesic through a general point.
double hessian_by_differences(const gr::AdaptedFrames<double>& frames,
                              const gr::Matrix<double>& direction,
                              const gr::Subspace<double>& p0,
                              double step = 1e-3) {
  const double plus =
      gr::v_function(gr::geodesic_through(frames, direction, step), p0);
  const double mid =
      gr::v_function(gr::geodesic_through(frames, direction, 0.0), p0);
  const double minus =
      gr::v_function(gr::geodesic_through(frames, direction, -step), p0);
  return (plus - 2.0 * mid + minus) / (step * step);
}

}  // namespace

TEST_CASE("pairing_w basic values") {
  const auto p0 = gr::horizontal_plane<double>(2, 2);
  CHECK(gr::pairing_w(p0, p0) == doctest::Approx(1.0).epsilon(1e-14));

  // A line at angle theta against the first axis in R^2.
  const double theta = EIGEN_PI / 3;
  gr::Matrix<double> frame(1, 2);
  frame << std::cos(theta), std::sin(theta);
  const auto line = gr::make_subspace(frame);
  const auto axis = gr::horizontal_plane<double>(1, 1);
  CHECK(gr::pairing_w(line, axis) == doctest::Approx(0.5).epsilon(1e-14));

  // Orientation flip negates the pairing.
  Rng rng(11);
  auto p = random_plane_in_u(2, 2, rng);
  auto q = random_plane_in_u(2, 2, rng);
  const double w = gr::pairing_w(p, q);
  CHECK(std::abs(w) <= 1.0 + 1e-12);
  q.frame.row(0) *= -1.0;
  CHECK(gr::pairing_w(p, q) == doctest::Approx(-w).epsilon(1e-12));
}

TEST_CASE("pairing_w equals SVD oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_plane_in_u(2, 2, rng, -2.0);  // any orientation
    const auto q = random_plane_in_u(2, 2, rng, -2.0);
    const Eigen::MatrixXd w = p.frame * q.frame.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        w, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double sign =
        svd.matrixU().determinant() * svd.matrixV().determinant();
    const double oracle = sign * svd.singularValues().prod();
    CHECK(gr::pairing_w(p, q) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("pairing_w dimension mismatch") {
  const auto p = gr::horizontal_plane<double>(1, 1);
  const auto q = gr::horizontal_plane<double>(1, 2);
  CHECK_THROWS_AS((void)gr::pairing_w(p, q), std::invalid_argument);
}

TEST_CASE("jordan_angles identity and rotation") {
  const auto p0 = gr::horizontal_plane<double>(2, 2);
  const auto same = gr::jordan_angles(p0, p0);
  REQUIRE(same.count() == 2);
  CHECK(same.theta.cwiseAbs().maxCoeff() < 1e-7);

  // A single rotation by pi/4 in the (e1, e2) plane of R^2.
  gr::Matrix<double> frame(1, 2);
  const double theta = EIGEN_PI / 4;
  frame << std::cos(theta), std::sin(theta);
  const auto angles =
      gr::jordan_angles(gr::make_subspace(frame), gr::horizontal_plane<double>(1, 1));
  REQUIRE(angles.count() == 1);
  CHECK(angles.theta(0) == doctest::Approx(theta).epsilon(1e-12));
  CHECK(angles.lambda(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("jordan_angles of graph coordinates vs eigenvalue oracle") {
  gr::Matrix<double> z(2, 2);
  z << 1, 0, 0, 2;
  const auto plane = gr::subspace_from_graph(gr::GraphCoordinates<double>{z});
  const auto p0 = gr::horizontal_plane<double>(2, 2);
  const auto angles = gr::jordan_angles(plane, p0);
  REQUIRE(angles.count() == 2);
  CHECK(angles.theta(0) == doctest::Approx(std::atan(2.0)).epsilon(1e-12));
  CHECK(angles.theta(1) == doctest::Approx(std::atan(1.0)).epsilon(1e-12));

  // mu^2 are the eigenvalues of (I + Z Z^T)^{-1}.
  const Eigen::MatrixXd gram =
      (Eigen::MatrixXd::Identity(2, 2) + z * z.transpose()).inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  CHECK(angles.mu(0) * angles.mu(0) ==
        doctest::Approx(eig.eigenvalues()(0)).epsilon(1e-12));
  CHECK(angles.mu(1) * angles.mu(1) ==
        doctest::Approx(eig.eigenvalues()(1)).epsilon(1e-12));
}

TEST_CASE("v_function values and domain error") {
  const auto p0 = gr::horizontal_plane<double>(1, 1);
  CHECK(gr::v_function(p0, p0) == doctest::Approx(1.0).epsilon(1e-14));

  gr::Matrix<double> z1(1, 1);
  z1 << 1.0;
  CHECK(gr::v_function(gr::subspace_from_graph(gr::GraphCoordinates<double>{z1}),
                       p0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

  gr::Matrix<double> z2(2, 2);
  z2 << 1, 0, 0, 2;
  CHECK(gr::v_function(
            gr::subspace_from_graph(gr::GraphCoordinates<double>{z2}),
            gr::horizontal_plane<double>(2, 2)) ==
        doctest::Approx(std::sqrt(10.0)).epsilon(1e-13));

  // Perpendicular line: w = 0, outside U.
  gr::Matrix<double> perp(1, 2);
  perp << 0, 1;
  CHECK_THROWS_AS((void)gr::v_function(gr::make_subspace(perp), p0),
                  std::domain_error);
}

TEST_CASE("v_function equals sqrt(det(I+ZZ^T)) for random graphs") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.integer(5));
    const Eigen::Index m = 1 + Eigen::Index(rng.integer(5));
    gr::Matrix<double> z(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) z(i, j) = rng.uniform(-3.0, 3.0);
    }
    const double direct = std::sqrt(
        (Eigen::MatrixXd::Identity(n, n) + z * z.transpose()).determinant());
    const double via_plane = gr::v_function(
        gr::subspace_from_graph(gr::GraphCoordinates<double>{z}),
        gr::horizontal_plane<double>(n, m));
    CHECK(std::abs(via_plane - direct) / direct < 1e-12);
  }
}

TEST_CASE("v_function equals product of secants") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.integer(3));
    const Eigen::Index m = 1 + Eigen::Index(rng.integer(3));
    const auto p0 = gr::horizontal_plane<double>(n, m);
    const auto plane = random_plane_in_u(n, m, rng);
    const auto angles = gr::jordan_angles(plane, p0);
    bool usable = true;
    double expected = 1.0;
    for (Eigen::Index a = 0; a < angles.count(); ++a) {
      usable = usable && angles.theta(a) < EIGEN_PI / 2 - 1e-3;
      expected /= std::cos(angles.theta(a));
    }
    if (!usable) continue;
    const double v = gr::v_function(plane, p0);
    CHECK(std::abs(v - expected) / expected < 1e-10);
  }
}

TEST_CASE("h_function values, monotonicity, domain") {
  CHECK(gr::h_function(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gr::h_function(1.5) ==
        doctest::Approx(std::pow(3.0, 1.5)).epsilon(1e-14));
  const double v0 = gr::rigidity_thresholds().v0;
  CHECK(std::abs(gr::h_function(v0) - 3.0) < 1e-12);
  CHECK_THROWS_AS((void)gr::h_function(2.0), std::domain_error);
  CHECK_THROWS_AS((void)gr::h_function(0.5), std::domain_error);

  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const double v1 = rng.uniform(1.0, 1.999);
    const double v2 = rng.uniform(1.0, 1.999);
    if (v1 < v2) CHECK(gr::h_function(v1) < gr::h_function(v2));
  }
}

TEST_CASE("rigidity thresholds") {
  const auto thresholds = gr::rigidity_thresholds();
  // 2*3^{2/3}/(1+3^{2/3}), evaluated in extended precision.
  CHECK(std::abs(thresholds.v0 - 1.350667022425936) < 1e-15);
  CHECK(thresholds.u2_bound == 2.0);
  CHECK(thresholds.u3_bound == 3.0);
}

TEST_CASE("hess_v_quadratic_form closed forms") {
  // All angles zero: the form reduces to the metric.
  gr::JordanAngles<double> flat;
  flat.theta = gr::Vector<double>::Zero(1);
  flat.mu = gr::Vector<double>::Ones(1);
  flat.lambda = gr::Vector<double>::Zero(1);
  gr::Matrix<double> e = gr::Matrix<double>::Zero(2, 2);
  e(0, 0) = 1.0;
  CHECK(gr::hess_v_quadratic_form(flat, e) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // n = m = 1 at angle theta: v (1 + 2 tan^2 theta).
  const double theta = EIGEN_PI / 4;
  gr::JordanAngles<double> one;
  one.theta = gr::Vector<double>::Constant(1, theta);
  one.mu = gr::Vector<double>::Constant(1, std::cos(theta));
  one.lambda = gr::Vector<double>::Constant(1, std::tan(theta));
  gr::Matrix<double> dir = gr::Matrix<double>::Ones(1, 1);
  CHECK(gr::hess_v_quadratic_form(one, dir) ==
        doctest::Approx(std::sqrt(2.0) * 3.0).epsilon(1e-13));

  // Right angles are rejected.
  one.theta(0) = EIGEN_PI / 2;
  one.lambda(0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)gr::hess_v_quadratic_form(one, dir),
                  std::domain_error);
}

TEST_CASE("hess_v_quadratic_form matches finite differences on geodesics") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + Eigen::Index(rng.integer(3));
    const Eigen::Index m = 1 + Eigen::Index(rng.integer(3));
    const auto p0 = gr::horizontal_plane<double>(n, m);
    const auto plane = random_plane_in_u(n, m, rng);
    const auto frames = gr::svd_adapted_frames(plane, p0);
    if (frames.angles.theta(0) > EIGEN_PI / 2 - 1e-2) continue;
    gr::Matrix<double> direction(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) direction(i, j) = rng.normal();
    }
    direction /= direction.norm();
    const double formula = gr::hess_v_quadratic_form(frames.angles, direction);
    const double differences = hessian_by_differences(frames, direction, p0);
    CHECK(std::abs(formula - differences) / std::max(std::abs(formula), 1.0) <
          1e-4);
  }
}

TEST_CASE("hess quadratic form is invariant on degenerate angle blocks") {
  // Two equal angles: rotating the adapted pair inside the degenerate block
  // must not change the quadratic form.
  const double theta = 0.4;
  gr::JordanAngles<double> angles;
  angles.theta = gr::Vector<double>::Constant(2, theta);
  angles.mu = gr::Vector<double>::Constant(2, std::cos(theta));
  angles.lambda = gr::Vector<double>::Constant(2, std::tan(theta));
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    gr::Matrix<double> direction(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) direction(i, j) = rng.normal();
    }
    const double phi = rng.uniform(0.0, 2.0 * EIGEN_PI);
    gr::Matrix<double> rot(2, 2);
    rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    // Rotating both the tangent and normal legs of the degenerate block.
    const gr::Matrix<double> rotated = rot * direction * rot.transpose();
    CHECK(gr::hess_v_quadratic_form(angles, direction) ==
          doctest::Approx(gr::hess_v_quadratic_form(angles, rotated))
              .epsilon(1e-10));
  }
}

TEST_CASE("hess lower bound residual") {
  // v = 1: zero residual on unit directions with dv = 0.
  gr::JordanAngles<double> flat;
  flat.theta = gr::Vector<double>::Zero(2);
  flat.mu = gr::Vector<double>::Ones(2);
  flat.lambda = gr::Vector<double>::Zero(2);
  gr::Matrix<double> off = gr::Matrix<double>::Zero(2, 2);
  off(0, 1) = 1.0;
  CHECK(std::abs(gr::hess_lower_bound_residual(flat, off)) < 1e-14);

  // n = m = 1 is the equality case of the bound.
  const double theta = EIGEN_PI / 4;
  gr::JordanAngles<double> one;
  one.theta = gr::Vector<double>::Constant(1, theta);
  one.mu = gr::Vector<double>::Constant(1, std::cos(theta));
  one.lambda = gr::Vector<double>::Constant(1, std::tan(theta));
  gr::Matrix<double> dir = gr::Matrix<double>::Ones(1, 1);
  const double residual = gr::hess_lower_bound_residual(one, dir);
  CHECK(residual >= -1e-10);
  CHECK(std::abs(residual) < 1e-12);

  // Random U2 samples stay nonnegative within rounding.
  Rng rng(41);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index p = 1 + Eigen::Index(rng.integer(3));
    gr::JordanAngles<double> angles;
    angles.theta.resize(p);
    angles.mu.resize(p);
    angles.lambda.resize(p);
    while (true) {
      double v = 1.0;
      for (Eigen::Index a = 0; a < p; ++a) {
        angles.theta(a) = rng.uniform(0.0, 1.3);
        v /= std::cos(angles.theta(a));
      }
      if (v <= 1.99) break;
    }
    std::sort(angles.theta.data(), angles.theta.data() + p,
              std::greater<double>());
    for (Eigen::Index a = 0; a < p; ++a) {
      angles.mu(a) = std::cos(angles.theta(a));
      angles.lambda(a) = std::tan(angles.theta(a));
    }
    gr::Matrix<double> direction(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) direction(i, j) = rng.normal();
    }
    direction /= direction.norm();
    worst = std::min(worst, gr::hess_lower_bound_residual(angles, direction));
  }
  CHECK(worst >= -1e-10);
}

TEST_CASE("grassmann_geodesic") {
  const auto p0 = gr::horizontal_plane<double>(2, 2);

  std::vector<gr::PlaneRotation<double>> rotations;
  gr::Vector<double> target1 = gr::Vector<double>::Zero(4);
  target1(2) = 1.0;
  gr::Vector<double> target2 = gr::Vector<double>::Zero(4);
  target2(3) = 1.0;
  rotations.push_back({0, target1, 1.0});
  rotations.push_back({1, target2, 0.5});

  // t = 0 returns the base plane.
  const auto at_zero = gr::grassmann_geodesic(p0, rotations, 0.0);
  CHECK((at_zero.frame - p0.frame).cwiseAbs().maxCoeff() < 1e-15);

  // Pairing along the geodesic is the product of cosines.
  const double t = 0.3;
  const auto moved = gr::grassmann_geodesic(p0, rotations, t);
  CHECK(gr::pairing_w(moved, p0) ==
        doctest::Approx(std::cos(t) * std::cos(0.5 * t)).epsilon(1e-13));

  // A single rotation lands at the expected Jordan angle.
  const auto line0 = gr::horizontal_plane<double>(1, 1);
  gr::Vector<double> up = gr::Vector<double>::Zero(2);
  up(1) = 1.0;
  const auto rotated = gr::grassmann_geodesic(
      line0, {gr::PlaneRotation<double>{0, up, 1.0}}, double(EIGEN_PI / 4));
  const auto angles = gr::jordan_angles(rotated, line0);
  CHECK(angles.theta(0) == doctest::Approx(EIGEN_PI / 4).epsilon(1e-12));

  // Bad rotation data is rejected.
  gr::Vector<double> not_normal = gr::Vector<double>::Zero(4);
  not_normal(0) = 1.0;  // lies inside the base plane
  CHECK_THROWS_AS((void)gr::grassmann_geodesic(
                      p0, {gr::PlaneRotation<double>{0, not_normal, 1.0}}, 0.1),
                  std::invalid_argument);
  gr::Vector<double> too_long = 2.0 * target1;
  CHECK_THROWS_AS((void)gr::grassmann_geodesic(
                      p0, {gr::PlaneRotation<double>{0, too_long, 1.0}}, 0.1),
                  std::invalid_argument);
}

TEST_CASE("drift identity for h along isotropic two-angle geodesics") {
  // With exactly two equal angles and the equal-rate diagonal velocity the
  // combination Hess(h) = 3 h g + (3/2 + 1/(3p)) h^{-1} dh (x) dh is exact;
  // check the second difference of h(v(t)) against it along the curve.
  const auto p0 = gr::horizontal_plane<double>(2, 2);
  std::vector<gr::PlaneRotation<double>> rotations;
  gr::Vector<double> target1 = gr::Vector<double>::Zero(4);
  target1(2) = 1.0;
  gr::Vector<double> target2 = gr::Vector<double>::Zero(4);
  target2(3) = 1.0;
  rotations.push_back({0, target1, 1.0});
  rotations.push_back({1, target2, 1.0});

  const double step = 1e-3;
  for (const double t : {0.1, 0.25, 0.4, 0.55}) {
    const auto h_at = [&](double s) {
      return gr::h_function(
          gr::v_function(gr::grassmann_geodesic(p0, rotations, s), p0));
    };
    const double second =
        (h_at(t + step) - 2.0 * h_at(t) + h_at(t - step)) / (step * step);
    const double first = (h_at(t + step) - h_at(t - step)) / (2.0 * step);
    const double h = h_at(t);
    const double speed_sq = 2.0;  // two unit-rate rotations
    const double p = 2.0;
    const double rhs =
        3.0 * h * speed_sq + (1.5 + 1.0 / (3.0 * p)) * first * first / h;
    CHECK(std::abs(second - rhs) / std::abs(rhs) < 1e-3);
  }
}

TEST_CASE("hess of h dominates the drift bound for p >= 2 samples") {
  // Chain rule on random U2 configurations with p >= 2: Hess(h)(E,E) >=
  // 3 h |E|^2 + (3/2 + 1/(3p)) (dh(E))^2 / h.
  Rng rng(43);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index p = 2 + Eigen::Index(rng.integer(2));
    gr::JordanAngles<double> angles;
    angles.theta.resize(p);
    angles.mu.resize(p);
    angles.lambda.resize(p);
    while (true) {
      double v = 1.0;
      for (Eigen::Index a = 0; a < p; ++a) {
        angles.theta(a) = rng.uniform(0.0, 1.2);
        v /= std::cos(angles.theta(a));
      }
      if (v <= 1.999) break;
    }
    std::sort(angles.theta.data(), angles.theta.data() + p,
              std::greater<double>());
    for (Eigen::Index a = 0; a < p; ++a) {
      angles.mu(a) = std::cos(angles.theta(a));
      angles.lambda(a) = std::tan(angles.theta(a));
    }
    gr::Matrix<double> direction(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) direction(i, j) = rng.normal();
    }
    direction /= direction.norm();

    const double v = gr::v_from_angles(angles);
    const double h = gr::h_function(v);
    const double hp = 3.0 * std::sqrt(v) * std::pow(2.0 - v, -2.5);
    const double hpp =
        3.0 * (1.0 + 2.0 * v) / std::sqrt(v) * std::pow(2.0 - v, -3.5);
    const double dv = gr::dv_linear_form(angles, direction);
    const double hess_h =
        hp * gr::hess_v_quadratic_form(angles, direction) + hpp * dv * dv;
    const double rhs = 3.0 * h * direction.squaredNorm() +
                       (1.5 + 1.0 / (3.0 * double(p))) * hp * hp * dv * dv / h;
    const double scale = std::max({std::abs(hess_h), std::abs(rhs), 1.0});
    CHECK((hess_h - rhs) / scale >= -1e-10);
  }
}

TEST_CASE("subspace validation") {
  gr::Matrix<double> bad(2, 3);
  bad << 1, 0, 0, 1, 1, 0;
  CHECK_THROWS_AS((void)gr::make_subspace(bad), std::invalid_argument);
}

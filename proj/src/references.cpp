#include "translab/references.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace translab {

double grim_reaper_reference(double x) {
  if (!(std::abs(x) < EIGEN_PI / 2)) {
    throw std::domain_error("grim_reaper_reference: |x| >= pi/2");
  }
  return -std::log(std::cos(x));
}

namespace {

// Right-hand side of the radial profile as a first-order system in
// y = (u, u'). The axis term (n-1) u'/r is regular for r > 0.
Eigen::Vector2d bowl_rhs(double r, const Eigen::Vector2d& y, int n) {
  const double up = y(1);
  return {up, (1.0 + up * up) * (1.0 - (n - 1) * up / r)};
}

struct Dp45Tableau {
  // Standard Dormand-Prince coefficients.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

Eigen::Vector2d integrate_bowl(double r_target, int n, double tol) {
  using T = Dp45Tableau;
  // Series start off the axis: u = r^2/(2n) + r^4/(4 n^3 (n+2)) + O(r^6).
  const double r0 = 1e-6;
  const double a2 = 1.0 / (2.0 * n);
  const double a4 = 1.0 / (4.0 * double(n) * n * n * (n + 2));
  Eigen::Vector2d y{a2 * r0 * r0 + a4 * r0 * r0 * r0 * r0,
                    2 * a2 * r0 + 4 * a4 * r0 * r0 * r0};
  if (r_target <= r0) {
    return {a2 * r_target * r_target + a4 * std::pow(r_target, 4),
            2 * a2 * r_target + 4 * a4 * std::pow(r_target, 3)};
  }

  double r = r0;
  double h = 1e-4;
  Eigen::Vector2d k1 = bowl_rhs(r, y, n);
  int steps = 0;
  while (r < r_target) {
    if (++steps > 2000000) {
      throw std::runtime_error("bowl_reference: integrator failed to advance");
    }
    h = std::min(h, r_target - r);
    const Eigen::Vector2d k2 =
        bowl_rhs(r + T::c2 * h, y + h * (T::a21 * k1), n);
    const Eigen::Vector2d k3 =
        bowl_rhs(r + T::c3 * h, y + h * (T::a31 * k1 + T::a32 * k2), n);
    const Eigen::Vector2d k4 = bowl_rhs(
        r + T::c4 * h, y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3), n);
    const Eigen::Vector2d k5 = bowl_rhs(
        r + T::c5 * h,
        y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4), n);
    const Eigen::Vector2d k6 =
        bowl_rhs(r + h,
                 y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 +
                          T::a64 * k4 + T::a65 * k5),
                 n);
    const Eigen::Vector2d y5 =
        y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 +
                 T::b6 * k6);
    const Eigen::Vector2d k7 = bowl_rhs(r + h, y5, n);
    const Eigen::Vector2d err_vec =
        h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 +
             T::e7 * k7);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double scale =
          tol + tol * std::max(std::abs(y(i)), std::abs(y5(i)));
      err = std::max(err, std::abs(err_vec(i)) / scale);
    }
    if (err <= 1.0) {
      r += h;
      y = y5;
      k1 = k7;  // first-same-as-last
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= factor;
    if (!(h > 1e-15)) {
      throw std::runtime_error("bowl_reference: step size underflow");
    }
  }
  return y;
}

}  // namespace

Eigen::Vector2d bowl_reference_state(double r, int n, double tol) {
  if (n < 2) throw std::domain_error("bowl_reference: requires n >= 2");
  if (r < 0) throw std::domain_error("bowl_reference: r < 0");
  return integrate_bowl(r, n, tol);
}

double bowl_reference(double r, int n, double tol) {
  return bowl_reference_state(r, n, tol)(0);
}

}  // namespace translab

#include "translab/conformal.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace translab {

double conformal_sectional_curvature(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& e1,
                                     const Eigen::VectorXd& e2,
                                     const Eigen::VectorXd& v, int n) {
  if (n < 1) throw std::domain_error("conformal_sectional_curvature: n < 1");
  if (e1.size() != x.size() || e2.size() != x.size() || v.size() != x.size()) {
    throw std::invalid_argument(
        "conformal_sectional_curvature: dimension mismatch");
  }
  const double tol = 1e-10;
  if (std::abs(e1.norm() - 1.0) > tol || std::abs(e2.norm() - 1.0) > tol ||
      std::abs(e1.dot(e2)) > tol) {
    throw std::invalid_argument(
        "conformal_sectional_curvature: section not orthonormal");
  }
  const double p1 = v.dot(e1), p2 = v.dot(e2);
  const double proj_sq = p1 * p1 + p2 * p2;
  const double omega = v.dot(x) / n;
  return -(1.0 - proj_sq) / (double(n) * n) * std::exp(-2.0 * omega);
}

Grid ambient_grid_through(const Eigen::VectorXd& origin,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          double spacing) {
  const Eigen::Index d = origin.size();
  Eigen::VectorXd glo(d), ghi(d);
  Eigen::VectorXi shape(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const int below = static_cast<int>(std::ceil((origin(i) - lo(i)) / spacing));
    const int above = static_cast<int>(std::ceil((hi(i) - origin(i)) / spacing));
    glo(i) = origin(i) - below * spacing;
    ghi(i) = origin(i) + above * spacing;
    shape(i) = below + above + 1;
  }
  return Grid(glo, ghi, shape);
}

Field conformal_distance_field(const Grid& ambient,
                               const Eigen::VectorXd& origin,
                               const Eigen::VectorXd& v, int n) {
  const Eigen::Index d = ambient.dim();
  if (d > 3) {
    throw std::domain_error("conformal_distance_field: ambient dimension > 3");
  }
  if (origin.size() != d || v.size() != d) {
    throw std::invalid_argument("conformal_distance_field: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (origin(i) < ambient.lo()(i) - 1e-12 ||
        origin(i) > ambient.hi()(i) + 1e-12) {
      throw std::domain_error("conformal_distance_field: origin outside domain");
    }
  }

  // Locate the origin node.
  Eigen::VectorXi mi(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double pos = (origin(i) - ambient.lo()(i)) / ambient.spacing()(i);
    mi(i) = static_cast<int>(std::lround(pos));
    if (std::abs(pos - mi(i)) > 0.1) {
      throw std::invalid_argument(
          "conformal_distance_field: origin is not a grid node");
    }
  }
  const Eigen::Index src = ambient.flat(mi);

  const Eigen::Index size = ambient.size();
  Field dist = Field::Constant(size, std::numeric_limits<double>::infinity());
  std::vector<char> known(static_cast<size_t>(size), 0);

  Field slowness(size);  // 1/speed = e^{<V,x>/n}
  for (Eigen::Index node = 0; node < size; ++node) {
    slowness(node) = std::exp(v.dot(ambient.node(node)) / n);
  }

  using HeapEntry = std::pair<double, Eigen::Index>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  dist(src) = 0.0;
  heap.emplace(0.0, src);

  const auto update = [&](Eigen::Index node) {
    // Upwind quadratic update: sum_i ((T - a_i)^+ / h_i)^2 = s^2.
    std::vector<double> a;
    std::vector<double> h;
    a.reserve(static_cast<size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
      const int c = ambient.coordinate_index(node, i);
      double best = std::numeric_limits<double>::infinity();
      if (c > 0) best = std::min(best, dist(ambient.neighbor(node, i, -1)));
      if (c < ambient.shape()(i) - 1) {
        best = std::min(best, dist(ambient.neighbor(node, i, 1)));
      }
      if (std::isfinite(best)) {
        a.push_back(best);
        h.push_back(ambient.spacing()(i));
      }
    }
    if (a.empty()) return;
    const double s = slowness(node);
    // Solve with the largest values dropped until the solution is upwind.
    // Sort (a, h) ascending by a.
    for (size_t i = 0; i < a.size(); ++i) {
      for (size_t j = i + 1; j < a.size(); ++j) {
        if (a[j] < a[i]) {
          std::swap(a[i], a[j]);
          std::swap(h[i], h[j]);
        }
      }
    }
    double t = std::numeric_limits<double>::infinity();
    for (size_t count = a.size(); count >= 1; --count) {
      double qa = 0.0, qb = 0.0, qc = -s * s;
      for (size_t i = 0; i < count; ++i) {
        const double inv = 1.0 / (h[i] * h[i]);
        qa += inv;
        qb -= 2.0 * a[i] * inv;
        qc += a[i] * a[i] * inv;
      }
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double cand = (-qb + std::sqrt(disc)) / (2.0 * qa);
        if (count == 1 || cand >= a[count - 1]) {
          t = cand;
          break;
        }
      }
    }
    if (t < dist(node)) {
      dist(node) = t;
      heap.emplace(t, node);
    }
  };

  while (!heap.empty()) {
    const auto [t, node] = heap.top();
    heap.pop();
    if (known[static_cast<size_t>(node)]) continue;
    known[static_cast<size_t>(node)] = 1;
    for (Eigen::Index i = 0; i < d; ++i) {
      const int c = ambient.coordinate_index(node, i);
      if (c > 0) {
        const Eigen::Index nb = ambient.neighbor(node, i, -1);
        if (!known[static_cast<size_t>(nb)]) update(nb);
      }
      if (c < ambient.shape()(i) - 1) {
        const Eigen::Index nb = ambient.neighbor(node, i, 1);
        if (!known[static_cast<size_t>(nb)]) update(nb);
      }
    }
  }
  return dist;
}

double interpolate(const Grid& grid, const Field& f, const Eigen::VectorXd& x) {
  const Eigen::Index d = grid.dim();
  Eigen::VectorXi base(d);
  Eigen::VectorXd frac(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    double pos = (x(i) - grid.lo()(i)) / grid.spacing()(i);
    pos = std::min(std::max(pos, 0.0), double(grid.shape()(i) - 1));
    int b = static_cast<int>(std::floor(pos));
    b = std::min(b, grid.shape()(i) - 2);
    base(i) = b;
    frac(i) = pos - b;
  }
  double value = 0.0;
  const int corners = 1 << d;
  for (int corner = 0; corner < corners; ++corner) {
    Eigen::VectorXi mi = base;
    double weight = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (corner & (1 << i)) {
        mi(i) += 1;
        weight *= frac(i);
      } else {
        weight *= 1.0 - frac(i);
      }
    }
    value += weight * f(grid.flat(mi));
  }
  return value;
}

}  // namespace translab

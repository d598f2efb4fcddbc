#pragma once

// Rectangular tensor-product grids over boxes in R^d, with row-major flat
// indexing. Used both for graph base domains and for ambient eikonal grids.

#include <Eigen/Dense>

#include <stdexcept>

namespace translab {

using Field = Eigen::VectorXd;  // one value per node

class Grid {
 public:
  Grid() = default;

  Grid(Eigen::VectorXd lo, Eigen::VectorXd hi, Eigen::VectorXi shape)
      : lo_(std::move(lo)), hi_(std::move(hi)), shape_(std::move(shape)) {
    if (lo_.size() != hi_.size() || lo_.size() != shape_.size() ||
        lo_.size() < 1) {
      throw std::invalid_argument("Grid: inconsistent dimensions");
    }
    const Eigen::Index d = lo_.size();
    spacing_.resize(d);
    strides_.resize(d);
    size_ = 1;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (shape_(i) < 2) throw std::invalid_argument("Grid: axis too short");
      if (!(hi_(i) > lo_(i))) {
        throw std::invalid_argument("Grid: empty axis extent");
      }
      spacing_(i) = (hi_(i) - lo_(i)) / (shape_(i) - 1);
    }
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      strides_(i) = size_;
      size_ *= shape_(i);
    }
  }

  Eigen::Index dim() const { return lo_.size(); }
  Eigen::Index size() const { return size_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  const Eigen::VectorXi& shape() const { return shape_; }
  const Eigen::VectorXd& spacing() const { return spacing_; }
  double max_spacing() const { return spacing_.maxCoeff(); }

  Eigen::Index flat(const Eigen::VectorXi& mi) const {
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < dim(); ++i) idx += strides_(i) * mi(i);
    return idx;
  }

  Eigen::VectorXi multi(Eigen::Index flat_index) const {
    Eigen::VectorXi mi(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      mi(i) = static_cast<int>(flat_index / strides_(i));
      flat_index %= strides_(i);
    }
    return mi;
  }

  int coordinate_index(Eigen::Index flat_index, Eigen::Index axis) const {
    return static_cast<int>(flat_index / strides_(axis)) % shape_(axis);
  }

  Eigen::Index neighbor(Eigen::Index flat_index, Eigen::Index axis,
                        int step) const {
    return flat_index + strides_(axis) * step;
  }

  Eigen::VectorXd node(Eigen::Index flat_index) const {
    Eigen::VectorXd x(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      x(i) = lo_(i) + spacing_(i) * coordinate_index(flat_index, i);
    }
    return x;
  }

  // Smallest node distance to the domain boundary over all axes.
  int boundary_distance(Eigen::Index flat_index) const {
    int dist = shape_.maxCoeff();
    for (Eigen::Index i = 0; i < dim(); ++i) {
      const int c = coordinate_index(flat_index, i);
      dist = std::min({dist, c, shape_(i) - 1 - c});
    }
    return dist;
  }

  bool is_boundary(Eigen::Index flat_index) const {
    return boundary_distance(flat_index) == 0;
  }

  // Composite trapezoid quadrature weights (tensor product).
  Eigen::VectorXd trapezoid_weights() const {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(size_);
    for (Eigen::Index node = 0; node < size_; ++node) {
      for (Eigen::Index i = 0; i < dim(); ++i) {
        const int c = coordinate_index(node, i);
        w(node) *= (c == 0 || c == shape_(i) - 1) ? spacing_(i) / 2
                                                  : spacing_(i);
      }
    }
    return w;
  }

  // Grid refined by halving every spacing (shape 2k-1 per axis).
  Grid refined() const {
    Eigen::VectorXi s = shape_;
    for (Eigen::Index i = 0; i < dim(); ++i) s(i) = 2 * s(i) - 1;
    return Grid(lo_, hi_, s);
  }

 private:
  Eigen::VectorXd lo_, hi_;
  Eigen::VectorXi shape_;
  Eigen::VectorXd spacing_;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1> strides_;
  Eigen::Index size_ = 0;
};

inline Grid interval_grid(double lo, double hi, int nodes) {
  return Grid(Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi),
              Eigen::VectorXi::Constant(1, nodes));
}

inline Grid square_grid(double lo, double hi, int nodes_per_axis) {
  return Grid(Eigen::VectorXd::Constant(2, lo), Eigen::VectorXd::Constant(2, hi),
              Eigen::VectorXi::Constant(2, nodes_per_axis));
}

}  // namespace translab

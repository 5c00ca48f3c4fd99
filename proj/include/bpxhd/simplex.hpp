#pragma once

// Exact geometry of k-simplices embedded in R^m: measures, faces, affine maps
// and the shape-regularity quantities h/r.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bpxhd/errors.hpp"

namespace bpxhd {

using Point = Eigen::VectorXd;

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// x -> matrix * x + offset, mapping the reference simplex {0, e_1, ..., e_d}
/// onto the simplex vertices in order.
struct AffineMap {
  Eigen::MatrixXd matrix;
  Point offset;
  double determinant = 0.0;

  Point operator()(const Point& ref) const { return matrix * ref + offset; }
};

namespace detail {

// Measure of the k-parallelotope spanned by the columns of `edges`, divided by k!.
inline double gram_measure(const Eigen::MatrixXd& edges) {
  const auto k = static_cast<int>(edges.cols());
  if (k == 0) return 1.0;  // 0-dimensional measure convention
  const double g = (edges.transpose() * edges).determinant();
  return std::sqrt(std::max(g, 0.0)) / factorial(k);
}

}  // namespace detail

/// A k-simplex in R^m (k <= m), stored as the columns of an m x (k+1) matrix.
/// Volume, diameter and inradius are computed once at construction.
class Simplex {
 public:
  /// Tolerance used for the degeneracy test: volume < tol * diameter^k.
  static constexpr double kDegeneracyTol = 1e-14;

  explicit Simplex(Eigen::MatrixXd vertices) : vertices_(std::move(vertices)) {
    const auto m = vertices_.rows();
    const auto k = vertices_.cols() - 1;
    if (k < 0) throw std::invalid_argument("Simplex: need at least one vertex");
    if (k > m) {
      throw DegenerateGeometry("Simplex: " + std::to_string(k + 1) + " vertices cannot be affinely independent in R^" +
                               std::to_string(m));
    }
    for (Eigen::Index i = 0; i <= k; ++i)
      for (Eigen::Index j = i + 1; j <= k; ++j)
        diameter_ = std::max(diameter_, (vertices_.col(i) - vertices_.col(j)).norm());
    if (k == 0) {
      volume_ = 1.0;
      return;
    }
    volume_ = detail::gram_measure(edge_matrix());
    if (!(volume_ >= kDegeneracyTol * std::pow(diameter_, static_cast<double>(k)))) {
      throw DegenerateGeometry("Simplex: degenerate (volume " + std::to_string(volume_) + ")");
    }
    double face_sum = 0.0;
    for (int f = 0; f <= k; ++f) face_sum += face_measure(f);
    inradius_ = static_cast<double>(k) * volume_ / face_sum;
  }

  /// Intrinsic dimension k.
  int dim() const { return static_cast<int>(vertices_.cols()) - 1; }
  int ambient_dim() const { return static_cast<int>(vertices_.rows()); }
  int num_vertices() const { return static_cast<int>(vertices_.cols()); }

  const Eigen::MatrixXd& vertices() const { return vertices_; }
  Point vertex(int i) const { return vertices_.col(i); }

  double volume() const { return volume_; }
  double diameter() const { return diameter_; }
  /// r = k |tau| / sum_F |F|. For a 1-simplex this is half its length.
  double inradius() const { return inradius_; }
  double shape_ratio() const { return diameter_ / inradius_; }

  /// Columns v_i - v_0, i = 1..k.
  Eigen::MatrixXd edge_matrix() const {
    const int k = dim();
    Eigen::MatrixXd e(ambient_dim(), k);
    for (int i = 1; i <= k; ++i) e.col(i - 1) = vertices_.col(i) - vertices_.col(0);
    return e;
  }

  /// Vertices of the face opposite local vertex `i`, in increasing local order.
  Eigen::MatrixXd face_vertices(int i) const {
    check_face(i);
    Eigen::MatrixXd fv(ambient_dim(), dim());
    for (int j = 0, c = 0; j <= dim(); ++j)
      if (j != i) fv.col(c++) = vertices_.col(j);
    return fv;
  }

  /// (k-1)-measure of the face opposite vertex i (Gram determinant).
  double face_measure(int i) const {
    const Eigen::MatrixXd fv = face_vertices(i);
    Eigen::MatrixXd e(fv.rows(), fv.cols() - 1);
    for (Eigen::Index j = 1; j < fv.cols(); ++j) e.col(j - 1) = fv.col(j) - fv.col(0);
    return detail::gram_measure(e);
  }

  /// Face i omits vertex i.
  std::vector<Simplex> faces() const {
    if (dim() < 1) throw std::invalid_argument("Simplex::faces: a point has no faces");
    std::vector<Simplex> out;
    out.reserve(static_cast<std::size_t>(dim()) + 1);
    for (int i = 0; i <= dim(); ++i) out.emplace_back(face_vertices(i));
    return out;
  }

  /// Distance from vertex i to the affine hull of the opposite face: k |tau| / |F_i|.
  double height(int i) const { return static_cast<double>(dim()) * volume_ / face_measure(i); }

  AffineMap affine_map() const {
    AffineMap map{edge_matrix(), vertices_.col(0), 0.0};
    if (dim() != ambient_dim()) throw std::invalid_argument("Simplex::affine_map: simplex is not full-dimensional");
    map.determinant = map.matrix.determinant();
    if (map.determinant == 0.0) throw DegenerateGeometry("Simplex::affine_map: singular matrix");
    return map;
  }

  /// Barycentric coordinates of x (full-dimensional simplices only).
  Eigen::VectorXd barycentric(const Point& x) const {
    const Eigen::MatrixXd e = edge_matrix();
    Eigen::VectorXd tail = e.partialPivLu().solve(x - vertices_.col(0));
    Eigen::VectorXd lambda(dim() + 1);
    lambda(0) = 1.0 - tail.sum();
    lambda.tail(dim()) = tail;
    return lambda;
  }

  /// Point with the given barycentric coordinates.
  Point point_at(const Eigen::VectorXd& lambda) const { return vertices_ * lambda; }

  /// Gradients of the barycentric functions as the columns of an m x (k+1) matrix.
  /// Valid for embedded simplices: the gradients are tangential.
  Eigen::MatrixXd barycentric_gradients() const {
    const Eigen::MatrixXd e = edge_matrix();
    // Rows of the pseudo-inverse (e^T e)^{-1} e^T are grad lambda_1..lambda_k.
    const Eigen::MatrixXd g = (e.transpose() * e).ldlt().solve(e.transpose());
    Eigen::MatrixXd grads(ambient_dim(), dim() + 1);
    grads.rightCols(dim()) = g.transpose();
    grads.col(0) = -g.transpose().rowwise().sum();
    return grads;
  }

 private:
  void check_face(int i) const {
    if (i < 0 || i > dim()) throw DomainError("Simplex: face index " + std::to_string(i) + " out of range");
  }

  Eigen::MatrixXd vertices_;
  double volume_ = 0.0;
  double diameter_ = 0.0;
  double inradius_ = 0.0;
};

/// The reference simplex {0, e_1, ..., e_d}.
inline Simplex reference_simplex(int d) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d + 1);
  for (int i = 0; i < d; ++i) v(i, i + 1) = 1.0;
  return Simplex(std::move(v));
}

/// Regular d-simplex with unit edge length.
inline Simplex regular_simplex(int d) {
  // Standard basis vectors of R^{d+1} lie on a hyperplane; project to R^d via an
  // orthonormal basis of that hyperplane.
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(d + 1, d + 1);
  Eigen::VectorXd normal = Eigen::VectorXd::Ones(d + 1) / std::sqrt(d + 1.0);
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d + 1, d + 1) - normal * normal.transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(proj);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd tangent = q.leftCols(d);
  Eigen::MatrixXd v = tangent.transpose() * basis / std::sqrt(2.0);
  return Simplex(std::move(v));
}

/// Element of the Freudenthal triangulation of [0,1]^d for the axis order `order`:
/// v_0 = 0, v_k = v_{k-1} + e_{order[k-1]}.
inline Simplex freudenthal_simplex(const std::vector<int>& order) {
  const int d = static_cast<int>(order.size());
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d + 1);
  for (int k = 1; k <= d; ++k) {
    v.col(k) = v.col(k - 1);
    v(order[static_cast<std::size_t>(k - 1)], k) += 1.0;
  }
  return Simplex(std::move(v));
}

/// Closed forms for the Freudenthal simplex of the unit cube.
inline double freudenthal_volume(int d) { return 1.0 / factorial(d); }
inline double freudenthal_diameter(int d) { return std::sqrt(static_cast<double>(d)); }
inline double freudenthal_inradius(int d) { return 1.0 / (2.0 + (d - 1) * std::sqrt(2.0)); }
inline double freudenthal_shape_ratio(int d) {
  return 2.0 * std::sqrt(static_cast<double>(d)) + (d - 1) * std::sqrt(2.0 * d);
}
inline double regular_shape_ratio(int d) { return std::sqrt(2.0 * d * (d + 1.0)); }

}  // namespace bpxhd

#pragma once

// Freudenthal (Kuhn) triangulation of the unit cube [0,1]^d with n subdivisions
// per axis. Each grid cube is split into d! congruent simplices, one for every
// ordering of the axes; elements are stored implicitly as (cube, permutation)
// and expanded to vertex ids on demand.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bpxhd/budget.hpp"
#include "bpxhd/errors.hpp"
#include "bpxhd/simplex.hpp"

namespace bpxhd {

using Index = std::int64_t;

/// Result of point location.
struct Location {
  Index element = -1;
  Eigen::VectorXd barycentric;
};

/// A boundary (d-1)-face, identified by its owning element and the local index
/// of the opposite vertex. The id of a boundary face is its position in
/// Mesh::boundary_faces().
struct BoundaryFace {
  Index element = -1;
  int local_face = -1;

  friend bool operator==(const BoundaryFace&, const BoundaryFace&) = default;
};

/// Incidence tables for the vertex patches omega_a and element patches omega_tau.
struct PatchIndex {
  std::vector<std::vector<Index>> vertex_to_elements;
  std::vector<std::vector<Index>> element_to_neighbors;
};

class Mesh {
 public:
  /// Builds the triangulation; throws BudgetExceeded if (n+1)^d > budget.
  static Mesh build(int d, int n, std::int64_t budget = default_budget()) {
    if (d < 1) throw std::invalid_argument("Mesh::build: dimension must be >= 1");
    if (n < 1) throw std::invalid_argument("Mesh::build: grid resolution must be >= 1");
    const std::int64_t nv = saturating_pow(n + 1, d);
    if (nv > budget) {
      throw BudgetExceeded("Mesh::build: (n+1)^d = " + std::to_string(nv) + " vertices exceeds budget " +
                           std::to_string(budget) + " (d=" + std::to_string(d) + ", n=" + std::to_string(n) + ")");
    }
    return Mesh(d, n);
  }

  int dim() const { return dim_; }
  int grid_n() const { return n_; }
  /// h = sqrt(d) / n, the element diameter.
  double mesh_size() const { return std::sqrt(static_cast<double>(dim_)) / n_; }
  Index num_vertices() const { return num_vertices_; }
  Index num_cubes() const { return num_cubes_; }
  Index num_elements() const { return num_cubes_ * num_perms(); }
  int num_perms() const { return static_cast<int>(perms_.size()); }

  /// Axis orders in lexicographic order; the id of an order is its Lehmer rank.
  const std::vector<int>& permutation(int id) const { return perms_.at(static_cast<std::size_t>(id)); }

  static int permutation_id(const std::vector<int>& order) {
    const int d = static_cast<int>(order.size());
    int rank = 0;
    for (int i = 0; i < d; ++i) {
      int smaller = 0;
      for (int j = i + 1; j < d; ++j)
        if (order[static_cast<std::size_t>(j)] < order[static_cast<std::size_t>(i)]) ++smaller;
      rank = rank * (d - i) + smaller;
    }
    return rank;
  }

  // --- vertices -------------------------------------------------------------

  /// Integer grid coordinates of vertex `id` (first axis most significant).
  std::vector<int> vertex_grid(Index id) const {
    check_vertex(id);
    std::vector<int> g(static_cast<std::size_t>(dim_));
    for (int i = dim_ - 1; i >= 0; --i) {
      g[static_cast<std::size_t>(i)] = static_cast<int>(id % (n_ + 1));
      id /= (n_ + 1);
    }
    return g;
  }

  Index vertex_id(const std::vector<int>& grid) const {
    Index id = 0;
    for (int i = 0; i < dim_; ++i) {
      const int g = grid[static_cast<std::size_t>(i)];
      if (g < 0 || g > n_) throw DomainError("Mesh::vertex_id: grid coordinate out of range");
      id = id * (n_ + 1) + g;
    }
    return id;
  }

  Point vertex_coords(Index id) const {
    const auto g = vertex_grid(id);
    Point x(dim_);
    for (int i = 0; i < dim_; ++i) x(i) = static_cast<double>(g[static_cast<std::size_t>(i)]) / n_;
    return x;
  }

  bool is_boundary_vertex(Index id) const {
    check_vertex(id);
    return boundary_flags_[static_cast<std::size_t>(id)] != 0;
  }
  const std::vector<std::uint8_t>& boundary_vertex_flags() const { return boundary_flags_; }

  std::vector<Index> boundary_vertex_ids() const {
    std::vector<Index> ids;
    for (Index v = 0; v < num_vertices_; ++v)
      if (boundary_flags_[static_cast<std::size_t>(v)]) ids.push_back(v);
    return ids;
  }

  // --- elements -------------------------------------------------------------

  std::vector<int> element_cube(Index e) const {
    check_element(e);
    Index c = e / num_perms();
    std::vector<int> g(static_cast<std::size_t>(dim_));
    for (int i = dim_ - 1; i >= 0; --i) {
      g[static_cast<std::size_t>(i)] = static_cast<int>(c % n_);
      c /= n_;
    }
    return g;
  }

  int element_permutation(Index e) const {
    check_element(e);
    return static_cast<int>(e % num_perms());
  }

  Index element_id(const std::vector<int>& cube, int perm) const {
    Index c = 0;
    for (int i = 0; i < dim_; ++i) c = c * n_ + cube[static_cast<std::size_t>(i)];
    return c * num_perms() + perm;
  }

  /// Vertex ids of element e in path order v_0 = cube corner, v_k = v_{k-1} + e_{order[k-1]}.
  std::vector<Index> element_vertices(Index e) const {
    const auto cube = element_cube(e);
    const auto& order = perms_[static_cast<std::size_t>(element_permutation(e))];
    std::vector<Index> ids(static_cast<std::size_t>(dim_) + 1);
    Index v = 0;
    for (int i = 0; i < dim_; ++i) v = v * (n_ + 1) + cube[static_cast<std::size_t>(i)];
    ids[0] = v;
    for (int k = 1; k <= dim_; ++k) {
      v += strides_[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])];
      ids[static_cast<std::size_t>(k)] = v;
    }
    return ids;
  }

  Simplex element_simplex(Index e) const {
    const auto ids = element_vertices(e);
    Eigen::MatrixXd v(dim_, dim_ + 1);
    for (int k = 0; k <= dim_; ++k) v.col(k) = vertex_coords(ids[static_cast<std::size_t>(k)]);
    return Simplex(std::move(v));
  }

  /// Element volume (all elements are congruent).
  double element_volume() const { return 1.0 / (factorial(dim_) * std::pow(static_cast<double>(n_), dim_)); }

  // --- point location -------------------------------------------------------

  /// Locates x in [0,1]^d. Points on shared faces go to the lowest element id
  /// that contains them; the returned barycentric coordinates are nonnegative.
  Location locate(const Point& x) const {
    if (x.size() != dim_) throw DomainError("Mesh::locate: point has wrong dimension");
    constexpr double tol = 1e-12;
    std::vector<int> cube(static_cast<std::size_t>(dim_));
    std::vector<double> frac(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) {
      if (!(x(i) >= -tol && x(i) <= 1.0 + tol)) throw DomainError("Mesh::locate: point outside the unit cube");
      double y = std::clamp(x(i), 0.0, 1.0) * n_;
      const double r = std::round(y);
      if (std::abs(y - r) <= tol * n_) y = r;
      // Lowest cube owning y: an integral y > 0 belongs to the cube below it.
      int c = static_cast<int>(std::ceil(y)) - 1;
      c = std::clamp(c, 0, n_ - 1);
      cube[static_cast<std::size_t>(i)] = c;
      frac[static_cast<std::size_t>(i)] = y - c;
    }
    std::vector<int> order(static_cast<std::size_t>(dim_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return frac[static_cast<std::size_t>(a)] > frac[static_cast<std::size_t>(b)];
    });
    // Near-ties are ordered by axis index, which gives the lowest permutation id.
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i + 1;
      while (j < order.size() &&
             frac[static_cast<std::size_t>(order[j - 1])] - frac[static_cast<std::size_t>(order[j])] <= tol)
        ++j;
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(j));
      i = j;
    }
    Location loc;
    loc.element = element_id(cube, permutation_id(order));
    loc.barycentric.resize(dim_ + 1);
    auto f = [&](int k) { return frac[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]; };
    loc.barycentric(0) = 1.0 - f(0);
    for (int k = 1; k < dim_; ++k) loc.barycentric(k) = f(k - 1) - f(k);
    loc.barycentric(dim_) = f(dim_ - 1);
    for (int k = 0; k <= dim_; ++k) loc.barycentric(k) = std::max(loc.barycentric(k), 0.0);
    loc.barycentric /= loc.barycentric.sum();
    return loc;
  }

  // --- patches and faces ----------------------------------------------------

  /// Elements containing vertex a, in increasing id order.
  std::vector<Index> vertex_patch(Index a) const {
    const auto g = vertex_grid(a);
    std::vector<Index> out;
    // Cube corner c = g - delta with delta in {0,1}^d; the path of order p passes
    // through offset delta iff the first |delta| axes of p are exactly delta's support.
    for (int mask = 0; mask < (1 << dim_); ++mask) {
      std::vector<int> cube(static_cast<std::size_t>(dim_));
      bool ok = true;
      int k = 0;
      for (int i = 0; i < dim_; ++i) {
        const int delta = (mask >> (dim_ - 1 - i)) & 1;
        cube[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i)] - delta;
        k += delta;
        if (cube[static_cast<std::size_t>(i)] < 0 || cube[static_cast<std::size_t>(i)] >= n_) ok = false;
      }
      if (!ok) continue;
      for (int p = 0; p < num_perms(); ++p) {
        const auto& order = perms_[static_cast<std::size_t>(p)];
        bool through = true;
        for (int j = 0; j < k && through; ++j)
          through = ((mask >> (dim_ - 1 - order[static_cast<std::size_t>(j)])) & 1) != 0;
        if (through) out.push_back(element_id(cube, p));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// True when local face f of element e lies on the boundary of the cube.
  bool is_boundary_face(Index e, int f) const {
    if (f < 0 || f > dim_) throw DomainError("Mesh::is_boundary_face: local face out of range");
    const auto cube = element_cube(e);
    const auto& order = perms_[static_cast<std::size_t>(element_permutation(e))];
    // Face opposite v_0 sits on x_{order[0]} = cube+1; face opposite v_d on
    // x_{order[d-1]} = cube. Other faces cut through the cube interior.
    if (f == 0) return cube[static_cast<std::size_t>(order[0])] + 1 == n_;
    if (f == dim_) return cube[static_cast<std::size_t>(order[static_cast<std::size_t>(dim_ - 1)])] == 0;
    return false;
  }

  /// All boundary faces ordered by (element id, local face).
  std::vector<BoundaryFace> boundary_faces() const {
    std::vector<BoundaryFace> out;
    for (Index e = 0; e < num_elements(); ++e)
      for (int f = 0; f <= dim_; ++f)
        if (is_boundary_face(e, f)) out.push_back({e, f});
    return out;
  }

  /// Closed-form count 2d n^{d-1} (d-1)!.
  Index expected_boundary_face_count() const {
    return static_cast<Index>(2 * dim_) * saturating_pow(n_, dim_ - 1) * static_cast<Index>(factorial(dim_ - 1));
  }

  PatchIndex build_patch_index() const {
    PatchIndex idx;
    idx.vertex_to_elements.resize(static_cast<std::size_t>(num_vertices_));
    for (Index e = 0; e < num_elements(); ++e)
      for (Index v : element_vertices(e)) idx.vertex_to_elements[static_cast<std::size_t>(v)].push_back(e);
    idx.element_to_neighbors.resize(static_cast<std::size_t>(num_elements()));
    for (Index e = 0; e < num_elements(); ++e) {
      auto& nb = idx.element_to_neighbors[static_cast<std::size_t>(e)];
      for (Index v : element_vertices(e)) {
        const auto& patch = idx.vertex_to_elements[static_cast<std::size_t>(v)];
        nb.insert(nb.end(), patch.begin(), patch.end());
      }
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return idx;
  }

  // --- serialization --------------------------------------------------------

  /// CSV rows "elem_id,cube_index...,perm_id".
  void write_elements_csv(std::ostream& os) const {
    os << "elem_id";
    for (int i = 0; i < dim_; ++i) os << ",c" << i;
    os << ",perm_id\n";
    for (Index e = 0; e < num_elements(); ++e) {
      os << e;
      for (int c : element_cube(e)) os << ',' << c;
      os << ',' << element_permutation(e) << '\n';
    }
  }

 private:
  Mesh(int d, int n) : dim_(d), n_(n) {
    num_vertices_ = saturating_pow(n + 1, d);
    num_cubes_ = saturating_pow(n, d);
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    do {
      perms_.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
    strides_.assign(static_cast<std::size_t>(d), 1);
    for (int i = d - 2; i >= 0; --i)
      strides_[static_cast<std::size_t>(i)] = strides_[static_cast<std::size_t>(i) + 1] * (n + 1);
    boundary_flags_.assign(static_cast<std::size_t>(num_vertices_), 0);
    for (Index v = 0; v < num_vertices_; ++v) {
      Index id = v;
      bool on = false;
      for (int i = 0; i < d; ++i) {
        const auto g = static_cast<int>(id % (n + 1));
        id /= (n + 1);
        on = on || g == 0 || g == n;
      }
      boundary_flags_[static_cast<std::size_t>(v)] = on ? 1 : 0;
    }
  }

  void check_vertex(Index id) const {
    if (id < 0 || id >= num_vertices_) throw DomainError("Mesh: vertex id " + std::to_string(id) + " out of range");
  }
  void check_element(Index e) const {
    if (e < 0 || e >= num_elements()) throw DomainError("Mesh: element id " + std::to_string(e) + " out of range");
  }

  int dim_ = 0;
  int n_ = 0;
  Index num_vertices_ = 0;
  Index num_cubes_ = 0;
  std::vector<std::vector<int>> perms_;
  std::vector<Index> strides_;
  std::vector<std::uint8_t> boundary_flags_;
};

/// True iff every element of `fine` lies inside exactly one element of `coarse`:
/// the fine centroid is located in a coarse element that contains all fine vertices.
inline bool nestedness_check(const Mesh& coarse, const Mesh& fine) {
  if (coarse.dim() != fine.dim()) throw std::invalid_argument("nestedness_check: mismatched dimensions");
  if (fine.grid_n() % coarse.grid_n() != 0) return false;
  constexpr double tol = 1e-12;
  for (Index e = 0; e < fine.num_elements(); ++e) {
    const auto ids = fine.element_vertices(e);
    Point centroid = Point::Zero(fine.dim());
    for (Index v : ids) centroid += fine.vertex_coords(v);
    centroid /= static_cast<double>(ids.size());
    const auto loc = coarse.locate(centroid);
    const Simplex host = coarse.element_simplex(loc.element);
    for (Index v : ids)
      if (host.barycentric(fine.vertex_coords(v)).minCoeff() < -tol) return false;
  }
  return true;
}

}  // namespace bpxhd

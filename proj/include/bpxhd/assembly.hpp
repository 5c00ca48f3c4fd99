#pragma once

// P1 element matrices and global assembly on Freudenthal meshes.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "bpxhd/budget.hpp"
#include "bpxhd/mesh.hpp"
#include "bpxhd/simplex.hpp"
#include "bpxhd/sparse.hpp"

namespace bpxhd {

enum class MatrixKind { mass, stiffness, boundary_mass };
enum class BoundaryCondition { full, dirichlet };

inline std::string to_string(MatrixKind k) {
  switch (k) {
    case MatrixKind::mass: return "mass";
    case MatrixKind::stiffness: return "stiffness";
    case MatrixKind::boundary_mass: return "boundary_mass";
  }
  return "?";
}

/// M_tau = |tau| / ((d+1)(d+2)) (I + 1 1^T)
inline Eigen::MatrixXd local_mass(const Simplex& s) {
  const int d = s.dim();
  const double scale = s.volume() / ((d + 1.0) * (d + 2.0));
  return scale * (Eigen::MatrixXd::Identity(d + 1, d + 1) + Eigen::MatrixXd::Ones(d + 1, d + 1));
}

/// K_ij = |tau| grad(lambda_i) . grad(lambda_j)
inline Eigen::MatrixXd local_stiffness(const Simplex& s) {
  const Eigen::MatrixXd g = s.barycentric_gradients();
  return s.volume() * (g.transpose() * g);
}

/// L^2(F_f)-mass of the restricted basis, where F_f is the face opposite local
/// vertex f: |F| / (d(d+1)) (1 + delta_bc) for b, c != f, zero otherwise.
inline Eigen::MatrixXd local_boundary_mass(const Simplex& s, int f) {
  const int d = s.dim();
  if (f < 0 || f > d) throw DomainError("local_boundary_mass: face index " + std::to_string(f) + " out of range");
  const double area = s.face_measure(f);
  const double scale = area / (static_cast<double>(d) * (d + 1.0));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d + 1, d + 1);
  for (int b = 0; b <= d; ++b)
    for (int c = 0; c <= d; ++c)
      if (b != f && c != f) m(b, c) = scale * (b == c ? 2.0 : 1.0);
  return m;
}

/// L^2(boundary of tau)-mass: sum of the face masses over all d+1 faces.
inline Eigen::MatrixXd local_surface_mass(const Simplex& s) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s.dim() + 1, s.dim() + 1);
  for (int f = 0; f <= s.dim(); ++f) m += local_boundary_mass(s, f);
  return m;
}

/// Numbering of the free (interior) vertices of V_{h,0}.
struct DofMap {
  std::vector<Index> full_to_free;  // -1 for boundary vertices
  std::vector<Index> free_to_full;

  Index free_count() const { return static_cast<Index>(free_to_full.size()); }
  Index full_count() const { return static_cast<Index>(full_to_free.size()); }

  static DofMap dirichlet(const Mesh& m) {
    DofMap map;
    map.full_to_free.assign(static_cast<std::size_t>(m.num_vertices()), -1);
    for (Index v = 0; v < m.num_vertices(); ++v) {
      if (m.is_boundary_vertex(v)) continue;
      map.full_to_free[static_cast<std::size_t>(v)] = static_cast<Index>(map.free_to_full.size());
      map.free_to_full.push_back(v);
    }
    return map;
  }

  static DofMap full(const Mesh& m) {
    DofMap map;
    map.full_to_free.resize(static_cast<std::size_t>(m.num_vertices()));
    map.free_to_full.resize(static_cast<std::size_t>(m.num_vertices()));
    for (Index v = 0; v < m.num_vertices(); ++v) {
      map.full_to_free[static_cast<std::size_t>(v)] = v;
      map.free_to_full[static_cast<std::size_t>(v)] = v;
    }
    return map;
  }

  /// Extends free coefficients by zero to all vertices.
  Vector extend(std::span<const double> free) const {
    Vector full(full_to_free.size(), 0.0);
    for (std::size_t i = 0; i < free_to_full.size(); ++i) full[static_cast<std::size_t>(free_to_full[i])] = free[i];
    return full;
  }

  Vector restrict_to_free(std::span<const double> full) const {
    Vector free(free_to_full.size());
    for (std::size_t i = 0; i < free_to_full.size(); ++i) free[i] = full[static_cast<std::size_t>(free_to_full[i])];
    return free;
  }
};

/// Global matrix over all vertices (full) or over free dofs (dirichlet, by
/// elimination of boundary rows and columns).
inline SparseMatrix assemble(const Mesh& m, MatrixKind kind, BoundaryCondition bc,
                             std::int64_t budget = default_budget()) {
  // Element loops are the cost driver; allow a fixed multiple of the vertex budget.
  if (m.num_elements() > 64 * budget)
    throw BudgetExceeded("assemble: " + std::to_string(m.num_elements()) + " elements exceed the assembly budget");
  const DofMap dofs = bc == BoundaryCondition::dirichlet ? DofMap::dirichlet(m) : DofMap::full(m);
  std::vector<Triplet> t;
  const int nl = m.dim() + 1;
  auto scatter = [&](const std::vector<Index>& ids, const Eigen::MatrixXd& local) {
    for (int i = 0; i < nl; ++i) {
      const Index r = dofs.full_to_free[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])];
      if (r < 0) continue;
      for (int j = 0; j < nl; ++j) {
        const Index c = dofs.full_to_free[static_cast<std::size_t>(ids[static_cast<std::size_t>(j)])];
        if (c < 0 || local(i, j) == 0.0) continue;
        t.push_back({r, c, local(i, j)});
      }
    }
  };
  if (kind == MatrixKind::boundary_mass) {
    for (const auto& bf : m.boundary_faces())
      scatter(m.element_vertices(bf.element), local_boundary_mass(m.element_simplex(bf.element), bf.local_face));
  } else {
    t.reserve(static_cast<std::size_t>(m.num_elements()) * static_cast<std::size_t>(nl * nl));
    for (Index e = 0; e < m.num_elements(); ++e) {
      const Simplex s = m.element_simplex(e);
      scatter(m.element_vertices(e), kind == MatrixKind::mass ? local_mass(s) : local_stiffness(s));
    }
  }
  return SparseMatrix::from_triplets(dofs.free_count(), dofs.free_count(), std::move(t), true);
}

/// max over vertices a and elements tau in omega_a of |grad phi_a| on tau,
/// i.e. the reciprocal of the smallest vertex-to-opposite-face distance.
inline double nodal_gradient_bound(const Mesh& m) {
  double worst = 0.0;
  // Elements are congruent up to translation and axis permutation, but the bound
  // is evaluated per element to stay valid for any element set.
  for (Index e = 0; e < m.num_elements(); ++e) {
    const Simplex s = m.element_simplex(e);
    for (int a = 0; a <= s.dim(); ++a) worst = std::max(worst, 1.0 / s.height(a));
  }
  return worst;
}

}  // namespace bpxhd

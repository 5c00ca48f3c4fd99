#pragma once

// Averaged Scott-Zhang quasi-interpolation and the L^2 / H^1 projections onto
// the P1 space of a Freudenthal mesh.
//
// For an interior vertex a the nodal value is the |K|-weighted mean over all
// elements K of the patch omega_a of int_K psi_{a,K} v, where psi_{a,K} is the
// P1 function on K dual to the restricted nodal basis. A boundary vertex
// averages over one boundary face (containing a) per boundary-touching patch
// element instead, which preserves homogeneous Dirichlet data.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bpxhd/assembly.hpp"
#include "bpxhd/mesh.hpp"
#include "bpxhd/quadrature.hpp"
#include "bpxhd/simplex.hpp"
#include "bpxhd/solvers.hpp"
#include "bpxhd/sparse.hpp"
#include "bpxhd/transfer.hpp"

namespace bpxhd {

/// A scalar field with an optional analytic gradient.
struct ScalarField {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
};

/// An element or a boundary face (id = position in Mesh::boundary_faces()).
struct Region {
  enum class Kind { element, boundary_face };
  Kind kind = Kind::element;
  Index id = -1;

  friend bool operator==(const Region&, const Region&) = default;
};

/// psi_{a,K} in the nodal basis of K.
struct DualFunction {
  Index vertex = -1;  // -1 when built from a bare simplex
  Region region;
  int local_vertex = 0;
  int region_dim = 0;
  double measure = 0.0;
  Eigen::VectorXd coefficients;  // values at the vertices of K
};

/// psi = (k+1)/|K| ((k+2) lambda_a - 1) on a k-simplex.
inline DualFunction dual_function(const Simplex& k_simplex, int local_vertex) {
  const int k = k_simplex.dim();
  if (local_vertex < 0 || local_vertex > k) throw DomainError("dual_function: local vertex out of range");
  DualFunction psi;
  psi.local_vertex = local_vertex;
  psi.region_dim = k;
  psi.measure = k_simplex.volume();
  psi.coefficients = Eigen::VectorXd::Constant(k + 1, -(k + 1.0) / psi.measure);
  psi.coefficients(local_vertex) = (k + 1.0) * (k + 1.0) / psi.measure;
  return psi;
}

/// ||psi||_{L^2(K)}^2 by quadrature.
inline double dual_l2_norm_squared(const Simplex& s, const DualFunction& psi, int degree = 3) {
  const auto rule = grundmann_moller(s.dim(), degree);
  return integrate(s, rule, [&](const Point&, const Eigen::VectorXd& lam) {
    const double v = psi.coefficients.dot(lam);
    return v * v;
  });
}

/// ||psi||_{L^1(K)} by quadrature. psi is positive exactly on the corner
/// simplex {lambda_a > 1/(k+2)}, the image of K under the homothety of ratio
/// (k+1)/(k+2) centred at vertex a, so int |psi| = 2 int_corner psi - int_K psi.
inline double dual_l1_norm(const Simplex& s, const DualFunction& psi, int degree = 3) {
  const int k = s.dim();
  const auto rule = grundmann_moller(k, degree);
  auto value = [&](const Point&, const Eigen::VectorXd& lam) { return psi.coefficients.dot(lam); };
  if (k == 0) return std::abs(psi.coefficients(0));
  const double ratio = (k + 1.0) / (k + 2.0);
  Eigen::MatrixXd corner = s.vertices();
  const Point apex = s.vertex(psi.local_vertex);
  for (int j = 0; j <= k; ++j) corner.col(j) = apex + ratio * (corner.col(j) - apex);
  const Simplex corner_simplex(corner);
  // Barycentric coordinates on the corner simplex map affinely to those of K.
  const double positive = integrate(corner_simplex, rule, [&](const Point&, const Eigen::VectorXd& mu) {
    Eigen::VectorXd lam = ratio * mu;
    lam(psi.local_vertex) += 1.0 - ratio;
    return psi.coefficients.dot(lam);
  });
  return 2.0 * positive - integrate(s, rule, value);
}

/// Closed forms used as references.
inline double dual_l2_norm_squared_formula(int k, double measure) { return (k + 1.0) * (k + 1.0) / measure; }
inline double dual_l1_norm_formula(int k) { return 2.0 * std::pow(k + 1.0, k + 1) / std::pow(k + 2.0, k) - 1.0; }

// --- regions on a mesh ---------------------------------------------------------

/// Geometry of a region together with its global vertex ids.
struct RegionGeometry {
  Eigen::MatrixXd vertices;       // d x (k+1)
  std::vector<Index> vertex_ids;  // k+1
  int fixed_axis = -1;            // boundary faces: axis held constant on the face
  double fixed_value = 0.0;
};

class RegionTable {
 public:
  explicit RegionTable(const Mesh& m) : mesh_(&m), faces_(m.boundary_faces()) {}

  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }

  /// Id of a boundary face, or -1 if (element, local face) is not on the boundary.
  Index face_id(Index element, int local_face) const {
    const BoundaryFace key{element, local_face};
    const auto it = std::lower_bound(faces_.begin(), faces_.end(), key, [](const BoundaryFace& a, const BoundaryFace& b) {
      return a.element != b.element ? a.element < b.element : a.local_face < b.local_face;
    });
    return (it != faces_.end() && *it == key) ? static_cast<Index>(it - faces_.begin()) : -1;
  }

  RegionGeometry geometry(const Region& r) const {
    const Mesh& m = *mesh_;
    RegionGeometry g;
    if (r.kind == Region::Kind::element) {
      g.vertex_ids = m.element_vertices(r.id);
    } else {
      if (r.id < 0 || r.id >= static_cast<Index>(faces_.size())) throw DomainError("RegionTable: face id out of range");
      const auto& bf = faces_[static_cast<std::size_t>(r.id)];
      const auto ids = m.element_vertices(bf.element);
      for (int k = 0; k <= m.dim(); ++k)
        if (k != bf.local_face) g.vertex_ids.push_back(ids[static_cast<std::size_t>(k)]);
    }
    g.vertices.resize(m.dim(), static_cast<Eigen::Index>(g.vertex_ids.size()));
    for (std::size_t k = 0; k < g.vertex_ids.size(); ++k)
      g.vertices.col(static_cast<Eigen::Index>(k)) = m.vertex_coords(g.vertex_ids[k]);
    if (r.kind == Region::Kind::boundary_face) {
      for (int axis = 0; axis < m.dim(); ++axis) {
        const double c = g.vertices(axis, 0);
        if ((c == 0.0 || c == 1.0) && (g.vertices.row(axis).array() == c).all()) {
          g.fixed_axis = axis;
          g.fixed_value = c;
          break;
        }
      }
    }
    return g;
  }

  Simplex simplex(const Region& r) const { return Simplex(geometry(r).vertices); }

 private:
  const Mesh* mesh_;
  std::vector<BoundaryFace> faces_;
};

inline DualFunction dual_function(const Mesh& m, const RegionTable& table, Index a, const Region& region) {
  const auto g = table.geometry(region);
  const auto it = std::find(g.vertex_ids.begin(), g.vertex_ids.end(), a);
  if (it == g.vertex_ids.end())
    throw std::invalid_argument("dual_function: vertex " + std::to_string(a) + " is not a vertex of the region");
  DualFunction psi = dual_function(Simplex(g.vertices), static_cast<int>(it - g.vertex_ids.begin()));
  psi.vertex = a;
  psi.region = region;
  (void)m;
  return psi;
}

/// The collections K_a with weights alpha_K = |K| / sum |K'|.
struct AveragingSets {
  std::vector<std::vector<Region>> regions;
  std::vector<std::vector<double>> weights;
};

/// Interior vertices use every element of their patch. A boundary vertex takes,
/// from each patch element that has a boundary face containing the vertex, the
/// boundary face with the smallest id.
inline AveragingSets build_averaging_sets(const Mesh& m, const RegionTable& table) {
  AveragingSets sets;
  const auto nv = static_cast<std::size_t>(m.num_vertices());
  sets.regions.resize(nv);
  sets.weights.resize(nv);
  for (Index a = 0; a < m.num_vertices(); ++a) {
    auto& regs = sets.regions[static_cast<std::size_t>(a)];
    std::vector<double> measures;
    for (Index e : m.vertex_patch(a)) {
      if (!m.is_boundary_vertex(a)) {
        regs.push_back({Region::Kind::element, e});
        measures.push_back(m.element_volume());
        continue;
      }
      const auto ids = m.element_vertices(e);
      const int local_a = static_cast<int>(std::find(ids.begin(), ids.end(), a) - ids.begin());
      // Faces are scanned in increasing local index, i.e. increasing face id.
      for (int f = 0; f <= m.dim(); ++f) {
        if (f == local_a || !m.is_boundary_face(e, f)) continue;
        const Region r{Region::Kind::boundary_face, table.face_id(e, f)};
        regs.push_back(r);
        measures.push_back(Simplex(table.geometry(r).vertices).volume());
        break;
      }
    }
    double total = 0.0;
    for (double mu : measures) total += mu;
    auto& w = sets.weights[static_cast<std::size_t>(a)];
    for (double mu : measures) w.push_back(mu / total);
  }
  return sets;
}

inline AveragingSets build_averaging_sets(const Mesh& m) { return build_averaging_sets(m, RegionTable(m)); }

namespace detail {

// Moments int_K lambda_b v for every vertex b of the region.
inline Eigen::VectorXd region_moments(const RegionTable& table, const Region& r, const ScalarField& v,
                                      const QuadratureRule& rule) {
  const auto g = table.geometry(r);
  const Simplex s(g.vertices);
  Eigen::VectorXd moments = Eigen::VectorXd::Zero(s.num_vertices());
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd lam = rule.barycentric.col(q);
    Point x = s.point_at(lam);
    if (g.fixed_axis >= 0) x(g.fixed_axis) = g.fixed_value;
    moments += rule.weights(q) * v.value(x) * lam;
  }
  return s.volume() * moments;
}

}  // namespace detail

/// Averaged Scott-Zhang interpolant; returns nodal values at all vertices.
inline Vector interpolate(const Mesh& m, const ScalarField& v, int degree = 3) {
  const RegionTable table(m);
  const AveragingSets sets = build_averaging_sets(m, table);
  const auto elem_rule = grundmann_moller(m.dim(), degree);
  const auto face_rule = grundmann_moller(m.dim() - 1, degree);

  // Each region's moments are computed once and shared by all its vertices.
  std::vector<Eigen::VectorXd> elem_moments(static_cast<std::size_t>(m.num_elements()));
  std::vector<Eigen::VectorXd> face_moments(table.boundary_faces().size());
  Vector out(static_cast<std::size_t>(m.num_vertices()), 0.0);
  for (Index a = 0; a < m.num_vertices(); ++a) {
    const auto& regs = sets.regions[static_cast<std::size_t>(a)];
    const auto& w = sets.weights[static_cast<std::size_t>(a)];
    double value = 0.0;
    for (std::size_t i = 0; i < regs.size(); ++i) {
      const Region& r = regs[i];
      const bool is_elem = r.kind == Region::Kind::element;
      auto& cache = is_elem ? elem_moments[static_cast<std::size_t>(r.id)] : face_moments[static_cast<std::size_t>(r.id)];
      if (cache.size() == 0) cache = detail::region_moments(table, r, v, is_elem ? elem_rule : face_rule);
      const auto g = table.geometry(r);
      const int k = static_cast<int>(g.vertex_ids.size()) - 1;
      const int local = static_cast<int>(std::find(g.vertex_ids.begin(), g.vertex_ids.end(), a) - g.vertex_ids.begin());
      const double measure = is_elem ? m.element_volume() : Simplex(g.vertices).volume();
      // int psi v = (k+1)/|K| ((k+2) int lambda_a v - int v), with int v = sum_b int lambda_b v.
      const double integral = (k + 1.0) / measure * ((k + 2.0) * cache(local) - cache.sum());
      value += w[i] * integral;
    }
    out[static_cast<std::size_t>(a)] = value;
  }
  return out;
}

enum class ErrorNorm { L2, H1 };

/// ||v - u_h||_{L^2} or |v - u_h|_{H^1} for nodal values u_h at all vertices,
/// by element-wise quadrature. The H^1 seminorm needs the analytic gradient.
inline double interp_error(const Mesh& m, const ScalarField& v, std::span<const double> nodal, ErrorNorm norm,
                           int degree = 5) {
  if (nodal.size() != static_cast<std::size_t>(m.num_vertices()))
    throw std::invalid_argument("interp_error: nodal vector has wrong length");
  if (norm == ErrorNorm::H1 && !v.gradient) throw std::invalid_argument("interp_error: H1 error needs a gradient");
  const auto rule = grundmann_moller(m.dim(), degree);
  double total = 0.0;
  for (Index e = 0; e < m.num_elements(); ++e) {
    const auto ids = m.element_vertices(e);
    const Simplex s = m.element_simplex(e);
    Eigen::VectorXd u(m.dim() + 1);
    for (int k = 0; k <= m.dim(); ++k) u(k) = nodal[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])];
    if (norm == ErrorNorm::L2) {
      total += integrate(s, rule, [&](const Point& x, const Eigen::VectorXd& lam) {
        const double diff = v.value(x) - u.dot(lam);
        return diff * diff;
      });
    } else {
      const Point grad_uh = s.barycentric_gradients() * u;
      total += integrate(s, rule, [&](const Point& x, const Eigen::VectorXd&) {
        return (v.gradient(x) - grad_uh).squaredNorm();
      });
    }
  }
  return std::sqrt(total);
}

/// Load vector b_a = int v phi_a over all vertices.
inline Vector load_vector(const Mesh& m, const ScalarField& v, int degree = 5) {
  const auto rule = grundmann_moller(m.dim(), degree);
  Vector b(static_cast<std::size_t>(m.num_vertices()), 0.0);
  for (Index e = 0; e < m.num_elements(); ++e) {
    const auto ids = m.element_vertices(e);
    const Simplex s = m.element_simplex(e);
    Eigen::VectorXd mom = Eigen::VectorXd::Zero(m.dim() + 1);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::VectorXd lam = rule.barycentric.col(q);
      mom += rule.weights(q) * v.value(s.point_at(lam)) * lam;
    }
    for (int k = 0; k <= m.dim(); ++k) b[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])] += s.volume() * mom(k);
  }
  return b;
}

/// L^2 projection Q_h v onto V_h (all vertices): M x = b.
inline Vector l2_project(const Mesh& m, const ScalarField& v, int degree = 5) {
  const SpdSolver solver(assemble(m, MatrixKind::mass, BoundaryCondition::full));
  return solver.solve(load_vector(m, v, degree));
}

/// H^1 projection P_h onto the free dofs of `coarse` of a function given by its
/// free-dof coefficients on a nested finer mesh: A_c x = I^T A_f v.
inline Vector h1_project(const Mesh& coarse, const Mesh& fine, std::span<const double> fine_free) {
  const SparseMatrix p = prolongation_matrix(coarse, fine);
  if (fine_free.size() != static_cast<std::size_t>(p.rows()))
    throw std::invalid_argument("h1_project: coefficient vector has wrong length");
  const SparseMatrix a_fine = assemble(fine, MatrixKind::stiffness, BoundaryCondition::dirichlet);
  const SpdSolver solver(assemble(coarse, MatrixKind::stiffness, BoundaryCondition::dirichlet));
  return solver.solve(p.transpose_multiply(a_fine * fine_free));
}

}  // namespace bpxhd

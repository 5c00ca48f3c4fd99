#pragma once

// Nested dyadic Freudenthal hierarchy: level l (1-based) is the mesh with grid
// n = 2^l, h_l = sqrt(d) 2^{-l}. Level 1 is the coarsest mesh with a free dof.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bpxhd/assembly.hpp"
#include "bpxhd/budget.hpp"
#include "bpxhd/errors.hpp"
#include "bpxhd/mesh.hpp"
#include "bpxhd/solvers.hpp"
#include "bpxhd/sparse.hpp"
#include "bpxhd/transfer.hpp"

namespace bpxhd {

struct Level {
  Mesh mesh;
  DofMap dofs;
  SparseMatrix stiffness;  // free dofs
  SparseMatrix mass;       // free dofs
  Vector lumped_mass;      // int phi_a: full-space mass row sums at free dofs
  Vector mass_diagonal;
  SpdSolver mass_solver;
  double h = 0.0;

  Index size() const { return dofs.free_count(); }
};

class Hierarchy {
 public:
  static Hierarchy build(int d, int levels, std::int64_t budget = default_budget()) {
    if (d < 1) throw std::invalid_argument("build_hierarchy: dimension must be >= 1");
    if (levels < 1) throw std::invalid_argument("build_hierarchy: need at least one level");
    if (levels > 30) throw BudgetExceeded("build_hierarchy: level " + std::to_string(levels) + " exceeds the grid range");
    for (int l = 1; l <= levels; ++l) {
      const std::int64_t nv = saturating_pow((std::int64_t{1} << l) + 1, d);
      if (nv > budget)
        throw BudgetExceeded("build_hierarchy: level " + std::to_string(l) + " needs " + std::to_string(nv) +
                             " vertices, budget is " + std::to_string(budget));
    }
    Hierarchy h;
    h.dim_ = d;
    for (int l = 1; l <= levels; ++l) {
      Mesh mesh = Mesh::build(d, 1 << l, budget);
      DofMap dofs = DofMap::dirichlet(mesh);
      SparseMatrix a = assemble(mesh, MatrixKind::stiffness, BoundaryCondition::dirichlet, budget);
      SparseMatrix m = assemble(mesh, MatrixKind::mass, BoundaryCondition::dirichlet, budget);
      // Lumping uses int phi_a over the whole domain, i.e. full-space row sums.
      const Vector full_rows = assemble(mesh, MatrixKind::mass, BoundaryCondition::full, budget).row_sums();
      Vector lumped = dofs.restrict_to_free(full_rows);
      Vector diag = m.diagonal();
      SpdSolver solver(m);
      const double hl = mesh.mesh_size();
      h.levels_.push_back(Level{std::move(mesh), std::move(dofs), std::move(a), std::move(m), std::move(lumped),
                                std::move(diag), std::move(solver), hl});
    }
    for (int l = 1; l < levels; ++l) {
      const Level& c = h.level(l);
      const Level& f = h.level(l + 1);
      h.prolongations_.push_back(prolongation_matrix(c.mesh, c.dofs, f.mesh, f.dofs));
    }
    return h;
  }

  int dim() const { return dim_; }
  int num_levels() const { return static_cast<int>(levels_.size()); }
  const Level& level(int l) const { return levels_.at(check_level(l)); }
  const Level& finest() const { return levels_.back(); }
  double h(int l) const { return level(l).h; }
  Index size(int l) const { return level(l).size(); }

  /// I_{l -> l+1}
  const SparseMatrix& prolongation(int l) const {
    if (l < 1 || l >= num_levels()) throw DomainError("Hierarchy: no prolongation from level " + std::to_string(l));
    return prolongations_[static_cast<std::size_t>(l - 1)];
  }

  Vector prolong(int l, std::span<const double> coarse) const {
    const auto& p = prolongation(l);
    check_length(coarse, p.cols(), "prolong");
    return p * coarse;
  }

  Vector restrict_to(int l, std::span<const double> fine) const {
    const auto& p = prolongation(l);
    check_length(fine, p.rows(), "restrict");
    return p.transpose_multiply(fine);
  }

  /// I_{l -> k}, applied factor by factor.
  Vector prolong_to(int l, int k, std::span<const double> v) const {
    if (k < l) throw DomainError("Hierarchy: prolong_to needs l <= k");
    Vector x(v.begin(), v.end());
    check_length(x, size(l), "prolong_to");
    for (int j = l; j < k; ++j) x = prolong(j, x);
    return x;
  }

  /// I_{l -> k}^T
  Vector restrict_from(int k, int l, std::span<const double> r) const {
    if (k < l) throw DomainError("Hierarchy: restrict_from needs l <= k");
    Vector x(r.begin(), r.end());
    check_length(x, size(k), "restrict_from");
    for (int j = k - 1; j >= l; --j) x = restrict_to(j, x);
    return x;
  }

  Vector mass_solve(int l, std::span<const double> r) const { return level(l).mass_solver.solve(r); }

  /// Coefficients on level l of Q_l v for v given on the finest level:
  /// M_l x = I_{l->J}^T M_J v.
  Vector level_l2_project(int l, std::span<const double> fine) const {
    check_length(fine, finest().size(), "level_l2_project");
    return mass_solve(l, restrict_from(num_levels(), l, finest().mass * fine));
  }

  /// Q_l v expressed on the finest level.
  Vector l2_project_fine(int l, std::span<const double> fine) const {
    return prolong_to(l, num_levels(), level_l2_project(l, fine));
  }

 private:
  std::size_t check_level(int l) const {
    if (l < 1 || l > num_levels()) throw DomainError("Hierarchy: level " + std::to_string(l) + " out of range");
    return static_cast<std::size_t>(l - 1);
  }
  static void check_length(std::span<const double> v, Index n, const char* what) {
    if (static_cast<Index>(v.size()) != n)
      throw std::invalid_argument(std::string("Hierarchy::") + what + ": vector length " + std::to_string(v.size()) +
                                  " != " + std::to_string(n));
  }

  int dim_ = 0;
  std::vector<Level> levels_;
  std::vector<SparseMatrix> prolongations_;
};

inline Hierarchy build_hierarchy(int d, int levels, std::int64_t budget = default_budget()) {
  return Hierarchy::build(d, levels, budget);
}

}  // namespace bpxhd

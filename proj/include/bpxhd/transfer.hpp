#pragma once

// Nodal transfer between nested Freudenthal meshes.

#include <cmath>
#include <string>
#include <vector>

#include "bpxhd/assembly.hpp"
#include "bpxhd/mesh.hpp"
#include "bpxhd/sparse.hpp"

namespace bpxhd {

/// Matrix I mapping coarse nodal coefficients to fine nodal coefficients:
/// the fine value at vertex x is the coarse P1 function evaluated at x, which
/// is exact because the spaces are nested. Rows/columns follow the given dof maps.
inline SparseMatrix prolongation_matrix(const Mesh& coarse, const DofMap& coarse_dofs, const Mesh& fine,
                                        const DofMap& fine_dofs) {
  if (coarse.dim() != fine.dim()) throw std::invalid_argument("prolongation_matrix: mismatched dimensions");
  if (fine.grid_n() % coarse.grid_n() != 0) throw std::invalid_argument("prolongation_matrix: meshes are not nested");
  std::vector<Triplet> t;
  for (Index row = 0; row < fine_dofs.free_count(); ++row) {
    const Index fv = fine_dofs.free_to_full[static_cast<std::size_t>(row)];
    const auto loc = coarse.locate(fine.vertex_coords(fv));
    const auto ids = coarse.element_vertices(loc.element);
    for (int k = 0; k <= coarse.dim(); ++k) {
      const double w = loc.barycentric(k);
      if (std::abs(w) < 1e-14) continue;
      const Index col = coarse_dofs.full_to_free[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])];
      if (col >= 0) t.push_back({row, col, w});
    }
  }
  return SparseMatrix::from_triplets(fine_dofs.free_count(), coarse_dofs.free_count(), std::move(t));
}

/// Prolongation on the free (Dirichlet) dofs of both meshes.
inline SparseMatrix prolongation_matrix(const Mesh& coarse, const Mesh& fine) {
  return prolongation_matrix(coarse, DofMap::dirichlet(coarse), fine, DofMap::dirichlet(fine));
}

}  // namespace bpxhd

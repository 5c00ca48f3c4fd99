#pragma once

// JSON mirrors of the tabular outputs.

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "bpxhd/bpx.hpp"
#include "bpxhd/mesh.hpp"
#include "bpxhd/verification.hpp"

namespace bpxhd {

using Json = nlohmann::ordered_json;

namespace detail {
// NaN and infinities become null.
inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
}  // namespace detail

inline Json to_json(const ConstantReport& r) {
  return Json{{"claim", r.claim},
              {"d", r.d},
              {"J", r.levels},
              {"n", r.n},
              {"variant", r.variant},
              {"measured", detail::number(r.measured)},
              {"reference", detail::number(r.reference)},
              {"ratio", detail::number(r.ratio)},
              {"status", r.status},
              {"seed", r.seed}};
}

inline Json to_json(const std::vector<ConstantReport>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) a.push_back(to_json(r));
  return a;
}

inline Json to_json(const SpectrumRow& r) {
  return Json{{"d", r.d},
              {"J", r.levels},
              {"variant", r.variant},
              {"lambda_min", detail::number(r.lambda_min)},
              {"lambda_max", detail::number(r.lambda_max)},
              {"kappa", detail::number(r.kappa)},
              {"method", r.method}};
}

inline Json to_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"relative_residual", detail::number(r.relative_residual)},
              {"wall_seconds", r.wall_seconds},
              {"variant", r.variant},
              {"d", r.d},
              {"J", r.levels},
              {"converged", r.converged}};
}

inline Json to_json(const SweepResult& s) {
  Json cells = Json::array();
  for (const auto& c : s.cells) {
    Json j = to_json(c.row);
    j["ok"] = c.ok;
    if (!c.ok) j["error"] = c.error;
    cells.push_back(std::move(j));
  }
  Json fits = Json::array();
  for (const auto& f : s.fits)
    fits.push_back(Json{{"variant", f.variant}, {"J", f.levels}, {"points", f.points}, {"slope", detail::number(f.slope)}});
  return Json{{"cells", cells}, {"fits", fits}};
}

inline Json mesh_summary(const Mesh& m) {
  const Simplex s = m.element_simplex(0);
  return Json{{"dim", m.dim()},
              {"n", m.grid_n()},
              {"num_vertices", m.num_vertices()},
              {"num_elements", m.num_elements()},
              {"num_boundary_faces", m.expected_boundary_face_count()},
              {"h", m.mesh_size()},
              {"shape_ratio", s.shape_ratio()},
              {"shape_ratio_formula", freudenthal_shape_ratio(m.dim())},
              {"boundary_vertex_ids", m.boundary_vertex_ids()}};
}

}  // namespace bpxhd

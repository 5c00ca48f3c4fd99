#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bpxhd/interpolation.hpp"
#include "oracles.hpp"

using namespace bpxhd;

namespace {

const double kPi = std::acos(-1.0);

ScalarField affine_field(const Eigen::VectorXd& c, double c0) {
  return {[c, c0](const Point& x) { return c.dot(x) + c0; }, [c](const Point&) { return Point(c); }};
}

// Product of sines; vanishes on the cube boundary.
ScalarField bubble(int d) {
  return {[d](const Point& x) {
            double p = 1.0;
            for (int i = 0; i < d; ++i) p *= std::sin(kPi * x(i));
            return p;
          },
          {}};
}

// x(1-x) per axis times a smooth factor; zero on the boundary in floating point too.
ScalarField polynomial_bubble(int d) {
  return {[d](const Point& x) {
            double p = std::exp(x.sum());
            for (int i = 0; i < d; ++i) p *= x(i) * (1.0 - x(i));
            return p;
          },
          {}};
}

}  // namespace

TEST(DualFunction, BiorthogonalToBarycentrics) {
  for (int k = 1; k <= 4; ++k) {
    Eigen::MatrixXd v = reference_simplex(k).vertices() + 0.2 * Eigen::MatrixXd::Random(k, k + 1);
    const Simplex s(v);
    for (int a = 0; a <= k; ++a) {
      const DualFunction psi = dual_function(s, a);
      for (int b = 0; b <= k; ++b) {
        const double ip = oracle::stroud_integrate(v, s.volume(), [&](const Eigen::VectorXd&, const Eigen::VectorXd& lam) {
          return psi.coefficients.dot(lam) * lam(b);
        });
        EXPECT_NEAR(ip, a == b ? 1.0 : 0.0, 1e-10);
      }
    }
  }
}

TEST(DualFunction, NormsMatchClosedForms) {
  for (int k = 1; k <= 5; ++k) {
    const Simplex s = reference_simplex(k);
    const DualFunction psi = dual_function(s, 0);
    EXPECT_NEAR(dual_l2_norm_squared(s, psi), dual_l2_norm_squared_formula(k, s.volume()),
                1e-10 * dual_l2_norm_squared_formula(k, s.volume()));
    EXPECT_NEAR(dual_l1_norm(s, psi), dual_l1_norm_formula(k), 1e-10);
  }
}

TEST(DualFunction, OneDimensionalL1NormByPiecewiseGauss) {
  // psi = (2/h)(3 lambda - 1) on [0, h]; |psi| has a kink at lambda = 1/3.
  const double h = 0.25;
  auto f = [&](double x) { return std::abs(2.0 / h * (3.0 * (1.0 - x / h) - 1.0)); };
  const double oracle_l1 = oracle::integrate_1d(f, 0.0, 2.0 * h / 3.0) + oracle::integrate_1d(f, 2.0 * h / 3.0, h);
  Eigen::MatrixXd v(1, 2);
  v << 0.0, h;
  const Simplex s(v);
  EXPECT_NEAR(dual_l1_norm(s, dual_function(s, 0)), oracle_l1, 1e-12);
  EXPECT_NEAR(oracle_l1, 5.0 / 3.0, 1e-12);
}

TEST(DualFunction, MeshRegionRequiresIncidentVertex) {
  const Mesh m = Mesh::build(2, 2);
  const RegionTable table(m);
  const auto ids = m.element_vertices(0);
  EXPECT_NO_THROW(dual_function(m, table, ids[0], Region{Region::Kind::element, 0}));
  Index outside = 0;
  while (std::find(ids.begin(), ids.end(), outside) != ids.end()) ++outside;
  EXPECT_THROW(dual_function(m, table, outside, Region{Region::Kind::element, 0}), std::invalid_argument);
}

TEST(RegionTable, FaceIdsFollowBoundaryFaceOrder) {
  const Mesh m = Mesh::build(3, 2);
  const RegionTable table(m);
  const auto& faces = table.boundary_faces();
  for (std::size_t i = 0; i < faces.size(); ++i) {
    EXPECT_EQ(table.face_id(faces[i].element, faces[i].local_face), static_cast<Index>(i));
    const auto g = table.geometry({Region::Kind::boundary_face, static_cast<Index>(i)});
    ASSERT_GE(g.fixed_axis, 0);
    EXPECT_TRUE((g.vertices.row(g.fixed_axis).array() == g.fixed_value).all());
  }
  EXPECT_EQ(table.face_id(0, 1), -1);
}

TEST(AveragingSets, WeightsArePositiveAndSumToOne) {
  for (int d = 1; d <= 3; ++d) {
    const Mesh m = Mesh::build(d, 3);
    const RegionTable table(m);
    const auto sets = build_averaging_sets(m, table);
    for (Index a = 0; a < m.num_vertices(); ++a) {
      const auto& regs = sets.regions[static_cast<std::size_t>(a)];
      const auto& w = sets.weights[static_cast<std::size_t>(a)];
      ASSERT_FALSE(regs.empty());
      double total = 0.0;
      for (double x : w) {
        EXPECT_GT(x, 0.0);
        total += x;
      }
      EXPECT_NEAR(total, 1.0, 1e-14);
      for (const Region& r : regs) {
        EXPECT_EQ(r.kind == Region::Kind::boundary_face, m.is_boundary_vertex(a));
        const auto ids = table.geometry(r).vertex_ids;
        EXPECT_NE(std::find(ids.begin(), ids.end(), a), ids.end());
      }
      if (!m.is_boundary_vertex(a)) {
        EXPECT_EQ(regs.size(), m.vertex_patch(a).size());
      }
    }
  }
}

TEST(Interpolation, ReproducesFiniteElementFunctions) {
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d = 1; d <= 3; ++d) {
    const Mesh m = Mesh::build(d, 3);
    Vector nodal(static_cast<std::size_t>(m.num_vertices()));
    for (double& x : nodal) x = u(gen);
    const ScalarField fe{[&](const Point& x) {
                           const Location loc = m.locate(x);
                           const auto ids = m.element_vertices(loc.element);
                           double s = 0.0;
                           for (int k = 0; k <= d; ++k)
                             s += loc.barycentric(k) * nodal[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])];
                           return s;
                         },
                         {}};
    const Vector back = interpolate(m, fe);
    for (std::size_t i = 0; i < nodal.size(); ++i) EXPECT_NEAR(back[i], nodal[i], 1e-10) << "d=" << d;
  }
}

TEST(Interpolation, PreservesHomogeneousBoundaryValuesExactly) {
  for (int d = 1; d <= 4; ++d) {
    const Mesh m = Mesh::build(d, 2);
    const Vector v = interpolate(m, polynomial_bubble(d));
    for (Index a : m.boundary_vertex_ids()) EXPECT_EQ(v[static_cast<std::size_t>(a)], 0.0);
  }
}

TEST(Interpolation, OneDimensionalValuesMatchGaussOracle) {
  const int n = 4;
  const double h = 1.0 / n;
  auto f = [](double x) { return std::sin(kPi * x) + x * x; };
  const Mesh m = Mesh::build(1, n);
  const Vector v = interpolate(m, {[&](const Point& x) { return f(x(0)); }, {}}, 11);
  for (Index a = 0; a <= n; ++a) {
    const double xa = a * h;
    double expected = 0.0;
    if (a == 0 || a == n) {
      expected = f(xa);  // point evaluation on a 0-dimensional face
    } else {
      // Left element: lambda_a = (x - x_{a-1})/h; right element: lambda_a = (x_{a+1} - x)/h.
      const double left = oracle::integrate_1d([&](double x) { return 2.0 / h * (3.0 * (x - xa + h) / h - 1.0) * f(x); }, xa - h, xa);
      const double right = oracle::integrate_1d([&](double x) { return 2.0 / h * (3.0 * (xa + h - x) / h - 1.0) * f(x); }, xa, xa + h);
      expected = 0.5 * (left + right);
    }
    EXPECT_NEAR(v[static_cast<std::size_t>(a)], expected, 1e-10) << "a=" << a;
  }
}

TEST(Interpolation, ErrorNormsOfSimpleFields) {
  const Mesh m = Mesh::build(2, 2);
  const Vector zero(static_cast<std::size_t>(m.num_vertices()), 0.0);
  Eigen::VectorXd c(2);
  c << 3.0, 4.0;
  EXPECT_NEAR(interp_error(m, affine_field(Eigen::VectorXd::Zero(2), 1.0), zero, ErrorNorm::L2), 1.0, 1e-13);
  EXPECT_NEAR(interp_error(m, affine_field(c, 0.0), zero, ErrorNorm::H1), 5.0, 1e-13);
  const Vector exact = interpolate(m, affine_field(c, 0.5));
  EXPECT_NEAR(interp_error(m, affine_field(c, 0.5), exact, ErrorNorm::L2), 0.0, 1e-12);
  EXPECT_THROW(interp_error(m, bubble(2), zero, ErrorNorm::H1), std::invalid_argument);
  EXPECT_THROW(interp_error(m, bubble(2), Vector(3), ErrorNorm::L2), std::invalid_argument);
}

TEST(Interpolation, ErrorDecreasesUnderRefinement) {
  const auto field = bubble(2);
  double prev = 1e9;
  for (int n : {2, 4, 8}) {
    const Mesh m = Mesh::build(2, n);
    const double e = interp_error(m, field, interpolate(m, field), ErrorNorm::L2);
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(Projection, L2ProjectionReproducesAffineAndIsOrthogonal) {
  const Mesh m = Mesh::build(2, 3);
  Eigen::VectorXd c(2);
  c << 1.0, -2.0;
  const Vector q = l2_project(m, affine_field(c, 0.25));
  for (Index a = 0; a < m.num_vertices(); ++a)
    EXPECT_NEAR(q[static_cast<std::size_t>(a)], c.dot(m.vertex_coords(a)) + 0.25, 1e-11);

  // M Q v = b: residual of the Galerkin condition vanishes.
  const auto field = bubble(2);
  const Vector qb = l2_project(m, field);
  const Vector mq = assemble(m, MatrixKind::mass, BoundaryCondition::full) * qb;
  const Vector b = load_vector(m, field);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(mq[i], b[i], 1e-12);
}

TEST(Projection, H1ProjectionFixesCoarseFunctions) {
  const Mesh coarse = Mesh::build(2, 2), fine = Mesh::build(2, 4);
  const SparseMatrix p = prolongation_matrix(coarse, fine);
  Vector c(static_cast<std::size_t>(p.cols()));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 1.0 + static_cast<double>(i);
  const Vector back = h1_project(coarse, fine, p * c);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(back[i], c[i], 1e-10);
  EXPECT_THROW(h1_project(coarse, fine, Vector(2)), std::invalid_argument);
}

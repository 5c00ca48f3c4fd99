#pragma once

// Sparse SPD solves: Cholesky for desk-size systems, conjugate gradients beyond.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <utility>

#include "bpxhd/errors.hpp"
#include "bpxhd/sparse.hpp"
#include "bpxhd/spectral.hpp"

namespace bpxhd {

/// Above this many unknowns the SPD solver switches from Cholesky to CG.
inline constexpr std::int64_t kDirectSolveLimit = 20000;

/// Unpreconditioned CG on an SPD matrix; throws NumericalFailure on
/// non-convergence. Relative residual ||b - Ax|| / ||b||.
inline Vector cg_solve(const SparseMatrix& a, std::span<const double> b, double rel_tol, int max_iter) {
  const auto n = b.size();
  Vector x(n, 0.0), r(b.begin(), b.end()), p = r, ap(n);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return x;
  double rr = dot(r, r);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= rel_tol * bnorm) return x;
    a.multiply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw NumericalFailure("cg_solve: matrix is not positive definite");
    const double alpha = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rr_new = dot(r, r);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + (rr_new / rr) * p[i];
    rr = rr_new;
  }
  if (std::sqrt(rr) <= rel_tol * bnorm) return x;
  throw NumericalFailure("cg_solve: no convergence in " + std::to_string(max_iter) + " iterations");
}

/// Solver handle for a fixed SPD matrix.
class SpdSolver {
 public:
  explicit SpdSolver(SparseMatrix a, double cg_tol = 1e-12) : a_(std::move(a)), cg_tol_(cg_tol) {
    const SparseMatrix& m = a_;
    if (m.rows() <= kDirectSolveLimit) {
      llt_ = std::make_unique<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(m.to_eigen());
      if (llt_->info() != Eigen::Success) throw NumericalFailure("SpdSolver: Cholesky factorization failed");
    }
  }

  bool direct() const { return static_cast<bool>(llt_); }

  Vector solve(std::span<const double> b) const {
    if (llt_) {
      Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
      Eigen::VectorXd x = llt_->solve(rhs);
      return Vector(x.data(), x.data() + x.size());
    }
    return cg_solve(a_, b, cg_tol_, 10000);
  }

 private:
  SparseMatrix a_;
  double cg_tol_;
  std::unique_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

}  // namespace bpxhd

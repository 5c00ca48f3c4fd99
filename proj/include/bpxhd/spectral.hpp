#pragma once

// Dense generalized symmetric eigensolvers and a fully reorthogonalized Lanczos
// process for the extreme eigenvalues of B*A, with A and B symmetric positive
// definite. The dense path is the oracle; Lanczos is the scaling path.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bpxhd/errors.hpp"
#include "bpxhd/sparse.hpp"

namespace bpxhd {

/// Largest problem handed to the dense oracle.
inline constexpr std::int64_t kDenseLimit = 3000;

/// Eigenvalues of B^{-1} A (ascending) via Cholesky congruence L^{-1} A L^{-T}.
inline Eigen::VectorXd dense_generalized_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("dense_generalized_eig: shape mismatch");
  if (a.rows() > kDenseLimit) throw std::invalid_argument("dense_generalized_eig: problem exceeds dense limit");
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  if (llt.info() != Eigen::Success) throw NumericalFailure("dense_generalized_eig: B is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd c = llt.matrixL().solve(a);
  c = llt.matrixL().solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("dense_generalized_eig: eigensolver failed");
  return es.eigenvalues();
}

/// Eigenvalues (ascending) of C A for symmetric A and SPD C, via L^T A L with C = L L^T.
inline Eigen::VectorXd dense_product_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
  if (a.rows() > kDenseLimit) throw std::invalid_argument("dense_product_eig: problem exceeds dense limit");
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw NumericalFailure("dense_product_eig: C is not positive definite");
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd s = l.transpose() * a * l;
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("dense_product_eig: eigensolver failed");
  return es.eigenvalues();
}

using LinearAction = std::function<void(std::span<const double>, std::span<double>)>;

/// A pencil given by actions: the operator of interest is B*A with A, B SPD.
/// An empty `apply_b` means B = I.
struct OperatorPair {
  LinearAction apply_a;
  LinearAction apply_b;
  std::int64_t size = 0;
};

inline LinearAction as_action(const SparseMatrix& m) {
  return [&m](std::span<const double> x, std::span<double> y) { m.multiply(x, y); };
}

/// Dense matrix of a linear action (column by column).
inline Eigen::MatrixXd materialize(const LinearAction& f, std::int64_t n) {
  Eigen::MatrixXd out(n, n);
  Vector e(static_cast<std::size_t>(n), 0.0), y(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    e[static_cast<std::size_t>(j)] = 1.0;
    f(e, y);
    for (std::int64_t i = 0; i < n; ++i) out(i, j) = y[static_cast<std::size_t>(i)];
    e[static_cast<std::size_t>(j)] = 0.0;
  }
  return out;
}

/// Portable uniform doubles in [-1, 1) from a 64-bit Mersenne twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }
  Vector vector(std::size_t n) {
    Vector v(n);
    for (auto& x : v) x = uniform();
    return v;
  }
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct LanczosResult {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double residual_min = 0.0;  // Ritz residual estimates (A-norm)
  double residual_max = 0.0;
  int steps = 0;
  int attempts = 0;
  std::uint64_t seed = 0;
  std::vector<double> ritz_history_min;  // lambda_min estimate after each step
  std::vector<double> ritz_history_max;
};

/// Extreme eigenvalues of B*A by Lanczos in the A-inner product with full
/// reorthogonalization. Runs at least `steps` iterations (or the problem size),
/// then continues up to `max_steps` until both Ritz residuals fall below
/// rel_tol * |lambda|. Deterministic for a given seed.
///
/// An early invariant subspace (breakdown) restarts from a fresh random vector;
/// if three starts break down with disagreeing extremes the call fails.
inline LanczosResult lanczos_extremes(const OperatorPair& p, int steps, std::uint64_t seed, int max_steps = 600,
                                      double rel_tol = 1e-9) {
  if (steps < 1) throw std::invalid_argument("lanczos_extremes: steps must be positive");
  const auto n = static_cast<std::size_t>(p.size);
  if (n == 0) throw std::invalid_argument("lanczos_extremes: empty operator");
  auto apply_b = [&](std::span<const double> x, std::span<double> y) {
    if (p.apply_b) p.apply_b(x, y);
    else std::copy(x.begin(), x.end(), y.begin());
  };
  const int cap = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(std::max(steps, max_steps))));
  const int min_steps = std::min(steps, cap);

  LanczosResult previous;
  bool have_previous = false;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL);
    std::vector<Vector> basis;   // A-orthonormal Lanczos vectors v_j
    std::vector<Vector> abasis;  // A v_j
    std::vector<double> alpha, beta;
    Vector v = rng.vector(n), av(n), w(n), aw(n);
    p.apply_a(v, av);
    double nrm = std::sqrt(dot(v, av));
    if (!(nrm > 0.0)) throw NumericalFailure("lanczos_extremes: A is not positive definite on the start vector");
    for (std::size_t i = 0; i < n; ++i) {
      v[i] /= nrm;
      av[i] /= nrm;
    }
    LanczosResult res;
    res.seed = seed;
    res.attempts = attempt + 1;
    bool breakdown = false;
    for (int k = 0; k < cap; ++k) {
      basis.push_back(v);
      abasis.push_back(av);
      apply_b(av, w);  // w = B A v_k
      // Full reorthogonalization (twice) in the A-inner product: <w, v_j>_A = w . (A v_j).
      double diag_k = 0.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t j = 0; j < basis.size(); ++j) {
          const double c = dot(w, abasis[j]);
          if (j + 1 == basis.size()) diag_k += c;
          for (std::size_t i = 0; i < n; ++i) w[i] -= c * basis[j][i];
        }
      alpha.push_back(diag_k);
      p.apply_a(w, aw);
      const double b = std::sqrt(std::max(dot(w, aw), 0.0));

      // Ritz values of the tridiagonal T_k.
      const int m = static_cast<int>(alpha.size());
      Eigen::VectorXd diag(m), off(std::max(m - 1, 0));
      for (int i = 0; i < m; ++i) diag(i) = alpha[static_cast<std::size_t>(i)];
      for (int i = 0; i + 1 < m; ++i) off(i) = beta[static_cast<std::size_t>(i)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
      const auto& vals = es.eigenvalues();
      const auto& vecs = es.eigenvectors();
      res.lambda_min = vals(0);
      res.lambda_max = vals(m - 1);
      res.residual_min = b * std::abs(vecs(m - 1, 0));
      res.residual_max = b * std::abs(vecs(m - 1, m - 1));
      res.steps = m;
      res.ritz_history_min.push_back(res.lambda_min);
      res.ritz_history_max.push_back(res.lambda_max);

      const double scale = std::max(std::abs(res.lambda_max), std::abs(res.lambda_min));
      if (m == static_cast<int>(n)) break;  // full Krylov space: Ritz values are exact
      if (b <= 1e-13 * scale) {
        breakdown = true;
        break;
      }
      const bool converged = res.residual_min <= rel_tol * std::abs(res.lambda_min) &&
                             res.residual_max <= rel_tol * std::abs(res.lambda_max);
      if (m >= min_steps && converged) break;
      beta.push_back(b);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = w[i] / b;
        av[i] = aw[i] / b;
      }
    }
    if (!breakdown) return res;
    // An invariant subspace from a random start almost surely contains every
    // eigenvalue; accept once two starts agree.
    if (have_previous && std::abs(previous.lambda_min - res.lambda_min) <= 1e-10 * std::abs(res.lambda_max) &&
        std::abs(previous.lambda_max - res.lambda_max) <= 1e-10 * std::abs(res.lambda_max))
      return res;
    previous = res;
    have_previous = true;
  }
  throw NumericalFailure("lanczos_extremes: breakdown after 3 seeded attempts");
}

}  // namespace bpxhd

#pragma once

// BPX preconditioner C = sum_l h_l^2 I_{l->J} M_l^{-1} I_{l->J}^T acting on
// residual vectors of the finest level, preconditioned CG, and condition
// numbers of the (preconditioned) stiffness operator.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bpxhd/errors.hpp"
#include "bpxhd/multilevel.hpp"
#include "bpxhd/spectral.hpp"

namespace bpxhd {

enum class BpxVariant { exact_mass, lumped_mass, diagonal };

inline std::string to_string(BpxVariant v) {
  switch (v) {
    case BpxVariant::exact_mass: return "exact_mass";
    case BpxVariant::lumped_mass: return "lumped_mass";
    case BpxVariant::diagonal: return "diagonal";
  }
  return "?";
}

/// Accepts the short CLI spellings as well as the full names.
inline std::optional<BpxVariant> parse_variant(const std::string& s) {
  if (s == "exact" || s == "exact_mass") return BpxVariant::exact_mass;
  if (s == "lumped" || s == "lumped_mass") return BpxVariant::lumped_mass;
  if (s == "diag" || s == "diagonal") return BpxVariant::diagonal;
  return std::nullopt;
}

class BpxOperator {
 public:
  BpxOperator(const Hierarchy& h, BpxVariant variant) : h_(&h), variant_(variant) {}

  BpxVariant variant() const { return variant_; }
  const Hierarchy& hierarchy() const { return *h_; }
  Index size() const { return h_->finest().size(); }
  double scale(int l) const { return h_->h(l) * h_->h(l); }

  /// Restrict level by level, scale by h_l^2 times the level mass inverse,
  /// then prolong and accumulate from coarse to fine.
  Vector apply(std::span<const double> r) const {
    const int levels = h_->num_levels();
    if (static_cast<Index>(r.size()) != size()) throw std::invalid_argument("BpxOperator: residual has wrong length");
    std::vector<Vector> res(static_cast<std::size_t>(levels));
    res.back().assign(r.begin(), r.end());
    for (int l = levels - 1; l >= 1; --l)
      res[static_cast<std::size_t>(l - 1)] = h_->restrict_to(l, res[static_cast<std::size_t>(l)]);
    Vector y;
    for (int l = 1; l <= levels; ++l) {
      Vector z = level_solve(l, res[static_cast<std::size_t>(l - 1)]);
      const double s = scale(l);
      if (l == 1) {
        y.assign(z.size(), 0.0);
      } else {
        y = h_->prolong(l - 1, y);
      }
      for (std::size_t i = 0; i < z.size(); ++i) y[i] += s * z[i];
    }
    return y;
  }

  LinearAction action() const {
    return [this](std::span<const double> x, std::span<double> y) {
      const Vector z = apply(x);
      std::copy(z.begin(), z.end(), y.begin());
    };
  }

 private:
  Vector level_solve(int l, const Vector& r) const {
    const Level& lev = h_->level(l);
    if (variant_ == BpxVariant::exact_mass) return lev.mass_solver.solve(r);
    const Vector& d = variant_ == BpxVariant::lumped_mass ? lev.lumped_mass : lev.mass_diagonal;
    Vector z(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / d[i];
    return z;
  }

  const Hierarchy* h_;
  BpxVariant variant_;
};

inline Vector apply_bpx(const BpxOperator& b, std::span<const double> r) { return b.apply(r); }

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  double wall_seconds = 0.0;
  std::string variant = "none";
  int d = 0;
  int levels = 0;
  bool converged = false;
};

struct PcgResult {
  Vector solution;
  SolveReport report;
};

/// Preconditioned CG from x = 0. Stops when sqrt(r^T z / r0^T z0) <= tol
/// (z = C r, or z = r without preconditioner).
inline PcgResult pcg(const LinearAction& a, std::span<const double> f, const LinearAction& precond, double tol,
                     int max_iter) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("pcg: tolerance must lie in (0, 1)");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = f.size();
  PcgResult out;
  Vector& x = out.solution;
  x.assign(n, 0.0);
  Vector r(f.begin(), f.end()), z(n), p(n), ap(n);
  auto precondition = [&]() {
    if (precond) precond(r, z);
    else z = r;
  };
  precondition();
  double rz = dot(r, z);
  const double rz0 = rz;
  auto& rep = out.report;
  auto finish = [&]() {
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  };
  if (rz0 == 0.0) {
    rep.converged = true;
    return finish();
  }
  if (rz0 < 0.0) throw NumericalFailure("pcg: preconditioner is not positive definite at step 0");
  p = z;
  for (int k = 1; k <= max_iter; ++k) {
    a(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw NumericalFailure("pcg: operator is not positive definite at step " + std::to_string(k));
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    precondition();
    const double rz_new = dot(r, z);
    if (rz_new < 0.0) throw NumericalFailure("pcg: preconditioner is not positive definite at step " + std::to_string(k));
    rep.iterations = k;
    rep.relative_residual = std::sqrt(rz_new / rz0);
    if (rep.relative_residual <= tol) {
      rep.converged = true;
      return finish();
    }
    const double beta = rz_new / rz;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }
  return finish();
}

/// PCG on the finest-level stiffness of a hierarchy; `b` may be null.
inline PcgResult pcg(const Hierarchy& h, std::span<const double> f, const BpxOperator* b, double tol, int max_iter) {
  const SparseMatrix& a = h.finest().stiffness;
  PcgResult res = pcg(as_action(a), f, b ? b->action() : LinearAction{}, tol, max_iter);
  res.report.variant = b ? to_string(b->variant()) : "none";
  res.report.d = h.dim();
  res.report.levels = h.num_levels();
  return res;
}

enum class EigMethod { dense, lanczos };

inline std::string to_string(EigMethod m) { return m == EigMethod::dense ? "dense" : "lanczos"; }

struct KappaResult {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  EigMethod method = EigMethod::dense;
  int steps = 0;  // Lanczos steps (0 for dense)
  double residual = 0.0;
  std::uint64_t seed = 0;
};

/// Dense when the finest level has at most kDenseLimit free dofs, else Lanczos.
inline EigMethod default_method(const Hierarchy& h) {
  return h.finest().size() <= kDenseLimit ? EigMethod::dense : EigMethod::lanczos;
}

/// Extreme eigenvalues of C A (or of A when `b` is null) on the finest level.
inline KappaResult kappa(const Hierarchy& h, const BpxOperator* b, EigMethod method, std::uint64_t seed = 0) {
  const SparseMatrix& a = h.finest().stiffness;
  const Index n = a.rows();
  KappaResult out;
  out.method = method;
  out.seed = seed;
  if (method == EigMethod::dense) {
    if (n > kDenseLimit)
      throw std::invalid_argument("kappa: " + std::to_string(n) + " dofs exceed the dense limit " +
                                  std::to_string(kDenseLimit));
    const Eigen::MatrixXd ad = a.to_dense();
    Eigen::VectorXd ev;
    if (b) {
      ev = dense_product_eig(ad, materialize(b->action(), n));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ad, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) throw NumericalFailure("kappa: eigensolver failed");
      ev = es.eigenvalues();
    }
    out.lambda_min = ev(0);
    out.lambda_max = ev(ev.size() - 1);
  } else {
    OperatorPair p{as_action(a), b ? b->action() : LinearAction{}, n};
    const LanczosResult lr = lanczos_extremes(p, 100, seed, 600, 1e-9);
    out.lambda_min = lr.lambda_min;
    out.lambda_max = lr.lambda_max;
    out.steps = lr.steps;
    out.residual = std::max(lr.residual_min / std::abs(lr.lambda_min), lr.residual_max / std::abs(lr.lambda_max));
  }
  if (!(out.lambda_min > 0.0)) throw NumericalFailure("kappa: smallest eigenvalue is not positive");
  out.kappa = out.lambda_max / out.lambda_min;
  return out;
}

/// <C^{-1} v, v> through an inner CG solve with C.
inline double psc_quadratic_form(const BpxOperator& b, std::span<const double> v, double tol = 1e-14) {
  if (b.variant() != BpxVariant::exact_mass) throw std::invalid_argument("psc_quadratic_form: needs exact_mass");
  const PcgResult r = pcg(b.action(), v, LinearAction{}, tol, 10 * static_cast<int>(v.size()) + 100);
  if (!r.report.converged) throw NumericalFailure("psc_quadratic_form: inner solve did not converge");
  return dot(r.solution, v);
}

// --- spectra table --------------------------------------------------------------

struct SpectrumRow {
  int d = 0;
  int levels = 0;
  std::string variant;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
  std::string method;
};

inline void write_spectra_header(std::ostream& os) { os << "d,J,variant,lambda_min,lambda_max,kappa,method\n"; }

inline void write_spectra_row(std::ostream& os, const SpectrumRow& r) {
  const auto old = os.precision(17);
  os << r.d << ',' << r.levels << ',' << r.variant << ',' << r.lambda_min << ',' << r.lambda_max << ',' << r.kappa << ','
     << r.method << '\n';
  os.precision(old);
}

}  // namespace bpxhd

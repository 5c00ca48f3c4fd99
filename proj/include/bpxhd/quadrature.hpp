#pragma once

// Grundmann-Moller quadrature on k-simplices of arbitrary dimension.
//
// The rule of degree 2s+1 on a k-simplex is
//   sum_{i=0}^{s} (-1)^i 2^{-2s} (deg+k-2i)^deg / (i! (deg+k-i)!) sum_{|beta|=s-i} f(x_beta)
// with barycentric nodes x_beta = (2 beta + 1) / (deg + k - 2i), beta in N^{k+1}.
// Weights here are normalized to sum to one, so an integral is |K| * sum w_q f(x_q).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

#include "bpxhd/simplex.hpp"

namespace bpxhd {

struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  /// Barycentric coordinates, one column per node ((dim+1) x nodes).
  Eigen::MatrixXd barycentric;
  /// Normalized weights (sum to 1).
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(weights.size()); }
};

namespace detail {

// Calls f(beta) for every beta in N^{parts} with |beta| = total.
inline void for_each_composition(int parts, int total, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> beta(static_cast<std::size_t>(parts), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == parts - 1) {
      beta[static_cast<std::size_t>(pos)] = left;
      f(beta);
      return;
    }
    for (int b = left; b >= 0; --b) {
      beta[static_cast<std::size_t>(pos)] = b;
      rec(pos + 1, left - b);
    }
  };
  rec(0, total);
}

}  // namespace detail

/// Grundmann-Moller rule exact for polynomials of total degree <= `degree` on a
/// `dim`-simplex. Even degrees are rounded up to the next odd one.
inline QuadratureRule grundmann_moller(int dim, int degree) {
  if (dim < 0 || degree < 0) throw std::invalid_argument("grundmann_moller: negative dimension or degree");
  QuadratureRule rule;
  rule.dim = dim;
  const int s = degree / 2;
  const int deg = 2 * s + 1;
  rule.degree = deg;
  if (dim == 0) {
    rule.barycentric = Eigen::MatrixXd::Ones(1, 1);
    rule.weights = Eigen::VectorXd::Ones(1);
    return rule;
  }
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> weights;
  const double norm = factorial(dim);  // reference volume is 1/dim!
  for (int i = 0; i <= s; ++i) {
    const double denom = deg + dim - 2 * i;
    double w = std::pow(2.0, -2 * s) * std::pow(denom, deg) / (factorial(i) * factorial(deg + dim - i));
    if (i % 2 == 1) w = -w;
    w *= norm;
    detail::for_each_composition(dim + 1, s - i, [&](const std::vector<int>& beta) {
      Eigen::VectorXd lam(dim + 1);
      for (int j = 0; j <= dim; ++j) lam(j) = (2.0 * beta[static_cast<std::size_t>(j)] + 1.0) / denom;
      nodes.push_back(std::move(lam));
      weights.push_back(w);
    });
  }
  rule.barycentric.resize(dim + 1, static_cast<Eigen::Index>(nodes.size()));
  rule.weights.resize(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    rule.barycentric.col(static_cast<Eigen::Index>(q)) = nodes[q];
    rule.weights(static_cast<Eigen::Index>(q)) = weights[q];
  }
  return rule;
}

/// Integral over `s` of f(x, lambda) where x is the physical point and lambda its
/// barycentric coordinates.
template <class F>
double integrate(const Simplex& s, const QuadratureRule& rule, F&& f) {
  if (rule.dim != s.dim()) throw std::invalid_argument("integrate: rule dimension does not match simplex");
  double acc = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd lam = rule.barycentric.col(q);
    const Point x = s.point_at(lam);
    acc += rule.weights(q) * f(x, lam);
  }
  return s.volume() * acc;
}

}  // namespace bpxhd

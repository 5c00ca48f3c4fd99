#pragma once

// Compressed sparse row matrix built from (row, col, value) triplets.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bpxhd/errors.hpp"

namespace bpxhd {

using Vector = std::vector<double>;

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  double value;
};

class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Finalizes triplets: sorts by (row, col) and sums duplicates with compensated
  /// summation in a fixed order, so the result does not depend on insertion order
  /// beyond the order of equal-key values.
  static SparseMatrix from_triplets(std::int64_t nrows, std::int64_t ncols, std::vector<Triplet> triplets,
                                    bool symmetric = false) {
    for (const auto& t : triplets)
      if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols)
        throw DomainError("SparseMatrix: triplet index out of range");
    std::stable_sort(triplets.begin(), triplets.end(),
                     [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    SparseMatrix m;
    m.nrows_ = nrows;
    m.ncols_ = ncols;
    m.symmetric_ = symmetric;
    m.row_ptr_.assign(static_cast<std::size_t>(nrows) + 1, 0);
    for (std::size_t i = 0; i < triplets.size();) {
      std::size_t j = i;
      // Neumaier summation over the run of equal keys.
      double sum = 0.0, comp = 0.0;
      for (; j < triplets.size() && triplets[j].row == triplets[i].row && triplets[j].col == triplets[i].col; ++j) {
        const double v = triplets[j].value;
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
      }
      m.cols_.push_back(triplets[i].col);
      m.vals_.push_back(sum + comp);
      ++m.row_ptr_[static_cast<std::size_t>(triplets[i].row) + 1];
      i = j;
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(nrows); ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  static SparseMatrix identity(std::int64_t n) {
    std::vector<Triplet> t;
    for (std::int64_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t), true);
  }

  std::int64_t rows() const { return nrows_; }
  std::int64_t cols() const { return ncols_; }
  std::size_t nonzeros() const { return vals_.size(); }
  bool symmetric() const { return symmetric_; }

  const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::int64_t>& col_idx() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

  double coeff(std::int64_t r, std::int64_t c) const {
    const auto begin = cols_.begin() + row_ptr_[static_cast<std::size_t>(r)];
    const auto end = cols_.begin() + row_ptr_[static_cast<std::size_t>(r) + 1];
    const auto it = std::lower_bound(begin, end, c);
    return (it != end && *it == c) ? vals_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    check_size(x.size() == static_cast<std::size_t>(ncols_) && y.size() == static_cast<std::size_t>(nrows_));
    for (std::int64_t r = 0; r < nrows_; ++r) {
      double acc = 0.0;
      for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
        acc += vals_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
      y[static_cast<std::size_t>(r)] = acc;
    }
  }

  Vector operator*(std::span<const double> x) const {
    Vector y(static_cast<std::size_t>(nrows_));
    multiply(x, y);
    return y;
  }

  /// y = A^T x
  Vector transpose_multiply(std::span<const double> x) const {
    check_size(x.size() == static_cast<std::size_t>(nrows_));
    Vector y(static_cast<std::size_t>(ncols_), 0.0);
    for (std::int64_t r = 0; r < nrows_; ++r) {
      const double xr = x[static_cast<std::size_t>(r)];
      for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
        y[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])] += vals_[static_cast<std::size_t>(k)] * xr;
    }
    return y;
  }

  SparseMatrix transpose() const {
    std::vector<Triplet> t;
    t.reserve(vals_.size());
    for_each([&](std::int64_t r, std::int64_t c, double v) { t.push_back({c, r, v}); });
    return from_triplets(ncols_, nrows_, std::move(t), symmetric_);
  }

  /// Row sums.
  Vector row_sums() const {
    Vector s(static_cast<std::size_t>(nrows_), 0.0);
    for_each([&](std::int64_t r, std::int64_t, double v) { s[static_cast<std::size_t>(r)] += v; });
    return s;
  }

  Vector diagonal() const {
    Vector d(static_cast<std::size_t>(std::min(nrows_, ncols_)), 0.0);
    for_each([&](std::int64_t r, std::int64_t c, double v) {
      if (r == c) d[static_cast<std::size_t>(r)] = v;
    });
    return d;
  }

  /// max |A - A^T|
  double asymmetry() const {
    double worst = 0.0;
    for_each([&](std::int64_t r, std::int64_t c, double v) { worst = std::max(worst, std::abs(v - coeff(c, r))); });
    return worst;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::int64_t r = 0; r < nrows_; ++r)
      for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
        f(r, cols_[static_cast<std::size_t>(k)], vals_[static_cast<std::size_t>(k)]);
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nrows_, ncols_);
    for_each([&](std::int64_t r, std::int64_t c, double v) { d(r, c) = v; });
    return d;
  }

  Eigen::SparseMatrix<double> to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(vals_.size());
    for_each([&](std::int64_t r, std::int64_t c, double v) {
      t.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    });
    Eigen::SparseMatrix<double> m(nrows_, ncols_);
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  /// Product A * B (used for Galerkin checks on small problems).
  SparseMatrix operator*(const SparseMatrix& b) const {
    if (ncols_ != b.nrows_) throw std::invalid_argument("SparseMatrix: product dimension mismatch");
    std::vector<Triplet> t;
    for (std::int64_t r = 0; r < nrows_; ++r)
      for (auto k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
        const auto mid = cols_[static_cast<std::size_t>(k)];
        const double a = vals_[static_cast<std::size_t>(k)];
        for (auto q = b.row_ptr_[static_cast<std::size_t>(mid)]; q < b.row_ptr_[static_cast<std::size_t>(mid) + 1]; ++q)
          t.push_back({r, b.cols_[static_cast<std::size_t>(q)], a * b.vals_[static_cast<std::size_t>(q)]});
      }
    return from_triplets(nrows_, b.ncols_, std::move(t));
  }

 private:
  static void check_size(bool ok) {
    if (!ok) throw std::invalid_argument("SparseMatrix: vector size mismatch");
  }

  std::int64_t nrows_ = 0;
  std::int64_t ncols_ = 0;
  bool symmetric_ = false;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<std::int64_t> cols_;
  std::vector<double> vals_;
};

/// Writes A in MatrixMarket coordinate format. Symmetric matrices store the
/// lower triangle only. Indices are 1-based.
inline void write_matrix_market(const SparseMatrix& a, std::ostream& os) {
  const bool sym = a.symmetric();
  os << "%%MatrixMarket matrix coordinate real " << (sym ? "symmetric" : "general") << '\n';
  std::size_t count = 0;
  a.for_each([&](std::int64_t r, std::int64_t c, double) {
    if (!sym || c <= r) ++count;
  });
  os << a.rows() << ' ' << a.cols() << ' ' << count << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  a.for_each([&](std::int64_t r, std::int64_t c, double v) {
    if (!sym || c <= r) os << r + 1 << ' ' << c + 1 << ' ' << v << '\n';
  });
}

/// Reads a real coordinate MatrixMarket stream (general or symmetric).
inline SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("%%MatrixMarket", 0) != 0)
    throw std::invalid_argument("read_matrix_market: missing banner");
  const bool sym = line.find("symmetric") != std::string::npos;
  if (line.find("coordinate") == std::string::npos) throw std::invalid_argument("read_matrix_market: not coordinate");
  while (std::getline(is, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream header(line);
  std::int64_t nr = 0, nc = 0, nnz = 0;
  if (!(header >> nr >> nc >> nnz)) throw std::invalid_argument("read_matrix_market: bad size line");
  std::vector<Triplet> t;
  for (std::int64_t k = 0; k < nnz; ++k) {
    std::int64_t r = 0, c = 0;
    double v = 0.0;
    if (!(is >> r >> c >> v)) throw std::invalid_argument("read_matrix_market: truncated entries");
    t.push_back({r - 1, c - 1, v});
    if (sym && r != c) t.push_back({c - 1, r - 1, v});
  }
  return SparseMatrix::from_triplets(nr, nc, std::move(t), sym);
}

}  // namespace bpxhd

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hypstab {

using SparseCsr = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Thrown when a linear solve cannot meet its residual contract (singular
// factorization or stalled refinement). Carries the relative residual that
// was achieved, so callers can tabulate failures instead of masking them.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), residual(achieved_residual) {}
  double residual = 0.0;
};

// Sparse operator in compressed row storage: per-row sorted, duplicate-free
// column indices with finite values. Assembled from (possibly duplicated)
// triplets which are summed.
class AssembledOperator {
 public:
  AssembledOperator() = default;

  AssembledOperator(int rows, int cols, const std::vector<Triplet>& triplets)
      : mat_(rows, cols) {
    mat_.setFromTriplets(triplets.begin(), triplets.end());
    mat_.makeCompressed();
    for (int k = 0; k < mat_.nonZeros(); ++k)
      if (!std::isfinite(mat_.valuePtr()[k]))
        throw std::runtime_error("AssembledOperator: non-finite entry");
  }

  [[nodiscard]] int rows() const { return static_cast<int>(mat_.rows()); }
  [[nodiscard]] int cols() const { return static_cast<int>(mat_.cols()); }
  [[nodiscard]] long nonzeros() const { return mat_.nonZeros(); }
  [[nodiscard]] bool empty() const { return mat_.rows() == 0; }

  [[nodiscard]] const SparseCsr& matrix() const { return mat_; }

  // Raw CSR views (valid while the operator lives).
  [[nodiscard]] const int* row_offsets() const { return mat_.outerIndexPtr(); }
  [[nodiscard]] const int* col_indices() const { return mat_.innerIndexPtr(); }
  [[nodiscard]] const double* values() const { return mat_.valuePtr(); }

  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return mat_ * x;
  }

  [[nodiscard]] double coeff(int i, int j) const { return mat_.coeff(i, j); }

  explicit AssembledOperator(SparseCsr m) : mat_(std::move(m)) {
    mat_.makeCompressed();
  }

 private:
  SparseCsr mat_;
};

inline AssembledOperator add(const AssembledOperator& a,
                             const AssembledOperator& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("add: operator shapes differ");
  return AssembledOperator(SparseCsr(a.matrix() + b.matrix()));
}

// Direct sparse LU solve with iterative refinement. The contract is a
// relative residual ||Mx-b|| <= tol*||b|| (absolute when b = 0); violations
// throw SolveError rather than returning a silently bad vector.
inline Eigen::VectorXd solve(const AssembledOperator& op,
                             const Eigen::VectorXd& b, double tol = 1e-12) {
  if (op.rows() != op.cols())
    throw std::invalid_argument("solve: operator must be square");
  if (b.size() != op.rows())
    throw std::invalid_argument("solve: dimension mismatch");

  Eigen::SparseMatrix<double> col_major(op.matrix());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(col_major);
  lu.factorize(col_major);
  if (lu.info() != Eigen::Success)
    throw SolveError("solve: sparse LU factorization failed (singular or "
                     "numerically rank-deficient matrix)",
                     std::numeric_limits<double>::infinity());

  const double bnorm = b.norm();
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  Eigen::VectorXd x = lu.solve(b);
  double res = (op.apply(x) - b).norm() / scale;
  for (int pass = 0; pass < 3 && res > tol; ++pass) {
    const Eigen::VectorXd r = b - op.apply(x);
    x += lu.solve(r);
    res = (op.apply(x) - b).norm() / scale;
  }
  if (!(res <= tol))
    throw SolveError("solve: residual contract violated, achieved relative "
                     "residual " + std::to_string(res),
                     res);
  return x;
}

// Monolithic two-field operator
//   [ A    Sa ]
//   [ -Sp  A^T ]
// with the primal unknowns first. All blocks must be square of equal size.
inline AssembledOperator compose_block(const AssembledOperator& a,
                                       const AssembledOperator& sa,
                                       const AssembledOperator& sp) {
  const int n = a.rows();
  if (a.cols() != n || sa.rows() != n || sa.cols() != n || sp.rows() != n ||
      sp.cols() != n)
    throw std::invalid_argument("compose_block: blocks must be square, equal size");

  std::vector<Triplet> tris;
  tris.reserve(static_cast<std::size_t>(2 * a.nonzeros() + sa.nonzeros() +
                                        sp.nonzeros()));
  const auto& am = a.matrix();
  for (int i = 0; i < n; ++i)
    for (SparseCsr::InnerIterator it(am, i); it; ++it) {
      tris.emplace_back(i, static_cast<int>(it.col()), it.value());       // A
      tris.emplace_back(n + static_cast<int>(it.col()), n + i, it.value());  // A^T
    }
  const auto& sam = sa.matrix();
  for (int i = 0; i < n; ++i)
    for (SparseCsr::InnerIterator it(sam, i); it; ++it)
      tris.emplace_back(i, n + static_cast<int>(it.col()), it.value());
  const auto& spm = sp.matrix();
  for (int i = 0; i < n; ++i)
    for (SparseCsr::InnerIterator it(spm, i); it; ++it)
      tris.emplace_back(n + i, static_cast<int>(it.col()), -it.value());
  return AssembledOperator(2 * n, 2 * n, tris);
}

// Coordinate-format Matrix Market dump for external inspection.
inline void write_matrix_market(const AssembledOperator& op,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << op.rows() << " " << op.cols() << " " << op.nonzeros() << "\n";
  char buf[64];
  const auto& m = op.matrix();
  for (int i = 0; i < m.rows(); ++i)
    for (SparseCsr::InnerIterator it(m, i); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.16e\n", i + 1,
                    static_cast<int>(it.col()) + 1, it.value());
      out << buf;
    }
}

}  // namespace hypstab

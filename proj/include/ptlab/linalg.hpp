#pragma once

// Dense linear algebra over a Field.

#include <optional>
#include <utility>
#include <vector>

#include "ptlab/errors.hpp"
#include "ptlab/field.hpp"

namespace ptlab {

class Matrix {
 public:
  Matrix() = default;
  Matrix(Field F, int rows, int cols) : F_(std::move(F)), rows_(rows), cols_(cols), a_(rows * cols, FieldElem{0}) {}

  static Matrix identity(const Field& F, int n) {
    Matrix M(F, n, n);
    for (int i = 0; i < n; ++i) M(i, i) = F.one();
    return M;
  }

  const Field& field() const { return F_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  FieldElem& operator()(int i, int j) { return a_[i * cols_ + j]; }
  FieldElem operator()(int i, int j) const { return a_[i * cols_ + j]; }

  friend bool operator==(const Matrix& A, const Matrix& B) {
    return A.rows_ == B.rows_ && A.cols_ == B.cols_ && A.a_ == B.a_;
  }

  Matrix operator*(const Matrix& B) const {
    PTLAB_REQUIRE(cols_ == B.rows_, "matrix shape mismatch");
    Matrix C(F_, rows_, B.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        FieldElem a = (*this)(i, k);
        if (!a.lanes) continue;
        for (int j = 0; j < B.cols_; ++j) C(i, j) = F_.add(C(i, j), F_.mul(a, B(k, j)));
      }
    return C;
  }

  std::vector<FieldElem> apply(const std::vector<FieldElem>& x) const {
    PTLAB_REQUIRE(static_cast<int>(x.size()) == cols_, "vector length mismatch");
    std::vector<FieldElem> y(rows_, F_.zero());
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) y[i] = F_.add(y[i], F_.mul((*this)(i, j), x[j]));
    return y;
  }

  Matrix transpose() const {
    Matrix T(F_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) T(j, i) = (*this)(i, j);
    return T;
  }

 private:
  Field F_;
  int rows_ = 0, cols_ = 0;
  std::vector<FieldElem> a_;
};

namespace linalg {

/// Row-reduces in place; returns the pivot columns.
inline std::vector<int> row_reduce(Matrix& A) {
  const Field& F = A.field();
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < A.cols() && row < A.rows(); ++col) {
    int piv = -1;
    for (int i = row; i < A.rows(); ++i)
      if (A(i, col).lanes) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    for (int j = 0; j < A.cols(); ++j) std::swap(A(row, j), A(piv, j));
    FieldElem s = F.inv(A(row, col));
    for (int j = 0; j < A.cols(); ++j) A(row, j) = F.mul(A(row, j), s);
    for (int i = 0; i < A.rows(); ++i) {
      if (i == row || !A(i, col).lanes) continue;
      FieldElem f = A(i, col);
      for (int j = 0; j < A.cols(); ++j) A(i, j) = F.sub(A(i, j), F.mul(f, A(row, j)));
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline int rank(Matrix A) { return static_cast<int>(row_reduce(A).size()); }

inline FieldElem det(Matrix A) {
  PTLAB_REQUIRE(A.rows() == A.cols(), "determinant of a non-square matrix");
  const Field& F = A.field();
  const int n = A.rows();
  FieldElem d = F.one();
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int i = col; i < n; ++i)
      if (A(i, col).lanes) {
        piv = i;
        break;
      }
    if (piv < 0) return F.zero();
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(A(col, j), A(piv, j));
      d = F.neg(d);
    }
    d = F.mul(d, A(col, col));
    FieldElem s = F.inv(A(col, col));
    for (int i = col + 1; i < n; ++i) {
      if (!A(i, col).lanes) continue;
      FieldElem f = F.mul(A(i, col), s);
      for (int j = col; j < n; ++j) A(i, j) = F.sub(A(i, j), F.mul(f, A(col, j)));
    }
  }
  return d;
}

inline std::optional<Matrix> inverse(const Matrix& A) {
  PTLAB_REQUIRE(A.rows() == A.cols(), "inverse of a non-square matrix");
  const int n = A.rows();
  Matrix aug(A.field(), n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = A(i, j);
    aug(i, n + i) = A.field().one();
  }
  auto piv = row_reduce(aug);
  if (static_cast<int>(piv.size()) < n || piv[n - 1] != n - 1) return std::nullopt;
  Matrix inv(A.field(), n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

/// Some solution of A x = b, or nullopt when inconsistent. Free variables are set to zero.
inline std::optional<std::vector<FieldElem>> solve(const Matrix& A, const std::vector<FieldElem>& b) {
  PTLAB_REQUIRE(static_cast<int>(b.size()) == A.rows(), "right-hand side length mismatch");
  const Field& F = A.field();
  Matrix aug(F, A.rows(), A.cols() + 1);
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) aug(i, j) = A(i, j);
    aug(i, A.cols()) = b[i];
  }
  auto piv = row_reduce(aug);
  if (!piv.empty() && piv.back() == A.cols()) return std::nullopt;
  std::vector<FieldElem> x(A.cols(), F.zero());
  for (std::size_t r = 0; r < piv.size(); ++r) x[piv[r]] = aug(static_cast<int>(r), A.cols());
  return x;
}

/// Congruence diagonalization of a symmetric matrix: P^T B P = diag(d), P invertible.
struct Diagonalization {
  std::vector<FieldElem> diag;  // all entries, zeros included
  Matrix P;
  int rank = 0;
};

inline Diagonalization diagonalize_symmetric(Matrix B) {
  const Field& F = B.field();
  const int n = B.rows();
  PTLAB_REQUIRE(n == B.cols(), "symmetric matrix expected");
  Matrix P = Matrix::identity(F, n);
  auto add_col_row = [&](int dst, int src, FieldElem f) {
    // B <- E^T B E with E = I + f e_src e_dst^T (adds f * column src to column dst).
    for (int i = 0; i < n; ++i) B(i, dst) = F.add(B(i, dst), F.mul(f, B(i, src)));
    for (int j = 0; j < n; ++j) B(dst, j) = F.add(B(dst, j), F.mul(f, B(src, j)));
    for (int i = 0; i < n; ++i) P(i, dst) = F.add(P(i, dst), F.mul(f, P(i, src)));
  };
  auto swap_idx = [&](int a, int b) {
    if (a == b) return;
    for (int i = 0; i < n; ++i) std::swap(B(i, a), B(i, b));
    for (int j = 0; j < n; ++j) std::swap(B(a, j), B(b, j));
    for (int i = 0; i < n; ++i) std::swap(P(i, a), P(i, b));
  };
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    for (int i = k; i < n; ++i)
      if (B(i, i).lanes) {
        piv = i;
        break;
      }
    if (piv < 0) {
      int pi = -1, pj = -1;
      for (int i = k; i < n && pi < 0; ++i)
        for (int j = i + 1; j < n; ++j)
          if (B(i, j).lanes) {
            pi = i;
            pj = j;
            break;
          }
      if (pi < 0) break;
      add_col_row(pi, pj, F.one());  // B(pi,pi) becomes 2 B(pi,pj) != 0
      piv = pi;
    }
    swap_idx(k, piv);
    FieldElem s = F.inv(B(k, k));
    for (int j = k + 1; j < n; ++j) {
      if (!B(k, j).lanes) continue;
      add_col_row(j, k, F.neg(F.mul(B(k, j), s)));
    }
  }
  Diagonalization out{{}, P, 0};
  for (int i = 0; i < n; ++i) {
    out.diag.push_back(B(i, i));
    if (B(i, i).lanes) ++out.rank;
  }
  return out;
}

/// An invertible matrix whose last column is the nonzero vector s.
inline Matrix complete_with_last_column(const Field& F, const std::vector<FieldElem>& s) {
  const int n = static_cast<int>(s.size());
  int piv = -1;
  for (int i = n - 1; i >= 0; --i)
    if (s[i].lanes) {
      piv = i;
      break;
    }
  PTLAB_REQUIRE(piv >= 0, "zero vector cannot be completed to a basis");
  Matrix M(F, n, n);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (i == piv) continue;
    M(i, col++) = F.one();
  }
  for (int i = 0; i < n; ++i) M(i, n - 1) = s[i];
  return M;
}

}  // namespace linalg
}  // namespace ptlab

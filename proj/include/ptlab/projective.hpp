#pragma once

// Canonical representatives of P^n(F_q): the first nonzero coordinate is 1.
//
// Points are indexed in blocks by the position of the leading 1 (position 0 first).
// Inside a block the free trailing coordinates run as a mixed-radix counter over
// Field::index, with the last coordinate varying fastest.

#include <cstdint>
#include <vector>

#include "ptlab/errors.hpp"
#include "ptlab/field.hpp"

namespace ptlab {

using Point = std::vector<FieldElem>;

/// #P^n(F_q) = (q^{n+1} - 1) / (q - 1); zero for n < 0.
inline std::uint64_t projective_size(std::uint64_t q, int n) {
  if (n < 0) return 0;
  std::uint64_t total = 0, pw = 1;
  for (int i = 0; i <= n; ++i) {
    PTLAB_REQUIRE(total <= UINT64_MAX - pw, "projective space too large");
    total += pw;
    if (i < n) {
      PTLAB_REQUIRE(pw <= UINT64_MAX / q, "projective space too large");
      pw *= q;
    }
  }
  return total;
}

/// Same as projective_size but in floating point, for budget estimates.
inline double projective_size_approx(double q, int n) {
  if (n < 0) return 0;
  double total = 0, pw = 1;
  for (int i = 0; i <= n; ++i, pw *= q) total += pw;
  return total;
}

class ProjectiveSpace {
 public:
  ProjectiveSpace(Field F, int n) : F_(std::move(F)), n_(n) {
    PTLAB_REQUIRE(n >= 0, "projective dimension must be nonnegative");
    size_ = projective_size(F_.q(), n);
  }

  const Field& field() const { return F_; }
  int dim() const { return n_; }
  std::uint64_t size() const { return size_; }

  /// Number of points whose leading 1 is at position b.
  std::uint64_t block_size(int b) const { return checked_pow(F_.q(), n_ - b); }

  Point point(std::uint64_t idx) const {
    PTLAB_REQUIRE(idx < size_, "projective index out of range");
    Point x(n_ + 1, F_.zero());
    int b = 0;
    for (;; ++b) {
      std::uint64_t bs = block_size(b);
      if (idx < bs) break;
      idx -= bs;
    }
    x[b] = F_.one();
    for (int i = n_; i > b; --i) {
      x[i] = F_.from_index(idx % F_.q());
      idx /= F_.q();
    }
    return x;
  }

  /// Index of the class of a nonzero vector (normalized first).
  std::uint64_t index(const Point& v) const {
    PTLAB_REQUIRE(static_cast<int>(v.size()) == n_ + 1, "coordinate count mismatch");
    Point x = normalize(F_, v);
    std::uint64_t idx = 0;
    int b = 0;
    while (x[b].lanes == 0) idx += block_size(b++);
    std::uint64_t local = 0;
    for (int i = b + 1; i <= n_; ++i) local = local * F_.q() + F_.index(x[i]);
    return idx + local;
  }

  /// Scales v so that its first nonzero coordinate is 1.
  static Point normalize(const Field& F, Point v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].lanes != 0) {
        FieldElem s = F.inv(v[i]);
        for (std::size_t j = i; j < v.size(); ++j) v[j] = F.mul(v[j], s);
        return v;
      }
    }
    throw PreconditionError("the zero vector has no projective class");
  }

  /// Index order on classes, usable when the space is too large to index.
  static bool index_less(const Field& F, const Point& a, const Point& b) {
    Point x = normalize(F, a), y = normalize(F, b);
    std::size_t la = 0, lb = 0;
    while (x[la].lanes == 0) ++la;
    while (y[lb].lanes == 0) ++lb;
    if (la != lb) return la < lb;
    for (std::size_t i = la + 1; i < x.size(); ++i) {
      auto u = F.index(x[i]), v = F.index(y[i]);
      if (u != v) return u < v;
    }
    return false;
  }

  static bool is_canonical(const Field& F, const Point& v) {
    for (auto x : v) {
      if (x.lanes == 0) continue;
      return x == F.one();
    }
    return false;
  }

  /// Odometer over a contiguous index range.
  class Cursor {
   public:
    Cursor(const ProjectiveSpace& S, std::uint64_t begin, std::uint64_t end) : S_(&S), pos_(begin), end_(end) {
      if (pos_ < end_) {
        x_ = S.point(pos_);
        lead_ = 0;
        while (x_[lead_].lanes == 0) ++lead_;
        digits_.assign(x_.size(), 0);
        for (std::size_t i = 0; i < x_.size(); ++i) digits_[i] = S.F_.index(x_[i]);
      }
    }
    bool done() const { return pos_ >= end_; }
    const Point& point() const { return x_; }
    std::uint64_t index() const { return pos_; }

    void next() {
      ++pos_;
      if (pos_ >= end_) return;
      const int n = S_->n_;
      const std::uint64_t q = S_->F_.q();
      int i = n;
      while (i > lead_) {
        if (++digits_[i] < q) {
          x_[i] = S_->F_.from_index(digits_[i]);
          return;
        }
        digits_[i] = 0;
        x_[i] = S_->F_.zero();
        --i;
      }
      // Block exhausted: move the leading 1 one position right.
      x_[lead_] = S_->F_.zero();
      digits_[lead_] = 0;
      ++lead_;
      x_[lead_] = S_->F_.one();
      digits_[lead_] = 1;
    }

   private:
    const ProjectiveSpace* S_;
    std::uint64_t pos_, end_;
    Point x_;
    std::vector<std::uint64_t> digits_;
    int lead_ = 0;
  };

  Cursor cursor(std::uint64_t begin = 0) const { return Cursor(*this, begin, size_); }
  Cursor cursor(std::uint64_t begin, std::uint64_t end) const { return Cursor(*this, begin, end); }

 private:
  Field F_;
  int n_;
  std::uint64_t size_;
};

}  // namespace ptlab

#pragma once

// Geometry of the Fermat cubic fourfold x_1^3 + ... + x_6^3 = 0: tangential visions,
// their singular points, the rich-configuration enumeration and a scroll screener.

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ptlab/errors.hpp"
#include "ptlab/field.hpp"
#include "ptlab/forms.hpp"
#include "ptlab/solver.hpp"
#include "ptlab/univariate.hpp"

namespace ptlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct VisionTriple {
  Form f1, f2, f3;  // in y_1..y_5
};

inline FieldElem fermat_value(const Field& K, const std::vector<FieldElem>& a) {
  FieldElem s = K.zero();
  for (auto x : a) s = K.add(s, K.mul(K.sqr(x), x));
  return s;
}

/// (3 sum a_i^2 y_i, 3 sum a_i y_i^2, sum y_i^3), i = 1..5, for a point a of V with a_6 != 0.
inline VisionTriple tangential_vision(const Field& K, const std::vector<FieldElem>& a) {
  PTLAB_REQUIRE(a.size() == 6, "a point of P^5 is expected");
  PTLAB_REQUIRE(fermat_value(K, a).lanes == 0, "the point is not on the Fermat fourfold");
  PTLAB_REQUIRE(a[5].lanes != 0, "a_6 must be nonzero; permute coordinates first");
  VisionTriple v{Form(K, 5, 1), Form(K, 5, 2), Form(K, 5, 3)};
  for (int i = 0; i < 5; ++i) {
    v.f1.add_term(monomial_var(i), K.mul_int(K.sqr(a[i]), 3));
    v.f2.add_term(monomial_var(i, 2), K.mul_int(a[i], 3));
    v.f3.add_term(monomial_var(i, 3), K.one());
  }
  return v;
}

struct VisionReport {
  int n = 0;
  std::vector<unsigned> zero_subsets;  // bitmasks over the six coordinates
  bool applicable = false;             // n in {4, 5}
  int sing_count = -1;                 // formula value when applicable
};

inline int nonzero_dimension(const std::vector<FieldElem>& a) {
  int nz = 0;
  for (auto x : a) nz += x.lanes != 0;
  return nz - 1;
}

/// -1 + 2^{n-6} #{I subset [6] : sum_{i in I} a_i^3 = 0}.
inline VisionReport vision_sing_count(const Field& K, const std::vector<FieldElem>& a) {
  PTLAB_REQUIRE(a.size() == 6, "a point of P^5 is expected");
  PTLAB_REQUIRE(K.p() != 2 && K.p() != 3, "characteristic must not divide 6");
  PTLAB_REQUIRE(fermat_value(K, a).lanes == 0, "the point is not on the Fermat fourfold");
  VisionReport r;
  r.n = nonzero_dimension(a);
  std::array<FieldElem, 6> cube;
  for (int i = 0; i < 6; ++i) cube[i] = K.mul(K.sqr(a[i]), a[i]);
  for (unsigned mask = 0; mask < 64; ++mask) {
    FieldElem s = K.zero();
    for (int i = 0; i < 6; ++i)
      if (mask >> i & 1) s = K.add(s, cube[i]);
    if (!s.lanes) r.zero_subsets.push_back(mask);
  }
  r.applicable = r.n == 4 || r.n == 5;
  if (r.applicable) {
    int cnt = static_cast<int>(r.zero_subsets.size());
    int div = 1 << (6 - r.n);
    PTLAB_ASSERT(cnt % div == 0, "zero-subset count not divisible by 2^{6-n}");
    r.sing_count = -1 + cnt / div;
  }
  return r;
}

struct BruteForceSing {
  std::vector<int> counts;  // per extension degree s = 1..
  int count = -1;
  bool stabilized = false;
};

/// Singular points of Y = V(f1, f2, f3) in P^4 over F_{q^s}: common zeros with every
/// 3x3 minor of the Jacobian rows (3a_i^2), (6a_i y_i), (3y_i^2) vanishing.
/// The extension degree is capped at the largest supported field.
inline BruteForceSing vision_sing_bruteforce(const Field& K, const std::vector<FieldElem>& a, int s_max,
                                             const SolverOptions& opt = {}) {
  PTLAB_REQUIRE(s_max >= 2, "stabilization needs s_max >= 2");
  auto rep = vision_sing_count(K, a);
  PTLAB_REQUIRE(rep.applicable, "the vision formula applies only for n in {4, 5}");
  BruteForceSing out;
  for (int s = 1; s <= s_max && K.r() * s <= Field::kMaxDegree; ++s) {
    Field L = Field::make(K.p(), K.r() * s);
    auto al = Embedding(K, L)(a);
    auto v = tangential_vision(L, al);
    std::vector<Form> eqs{v.f1, v.f2, v.f3};
    std::vector<Form> row0, row1, row2;
    for (int i = 0; i < 5; ++i) {
      Form c0(L, 5, 0), c1(L, 5, 1), c2(L, 5, 2);
      c0.add_term(Monomial{}, L.mul_int(L.sqr(al[i]), 3));
      c1.add_term(monomial_var(i), L.mul_int(al[i], 6));
      c2.add_term(monomial_var(i, 2), L.from_int(3));
      row0.push_back(c0);
      row1.push_back(c1);
      row2.push_back(c2);
    }
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j)
        for (int k = j + 1; k < 5; ++k) {
          int c[3] = {i, j, k};
          Form det(L, 5, 3);
          static const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
          for (int t = 0; t < 6; ++t) {
            Form term = row0[c[perms[t][0]]] * row1[c[perms[t][1]]] * row2[c[perms[t][2]]];
            det = t < 3 ? det + term : det - term;
          }
          if (!det.is_zero()) eqs.push_back(det);
        }
    out.counts.push_back(static_cast<int>(find_projective_zeros(eqs, opt).size()));
  }
  PTLAB_REQUIRE(out.counts.size() >= 2, "the base field leaves no room for a stabilization check");
  out.count = out.counts.back();
  out.stabilized = out.counts[out.counts.size() - 2] == out.count;
  return out;
}

// ---------------------------------------------------------------------------
// Index-set systems

using IndexSet = std::vector<int>;
using IndexSystem = std::vector<IndexSet>;

/// Some permutation of [0, N) maps S1 onto S2 (images sorted, equal cardinality).
inline bool perm_equivalent(const IndexSystem& S1, const IndexSystem& S2, int N) {
  if (S1.size() != S2.size()) return false;
  std::vector<int> P(N);
  std::iota(P.begin(), P.end(), 0);
  do {
    bool ok = true;
    for (const auto& I : S1) {
      IndexSet PI;
      for (int i : I) PI.push_back(P[i]);
      std::sort(PI.begin(), PI.end());
      if (std::find(S2.begin(), S2.end(), PI) == S2.end()) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(P.begin(), P.end()));
  return false;
}

namespace detail {

/// Rank over Q by fraction-free elimination.
inline int rank_q(std::vector<std::vector<BigInt>> A) {
  const int rows = static_cast<int>(A.size()), cols = rows ? static_cast<int>(A[0].size()) : 0;
  int rk = 0;
  BigInt prev = 1;
  for (int c = 0; c < cols && rk < rows; ++c) {
    int piv = -1;
    for (int r = rk; r < rows; ++r)
      if (A[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(A[rk], A[piv]);
    for (int r = rk + 1; r < rows; ++r) {
      for (int k = c + 1; k < cols; ++k) A[r][k] = (A[rk][c] * A[r][k] - A[r][c] * A[rk][k]) / prev;
      A[r][c] = 0;
    }
    prev = A[rk][c];
    ++rk;
  }
  return rk;
}

inline int rank_p(std::vector<std::vector<std::int64_t>> A, std::int64_t p) {
  const int rows = static_cast<int>(A.size()), cols = rows ? static_cast<int>(A[0].size()) : 0;
  for (auto& row : A)
    for (auto& x : row) x = ((x % p) + p) % p;
  int rk = 0;
  for (int c = 0; c < cols && rk < rows; ++c) {
    int piv = -1;
    for (int r = rk; r < rows; ++r)
      if (A[r][c]) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(A[rk], A[piv]);
    std::int64_t inv = 1, b = A[rk][c], e = p - 2;
    while (e) {
      if (e & 1) inv = inv * b % p;
      b = b * b % p;
      e >>= 1;
    }
    for (int r = 0; r < rows; ++r) {
      if (r == rk || !A[r][c]) continue;
      std::int64_t f = A[r][c] * inv % p;
      for (int k = 0; k < cols; ++k) A[r][k] = ((A[r][k] - f * A[rk][k]) % p + p) % p;
    }
    ++rk;
  }
  return rk;
}

/// Unique solution of A v = b over Q, A of full column rank and the system consistent.
inline std::vector<BigRational> solve_q(const std::vector<std::vector<std::int64_t>>& A0, const std::vector<std::int64_t>& b) {
  const int rows = static_cast<int>(A0.size()), n = static_cast<int>(A0[0].size());
  std::vector<std::vector<BigRational>> A(rows, std::vector<BigRational>(n + 1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < n; ++c) A[r][c] = A0[r][c];
    A[r][n] = b[r];
  }
  int rk = 0;
  std::vector<int> pivcol;
  for (int c = 0; c < n && rk < rows; ++c) {
    int piv = -1;
    for (int r = rk; r < rows; ++r)
      if (A[r][c] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(A[rk], A[piv]);
    BigRational inv = 1 / A[rk][c];
    for (auto& x : A[rk]) x *= inv;
    for (int r = 0; r < rows; ++r) {
      if (r == rk || A[r][c] == 0) continue;
      BigRational f = A[r][c];
      for (int k = 0; k <= n; ++k) A[r][k] -= f * A[rk][k];
    }
    pivcol.push_back(c);
    ++rk;
  }
  PTLAB_ASSERT(rk == n, "system is not of full column rank");
  for (int r = rk; r < rows; ++r) PTLAB_ASSERT(A[r][n] == 0, "inconsistent system");
  std::vector<BigRational> v(n);
  for (int r = 0; r < rk; ++r) v[pivcol[r]] = A[r][n];
  return v;
}

inline std::vector<std::int64_t> solve_p(const std::vector<std::vector<std::int64_t>>& A0, const std::vector<std::int64_t>& b,
                                         std::int64_t p) {
  const int rows = static_cast<int>(A0.size()), n = static_cast<int>(A0[0].size());
  std::vector<std::vector<std::int64_t>> A(rows, std::vector<std::int64_t>(n + 1));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < n; ++c) A[r][c] = ((A0[r][c] % p) + p) % p;
    A[r][n] = ((b[r] % p) + p) % p;
  }
  auto inv = [p](std::int64_t x) {
    std::int64_t r = 1, e = p - 2;
    while (e) {
      if (e & 1) r = r * x % p;
      x = x * x % p;
      e >>= 1;
    }
    return r;
  };
  int rk = 0;
  std::vector<int> pivcol;
  for (int c = 0; c < n && rk < rows; ++c) {
    int piv = -1;
    for (int r = rk; r < rows; ++r)
      if (A[r][c]) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(A[rk], A[piv]);
    std::int64_t iv = inv(A[rk][c]);
    for (auto& x : A[rk]) x = x * iv % p;
    for (int r = 0; r < rows; ++r) {
      if (r == rk || !A[r][c]) continue;
      std::int64_t f = A[r][c];
      for (int k = 0; k <= n; ++k) A[r][k] = ((A[r][k] - f * A[rk][k]) % p + p) % p;
    }
    pivcol.push_back(c);
    ++rk;
  }
  PTLAB_ASSERT(rk == n, "system is not of full column rank");
  std::vector<std::int64_t> v(n);
  for (int r = 0; r < rk; ++r) v[pivcol[r]] = A[r][n];
  return v;
}

inline std::string format_system(const IndexSystem& S) {
  std::string s = "[";
  for (std::size_t i = 0; i < S.size(); ++i) {
    if (i) s += ", ";
    s += "[";
    for (std::size_t j = 0; j < S[i].size(); ++j) s += (j ? ", " : "") + std::to_string(S[i][j]);
    s += "]";
  }
  return s + "]";
}

}  // namespace detail

struct RichConfigOutput {
  std::int64_t characteristic = 0;
  std::vector<std::vector<BigRational>> simple_q;    // characteristic 0
  std::vector<std::vector<std::int64_t>> simple_p;   // characteristic p, residues in [0, p)
  std::vector<IndexSystem> degenerate;

  std::size_t simple_count() const { return characteristic ? simple_p.size() : simple_q.size(); }

  /// The printed form of the enumeration, e.g. "[[-2, -1, 1, 1], '---']".
  std::string to_string() const {
    std::vector<std::string> items;
    if (characteristic == 0) {
      for (const auto& v : simple_q) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].str();
        items.push_back(s + "]");
      }
    } else {
      for (const auto& v : simple_p) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
        items.push_back(s + "]");
      }
    }
    items.push_back("'---'");
    for (const auto& S : degenerate) items.push_back(detail::format_system(S));
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i];
    return s + "]";
  }
};

/// Enumerates systems S of r distinct nonempty subsets of [0, n). Systems whose solution
/// space lies in some x_j = 0 or in x_1 + ... + x_n = 0 are dropped; the rest give either a
/// unique point with x_1 + ... + x_n = -1 (sorted, deduplicated) or a positive-dimensional
/// family (kept up to permutation of the indices). characteristic is 0 or a prime.
inline RichConfigOutput rich_configurations(int n, int r, std::int64_t characteristic) {
  PTLAB_REQUIRE(n >= 1 && n <= 7 && r >= 1, "rich_configurations supports 1 <= n <= 7");
  PTLAB_REQUIRE(characteristic == 0 || (characteristic > 2 && characteristic < (1 << 30) &&
                                        detail::is_prime_u64(static_cast<std::uint64_t>(characteristic))),
                "characteristic must be 0 or an odd prime below 2^30");
  std::vector<IndexSet> C;
  for (int k = 1; k <= n; ++k) {
    std::vector<int> comb(k);
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
      C.push_back(comb);
      int i = k - 1;
      while (i >= 0 && comb[i] == n - k + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  const int nc = static_cast<int>(C.size());
  PTLAB_REQUIRE(r <= nc, "more subsets requested than exist");
  // work guard: number of systems
  {
    double combos = 1;
    for (int i = 0; i < r; ++i) combos = combos * (nc - i) / (i + 1);
    if (combos > 5e7) throw BudgetExceeded("rich configuration enumeration", combos, 5e7);
  }
  auto rank = [&](const std::vector<std::vector<std::int64_t>>& A) {
    if (characteristic) return detail::rank_p(A, characteristic);
    std::vector<std::vector<BigInt>> B(A.size(), std::vector<BigInt>(n));
    for (std::size_t i = 0; i < A.size(); ++i)
      for (int j = 0; j < n; ++j) B[i][j] = A[i][j];
    return detail::rank_q(std::move(B));
  };
  RichConfigOutput out;
  out.characteristic = characteristic;
  std::vector<int> pick(r);
  std::iota(pick.begin(), pick.end(), 0);
  for (;;) {
    std::vector<std::vector<std::int64_t>> A(r + 1, std::vector<std::int64_t>(n, 0));
    for (int i = 0; i < r; ++i)
      for (int j : C[pick[i]]) A[i][j] = 1;
    int rk = rank(A);
    bool bad = false;
    for (int j = 0; j < n && !bad; ++j) {
      auto Aj = A;
      Aj[r][j] = 1;
      bad = rank(Aj) == rk;
    }
    for (int j = 0; j < n; ++j) A[r][j] = 1;
    int rk1 = bad ? rk : rank(A);
    if (!bad && rk1 != rk) {
      std::vector<std::int64_t> b(r + 1, 0);
      b[r] = -1;
      IndexSystem S;
      for (int i = 0; i < r; ++i) S.push_back(C[pick[i]]);
      if (rk1 == n) {
        if (characteristic) {
          auto v = detail::solve_p(A, b, characteristic);
          std::sort(v.begin(), v.end());
          if (std::find(out.simple_p.begin(), out.simple_p.end(), v) == out.simple_p.end()) out.simple_p.push_back(v);
        } else {
          auto v = detail::solve_q(A, b);
          std::sort(v.begin(), v.end());
          if (std::find(out.simple_q.begin(), out.simple_q.end(), v) == out.simple_q.end()) out.simple_q.push_back(v);
        }
      } else if (std::none_of(out.degenerate.begin(), out.degenerate.end(),
                              [&](const IndexSystem& U) { return perm_equivalent(S, U, n); })) {
        out.degenerate.push_back(S);
      }
    }
    int i = r - 1;
    while (i >= 0 && pick[i] == nc - r + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < r; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

/// Char-0 solutions reduced mod p and re-sorted by residue, for comparison with a char-p run.
inline std::vector<std::vector<std::int64_t>> reduce_solutions(const RichConfigOutput& q0, std::int64_t p) {
  PTLAB_REQUIRE(q0.characteristic == 0, "characteristic-0 output expected");
  std::vector<std::vector<std::int64_t>> out;
  for (const auto& v : q0.simple_q) {
    std::vector<std::int64_t> w;
    for (const auto& x : v) {
      BigInt num = boost::multiprecision::numerator(x), den = boost::multiprecision::denominator(x);
      BigInt pm = p;
      PTLAB_REQUIRE(den % pm != 0, "denominator divisible by p");
      std::int64_t nm = static_cast<std::int64_t>(((num % pm) + pm) % pm);
      std::int64_t dn = static_cast<std::int64_t>(den % pm);
      std::int64_t inv = 1, b = dn, e = p - 2;
      while (e) {
        if (e & 1) inv = inv * b % p;
        b = b * b % p;
        e >>= 1;
      }
      w.push_back(nm * inv % p);
    }
    std::sort(w.begin(), w.end());
    out.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Profiles and screening

enum class RichPattern { P1, P2, P3, None };

inline const char* pattern_name(RichPattern p) {
  switch (p) {
    case RichPattern::P1: return "P1";
    case RichPattern::P2: return "P2";
    case RichPattern::P3: return "P3";
    default: return "none";
  }
}

/// Matches [x_1 : ... : x_6] against [-2:-1:1:1:0:1], [-2:-2:1:1:1:1] and [t:-t:-t:t:-1:1]
/// (t != 0) up to permutation and scaling, in that order.
inline RichPattern classify_rich_profile(const Field& K, const std::vector<FieldElem>& x) {
  PTLAB_REQUIRE(x.size() == 6, "six coordinates expected");
  FieldElem s = K.zero();
  bool nonzero = false;
  for (auto v : x) {
    s = K.add(s, v);
    nonzero = nonzero || v.lanes;
  }
  PTLAB_REQUIRE(s.lanes == 0 && nonzero, "profile must be nonzero with zero sum");
  const std::vector<std::vector<std::int64_t>> fixed = {{-2, -1, 1, 1, 0, 1}, {-2, -2, 1, 1, 1, 1}};
  std::array<int, 6> P;
  for (int k = 0; k < 2; ++k) {
    std::iota(P.begin(), P.end(), 0);
    do {
      FieldElem lam = x[P[5]];
      if (!lam.lanes) continue;
      bool ok = true;
      for (int i = 0; i < 5 && ok; ++i) ok = x[P[i]] == K.mul(lam, K.from_int(fixed[k][i]));
      if (ok) return k == 0 ? RichPattern::P1 : RichPattern::P2;
    } while (std::next_permutation(P.begin(), P.end()));
  }
  std::iota(P.begin(), P.end(), 0);
  do {
    FieldElem lam = x[P[5]], t = x[P[0]];
    if (!lam.lanes || !t.lanes) continue;
    if (x[P[4]] == K.neg(lam) && x[P[1]] == K.neg(t) && x[P[2]] == K.neg(t) && x[P[3]] == t) return RichPattern::P3;
  } while (std::next_permutation(P.begin(), P.end()));
  return RichPattern::None;
}

struct ScrollScreen {
  int n = 0;
  bool n_allowed = false;  // n in {1, 4, 5}
  int zero_subset_count = 0;
  int sing_count = -1;
  RichPattern pattern = RichPattern::None;
  std::string verdict;               // scroll-impossible | scroll-unexcluded
  std::vector<FieldElem> span_normal;  // Span(S) = P(grad F(a)^perp)
};

inline ScrollScreen scroll_screen(const Field& K, const std::vector<FieldElem>& a) {
  PTLAB_REQUIRE(a.size() == 6, "a point of P^5 is expected");
  PTLAB_REQUIRE(fermat_value(K, a).lanes == 0, "the point is not on the Fermat fourfold");
  PTLAB_REQUIRE(nonzero_dimension(a) >= 0, "the zero vector is not a point");
  ScrollScreen out;
  auto rep = vision_sing_count(K, a);
  out.n = rep.n;
  out.n_allowed = rep.n == 1 || rep.n == 4 || rep.n == 5;
  out.zero_subset_count = static_cast<int>(rep.zero_subsets.size());
  out.sing_count = rep.sing_count;
  std::vector<FieldElem> cube;
  for (auto x : a) cube.push_back(K.mul(K.sqr(x), x));
  out.pattern = classify_rich_profile(K, cube);
  for (auto x : a) out.span_normal.push_back(K.mul_int(K.sqr(x), 3));
  if (!out.n_allowed) {
    out.verdict = "scroll-impossible";
  } else if (rep.applicable) {
    int threshold = rep.n == 4 ? 3 : 5;
    out.verdict = (out.sing_count < threshold && out.pattern == RichPattern::None) ? "scroll-impossible"
                                                                                    : "scroll-unexcluded";
  } else {
    out.verdict = "scroll-unexcluded";
  }
  return out;
}

}  // namespace ptlab

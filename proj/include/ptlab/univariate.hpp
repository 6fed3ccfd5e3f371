#pragma once

// Small univariate polynomials over a Field: root counting and root finding.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "ptlab/errors.hpp"
#include "ptlab/field.hpp"

namespace ptlab {

/// Polynomial of degree at most kCap - 1, low degree first. deg == -1 is the zero polynomial.
struct UPoly {
  static constexpr int kCap = 9;
  std::array<FieldElem, kCap> c{};
  int deg = -1;

  static UPoly from(const std::vector<FieldElem>& coeffs) {
    PTLAB_REQUIRE(static_cast<int>(coeffs.size()) <= kCap, "polynomial degree too large");
    UPoly p;
    for (std::size_t i = 0; i < coeffs.size(); ++i) p.c[i] = coeffs[i];
    p.deg = static_cast<int>(coeffs.size()) - 1;
    p.trim();
    return p;
  }

  void trim() {
    while (deg >= 0 && c[deg].lanes == 0) --deg;
  }
  bool is_zero() const { return deg < 0; }
};

namespace upoly {

inline FieldElem eval(const Field& F, const UPoly& P, FieldElem x) {
  FieldElem acc = F.zero();
  for (int i = P.deg; i >= 0; --i) acc = F.add(F.mul(acc, x), P.c[i]);
  return acc;
}

inline UPoly monic(const Field& F, UPoly P) {
  if (P.deg < 0) return P;
  FieldElem li = F.inv(P.c[P.deg]);
  for (int i = 0; i <= P.deg; ++i) P.c[i] = F.mul(P.c[i], li);
  return P;
}

inline UPoly sub(const Field& F, UPoly a, const UPoly& b) {
  int d = std::max(a.deg, b.deg);
  for (int i = 0; i <= d; ++i) a.c[i] = F.sub(i <= a.deg ? a.c[i] : F.zero(), i <= b.deg ? b.c[i] : F.zero());
  a.deg = d;
  a.trim();
  return a;
}

// Reduces a (given as a coefficient buffer of length n) modulo the monic polynomial m.
template <std::size_t N>
inline UPoly reduce_buffer(const Field& F, std::array<FieldElem, N>& buf, int top, const UPoly& m) {
  for (int k = top; k >= m.deg; --k) {
    FieldElem t = buf[k];
    if (t.lanes == 0) continue;
    for (int i = 0; i < m.deg; ++i) buf[k - m.deg + i] = F.sub(buf[k - m.deg + i], F.mul(t, m.c[i]));
    buf[k] = F.zero();
  }
  UPoly r;
  for (int i = 0; i < m.deg && i <= top; ++i) r.c[i] = buf[i];
  r.deg = std::min(m.deg - 1, top);
  r.trim();
  return r;
}

/// a mod b, b nonzero.
inline UPoly mod(const Field& F, const UPoly& a, const UPoly& b) {
  PTLAB_REQUIRE(!b.is_zero(), "division by zero polynomial");
  if (a.deg < b.deg) return a;
  UPoly mb = monic(F, b);
  std::array<FieldElem, UPoly::kCap> buf{};
  for (int i = 0; i <= a.deg; ++i) buf[i] = a.c[i];
  return reduce_buffer(F, buf, a.deg, mb);
}

/// Monic gcd; gcd(0, 0) = 0.
inline UPoly gcd(const Field& F, UPoly a, UPoly b) {
  while (!b.is_zero()) {
    UPoly r = mod(F, a, b);
    a = b;
    b = r;
  }
  return monic(F, a);
}

/// a * b mod m, m monic.
inline UPoly mulmod(const Field& F, const UPoly& a, const UPoly& b, const UPoly& m) {
  std::array<FieldElem, 2 * UPoly::kCap> buf{};
  if (a.is_zero() || b.is_zero()) return UPoly{};
  for (int i = 0; i <= a.deg; ++i) {
    if (a.c[i].lanes == 0) continue;
    for (int j = 0; j <= b.deg; ++j) buf[i + j] = F.add(buf[i + j], F.mul(a.c[i], b.c[j]));
  }
  return reduce_buffer(F, buf, a.deg + b.deg, m);
}

/// base^e mod m, m monic of degree >= 1.
inline UPoly powmod(const Field& F, UPoly base, std::uint64_t e, const UPoly& m) {
  UPoly result;
  result.c[0] = F.one();
  result.deg = 0;
  if (m.deg == 0) return UPoly{};
  base = mod(F, base, m);
  while (e) {
    if (e & 1) result = mulmod(F, result, base, m);
    e >>= 1;
    if (e) base = mulmod(F, base, base, m);
  }
  return result;
}

inline UPoly x_poly(const Field& F) {
  UPoly x;
  x.c[1] = F.one();
  x.deg = 1;
  return x;
}

/// Product of the distinct linear factors of P over the field: gcd(P, x^q - x).
inline UPoly split_part(const Field& F, const UPoly& P) {
  UPoly m = monic(F, P);
  if (m.deg <= 0) return m;
  UPoly xq = powmod(F, x_poly(F), F.q(), m);
  return gcd(F, m, sub(F, xq, x_poly(F)));
}

/// Number of distinct roots via gcd with x^q - x. P must be nonzero.
inline int count_roots_generic(const Field& F, const UPoly& P) {
  PTLAB_REQUIRE(!P.is_zero(), "root count of the zero polynomial");
  return split_part(F, P).deg;
}

namespace detail {

// Arithmetic in F_q[s]/(s^2 - D) for a nonsquare D.
struct Quad {
  FieldElem x, y;
};

inline Quad quad_mul(const Field& F, Quad a, Quad b, FieldElem D) {
  return {F.add(F.mul(a.x, b.x), F.mul(F.mul(a.y, b.y), D)), F.add(F.mul(a.x, b.y), F.mul(a.y, b.x))};
}

inline Quad quad_pow(const Field& F, Quad a, std::uint64_t e, FieldElem D) {
  Quad r{F.one(), F.zero()};
  while (e) {
    if (e & 1) r = quad_mul(F, r, a, D);
    a = quad_mul(F, a, a, D);
    e >>= 1;
  }
  return r;
}

inline Quad quad_inv(const Field& F, Quad a, FieldElem D) {
  FieldElem n = F.sub(F.sqr(a.x), F.mul(F.sqr(a.y), D));
  FieldElem ni = F.inv(n);
  return {F.mul(a.x, ni), F.neg(F.mul(a.y, ni))};
}

// V_n for V_0 = 2, V_1 = v, V_{k+1} = v V_k - V_{k-1}, by the ladder (V_k, V_{k+1}).
inline FieldElem lucas_v(const Field& F, FieldElem v, std::uint64_t n) {
  const FieldElem two = F.from_int(2);
  FieldElem a = two, b = v;
  for (int i = 63; i >= 0; --i) {
    if ((n >> i) & 1) {
      a = F.sub(F.mul(a, b), v);
      b = F.sub(F.sqr(b), two);
    } else {
      b = F.sub(F.mul(a, b), v);
      a = F.sub(F.sqr(a), two);
    }
  }
  return a;
}

}  // namespace detail

/// Distinct roots of a cubic from its discriminant and a cube-root test.
inline int count_roots_cubic(const Field& F, const UPoly& P) {
  PTLAB_ASSERT(P.deg == 3, "cubic expected");
  FieldElem ai = F.inv(P.c[3]);
  FieldElem b2 = F.mul(P.c[2], ai), b1 = F.mul(P.c[1], ai), b0 = F.mul(P.c[0], ai);
  FieldElem inv3 = F.inv(F.from_int(3));
  FieldElem inv27 = F.inv(F.from_int(27));
  // Depressed cubic z^3 + a z + b with y = z - b2/3.
  FieldElem b2sq = F.sqr(b2);
  FieldElem a = F.sub(b1, F.mul(b2sq, inv3));
  FieldElem b = F.add(F.sub(F.mul(F.mul_int(F.mul(b2sq, b2), 2), inv27), F.mul(F.mul(b2, b1), inv3)), b0);
  FieldElem a3 = F.mul(F.sqr(a), a);
  FieldElem disc = F.neg(F.add(F.mul_int(a3, 4), F.mul_int(F.sqr(b), 27)));
  if (disc.lanes == 0) return a.lanes == 0 ? 1 : 2;
  if (!F.is_square(disc)) return 1;
  FieldElem half_b = F.mul(b, F.inv(F.from_int(2)));
  FieldElem Dp = F.add(F.sqr(half_b), F.mul(a3, inv27));
  if (F.q() % 3 == 1) {
    auto s = F.sqrt(Dp);
    PTLAB_ASSERT(s.has_value(), "cubic resolvent is not a square");
    FieldElem w = F.sub(*s, half_b);
    if (w.lanes == 0) w = F.neg(F.add(*s, half_b));
    return F.is_cube(w) ? 3 : 0;
  }
  // q = 2 mod 3: the resolvent root w = -b/2 + sqrt(Dp) lives in F_{q^2}; the count is 3 iff
  // t = conj(w) / w satisfies t^{(q+1)/3} = 1. t has norm 1, so t^n = 1 iff V_n(t + 1/t) = 2 for
  // the Lucas sequence V_0 = 2, V_1 = t + 1/t, V_{k+1} = V_1 V_k - V_{k-1}.
  FieldElem x2 = F.sqr(half_b);
  FieldElem v1 = F.mul(F.mul_int(F.add(x2, Dp), 2), F.inv(F.sub(x2, Dp)));
  return detail::lucas_v(F, v1, (F.q() + 1) / 3) == F.from_int(2) ? 3 : 0;
}

/// Number of distinct roots in the field. P must be nonzero.
inline int count_roots(const Field& F, const UPoly& P) {
  PTLAB_REQUIRE(!P.is_zero(), "root count of the zero polynomial");
  switch (P.deg) {
    case 0:
      return 0;
    case 1:
      return 1;
    case 2: {
      FieldElem disc = F.sub(F.sqr(P.c[1]), F.mul_int(F.mul(P.c[2], P.c[0]), 4));
      if (disc.lanes == 0) return 1;
      return F.is_square(disc) ? 2 : 0;
    }
    case 3:
      return count_roots_cubic(F, P);
    default:
      return count_roots_generic(F, P);
  }
}

namespace detail {

inline void split_roots(const Field& F, const UPoly& h, std::vector<FieldElem>& out) {
  if (h.deg <= 0) return;
  if (h.deg == 1) {
    out.push_back(F.neg(F.div(h.c[0], h.c[1])));
    return;
  }
  if (h.deg == 2) {
    FieldElem disc = F.sub(F.sqr(h.c[1]), F.mul_int(F.mul(h.c[2], h.c[0]), 4));
    auto s = F.sqrt(disc);
    PTLAB_ASSERT(s.has_value(), "split quadratic without roots");
    FieldElem inv2a = F.inv(F.mul_int(h.c[2], 2));
    out.push_back(F.mul(F.sub(*s, h.c[1]), inv2a));
    if (s->lanes != 0) out.push_back(F.mul(F.neg(F.add(*s, h.c[1])), inv2a));
    return;
  }
  for (std::uint64_t k = 0; k < F.q(); ++k) {
    UPoly base = x_poly(F);
    base.c[0] = F.from_index(k);
    UPoly g = powmod(F, base, (F.q() - 1) / 2, h);
    if (g.deg < 0) continue;
    g.c[0] = F.sub(g.c[0], F.one());
    if (g.deg < 0) g.deg = 0;
    g.trim();
    UPoly d = gcd(F, h, g);
    if (d.deg > 0 && d.deg < h.deg) {
      split_roots(F, d, out);
      // h / d via exact division
      std::array<FieldElem, UPoly::kCap> buf{};
      for (int i = 0; i <= h.deg; ++i) buf[i] = h.c[i];
      UPoly quo;
      quo.deg = h.deg - d.deg;
      for (int k = h.deg; k >= d.deg; --k) {
        FieldElem t = buf[k];
        quo.c[k - d.deg] = t;
        for (int i = 0; i <= d.deg; ++i) buf[k - d.deg + i] = F.sub(buf[k - d.deg + i], F.mul(t, d.c[i]));
      }
      split_roots(F, quo, out);
      return;
    }
  }
  throw InternalError("equal-degree splitting failed");
}

}  // namespace detail

/// Distinct roots in the field, sorted by Field::index. P must be nonzero.
inline std::vector<FieldElem> find_roots(const Field& F, const UPoly& P) {
  PTLAB_REQUIRE(!P.is_zero(), "roots of the zero polynomial");
  std::vector<FieldElem> out;
  if (P.deg == 0) return out;
  UPoly h = (P.deg <= 1) ? monic(F, P) : split_part(F, P);
  detail::split_roots(F, h, out);
  std::sort(out.begin(), out.end(), [&](FieldElem a, FieldElem b) { return F.index(a) < F.index(b); });
  return out;
}

}  // namespace upoly

/// Embedding F_{p^a} -> F_{p^{ab}}: u maps to the least root of the subfield modulus.
class Embedding {
 public:
  Embedding() = default;
  Embedding(const Field& from, const Field& to) : from_(from), to_(to) {
    PTLAB_REQUIRE(from.p() == to.p() && to.r() % from.r() == 0, "no embedding between these fields");
    identity_ = from.r() == 1 || from == to;
    if (identity_) return;
    std::vector<FieldElem> m;
    for (auto c : from.modulus()) m.push_back(to.from_int(c));
    auto roots = upoly::find_roots(to, UPoly::from(m));
    PTLAB_ASSERT(!roots.empty(), "subfield modulus has no root in the extension");
    powers_.push_back(to.one());
    for (int i = 1; i < from.r(); ++i) powers_.push_back(to.mul(powers_.back(), roots.front()));
  }

  const Field& from() const { return from_; }
  const Field& to() const { return to_; }

  FieldElem operator()(FieldElem a) const {
    if (identity_) return a;
    FieldElem acc = to_.zero();
    for (int i = 0; i < from_.r(); ++i) acc = to_.add(acc, to_.mul(to_.from_int(from_.coeff(a, i)), powers_[i]));
    return acc;
  }

  std::vector<FieldElem> operator()(const std::vector<FieldElem>& v) const {
    std::vector<FieldElem> out;
    out.reserve(v.size());
    for (auto x : v) out.push_back((*this)(x));
    return out;
  }

 private:
  Field from_, to_;
  bool identity_ = true;
  std::vector<FieldElem> powers_;
};

}  // namespace ptlab

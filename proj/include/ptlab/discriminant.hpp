#pragma once

// The diagonal-cubic discriminant
//
//   Delta(P, c) = 3^{e_m} (F_1 ... F_m)^{2^{m-2}} prod_eps sum_i eps_i sqrt(c_i^3 / F_i),
//
// eps ranging over {1} x {+-1}^{m-1}, evaluated over F_p through F_{p^2}, plus a
// geometric oracle that looks for singular points of the section directly.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ptlab/counting.hpp"
#include "ptlab/errors.hpp"
#include "ptlab/field.hpp"
#include "ptlab/forms.hpp"
#include "ptlab/univariate.hpp"

namespace ptlab {

/// ((-1)^{m-1} - 2^{m-1}) / 3 + (m-1) 2^{m-2}
inline std::int64_t exponent_e_m(int m) {
  PTLAB_REQUIRE(m >= 3 && m <= 60, "exponent_e_m needs 3 <= m <= 60");
  std::int64_t sign = (m - 1) % 2 == 0 ? 1 : -1;
  std::int64_t num = sign - (std::int64_t{1} << (m - 1));
  PTLAB_ASSERT(num % 3 == 0, "exponent numerator not divisible by 3");
  return num / 3 + (m - 1) * (std::int64_t{1} << (m - 2));
}

/// ((m-1)(d-1)^{m-2}, d(d-1)^{m-2}): degrees of disc(F, c) in the coefficients of F and in c.
inline std::pair<std::int64_t, std::int64_t> disc_bidegree(int d, int m) {
  PTLAB_REQUIRE(d >= 2 && m >= 3, "disc_bidegree needs d >= 2 and m >= 3");
  std::int64_t pw = 1;
  for (int i = 0; i < m - 2; ++i) pw *= d - 1;
  return {(m - 1) * pw, d * pw};
}

struct DiagDiscFactor {
  std::string epsilon;  // e.g. "+-+-"
  FieldElem value;      // in F_{p^2}
};

struct DiagDiscResult {
  bool defined = false;
  FieldElem value{0};  // in F_p
  std::vector<DiagDiscFactor> factors;
  int vanishing_count = 0;
  bool b_proxy = false;  // at least two vanishing factors, or one with two vanishing t_i
  Field ext;             // F_{p^2}, owner of the factor values

  std::string factors_json() const {
    std::string s = "[";
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (i) s += ",";
      s += "{\"epsilon\":\"" + factors[i].epsilon + "\",\"value\":\"" + ext.to_string(factors[i].value) + "\"}";
    }
    return s + "]";
  }
};

/// Delta(P, c) over F_p. Square roots are the canonical ones of Field::sqrt in F_{p^2}.
inline DiagDiscResult eval_diag_disc(const DiagonalForm& P, const std::vector<FieldElem>& c, const Field& Fp) {
  PTLAB_REQUIRE(P.d == 3, "the diagonal discriminant is implemented for cubics");
  PTLAB_REQUIRE(Fp.r() == 1, "eval_diag_disc works over a prime field");
  const int m = P.m();
  PTLAB_REQUIRE(m >= 3 && static_cast<int>(c.size()) == m, "coefficient vector has the wrong length");
  PTLAB_REQUIRE(m <= 16, "too many sign vectors");
  DiagDiscResult out;
  out.ext = Field::make(Fp.p(), 2);
  for (auto Fi : P.coeffs)
    if (!Fp.from_int(Fi).lanes) return out;
  out.defined = true;
  const Field& K = out.ext;
  std::vector<FieldElem> s(m);
  int zero_t = 0;
  for (int i = 0; i < m; ++i) {
    FieldElem t = Fp.div(Fp.mul(Fp.sqr(c[i]), c[i]), Fp.from_int(P.coeffs[i]));
    zero_t += t.lanes == 0;
    s[i] = *K.sqrt(t);  // every element of F_p is a square in F_{p^2}
  }
  FieldElem prod = K.one();
  const int nsigns = 1 << (m - 1);
  for (int mask = 0; mask < nsigns; ++mask) {
    FieldElem f = s[0];
    std::string eps = "+";
    for (int i = 1; i < m; ++i) {
      bool minus = (mask >> (i - 1)) & 1;
      f = minus ? K.sub(f, s[i]) : K.add(f, s[i]);
      eps += minus ? '-' : '+';
    }
    out.factors.push_back({eps, f});
    out.vanishing_count += f.lanes == 0;
    prod = K.mul(prod, f);
  }
  PTLAB_ASSERT(K.frobenius(prod) == prod, "discriminant product is not Frobenius-invariant");
  FieldElem scale = K.pow(K.from_int(3), static_cast<std::uint64_t>(exponent_e_m(m)));
  FieldElem fprod = K.one();
  for (auto Fi : P.coeffs) fprod = K.mul(fprod, K.from_int(Fi));
  scale = K.mul(scale, K.pow(fprod, std::uint64_t{1} << (m - 2)));
  FieldElem v = K.mul(scale, prod);
  PTLAB_ASSERT(K.in_prime_field(v), "discriminant value outside the prime field");
  out.value = Fp.from_int(static_cast<std::int64_t>(K.coeff(v, 0)));
  out.b_proxy = out.vanishing_count >= 2 || (out.vanishing_count >= 1 && zero_t >= 2);
  return out;
}

inline int count_vanishing_factors(const DiagDiscResult& r) {
  PTLAB_REQUIRE(r.defined, "discriminant undefined at this prime");
  return r.vanishing_count;
}

/// Perfect matchings of {0..m-1}: the smallest unmatched index is paired with each larger
/// unmatched index in increasing order, recursively.
inline std::vector<std::vector<std::pair<int, int>>> perfect_matchings(int m) {
  std::vector<std::vector<std::pair<int, int>>> out;
  std::vector<std::pair<int, int>> cur;
  std::vector<bool> used(m, false);
  std::function<void()> rec = [&]() {
    int i = 0;
    while (i < m && used[i]) ++i;
    if (i == m) {
      out.push_back(cur);
      return;
    }
    used[i] = true;
    for (int j = i + 1; j < m; ++j) {
      if (used[j]) continue;
      used[j] = true;
      cur.emplace_back(i, j);
      rec();
      cur.pop_back();
      used[j] = false;
    }
    used[i] = false;
  };
  rec();
  return out;
}

struct PairingResult {
  bool holds = false;
  std::vector<std::pair<int, int>> matching;  // 0-based

  std::string matching_string() const {
    std::string s;
    for (auto [i, j] : matching) s += "{" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "}";
    return s;
  }
};

/// First matching (in perfect_matchings order) with c_i^3 F_j = c_j^3 F_i on every pair.
/// c lives in the field K; the F_i are integers reduced into K.
inline PairingResult pairing_criterion(const DiagonalForm& P, const std::vector<FieldElem>& c, const Field& K) {
  const int m = P.m();
  PTLAB_REQUIRE(m == 4 || m == 6, "the pairing criterion is stated for m in {4, 6}");
  PTLAB_REQUIRE(static_cast<int>(c.size()) == m, "coefficient vector has the wrong length");
  std::vector<FieldElem> Fk(m), cube(m);
  for (int i = 0; i < m; ++i) {
    Fk[i] = K.from_int(P.coeffs[i]);
    PTLAB_REQUIRE(Fk[i].lanes != 0, "diagonal coefficient vanishes modulo p");
    cube[i] = K.mul(K.sqr(c[i]), c[i]);
  }
  for (const auto& M : perfect_matchings(m)) {
    bool ok = true;
    for (auto [i, j] : M)
      if (K.mul(cube[i], Fk[j]) != K.mul(cube[j], Fk[i])) {
        ok = false;
        break;
      }
    if (ok) return {true, M};
  }
  return {};
}

struct GeometricVanishing {
  bool vanishes = false;
  int found_at = 0;     // extension degree of the first singular point found
  int searched_to = 0;  // largest extension degree examined
};

/// Singular points of V(F, c.x) over F_{q^s}, s = 1..s_max; s is capped at the largest
/// supported extension degree.
inline GeometricVanishing disc_vanish_geometric(const Form& F, const std::vector<FieldElem>& c, int s_max,
                                                const SolverOptions& opt = {}) {
  const Field& K = F.field();
  PTLAB_REQUIRE(s_max >= 1, "s_max must be positive");
  GeometricVanishing out;
  SolverOptions so = opt;
  so.max_solutions = 1;
  for (int s = 1; s <= s_max && K.r() * s <= Field::kMaxDegree; ++s) {
    Field L = Field::make(K.p(), K.r() * s);
    Embedding emb(K, L);
    out.searched_to = s;
    if (!find_rational_singular_points(F.embed(emb), emb(c), so).empty()) {
      out.vanishes = true;
      out.found_at = s;
      return out;
    }
  }
  return out;
}

}  // namespace ptlab

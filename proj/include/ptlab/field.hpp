#pragma once

// Finite fields F_{p^r} with 5 <= p < 2^15 and 1 <= r <= 4.
//
// An element stores its r coefficients (in the polynomial basis 1, u, ..., u^{r-1})
// in 16-bit lanes of a single 64-bit word, so addition and subtraction are branch-free
// lane arithmetic. Multiplication goes through discrete log/exp tables when q is small
// enough, and through schoolbook reduction otherwise.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ptlab/errors.hpp"

namespace ptlab {

struct FieldElem {
  std::uint64_t lanes = 0;
  friend bool operator==(FieldElem a, FieldElem b) { return a.lanes == b.lanes; }
  friend bool operator!=(FieldElem a, FieldElem b) { return a.lanes != b.lanes; }
};

namespace detail {

constexpr std::uint64_t kLaneOnes = 0x0001000100010001ULL;

inline std::uint64_t lane(std::uint64_t v, int i) { return (v >> (16 * i)) & 0xFFFFu; }

inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

// Dense polynomials over F_p, low degree first. Only used while choosing moduli.
using PPoly = std::vector<std::int64_t>;

inline void ppoly_trim(PPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline std::int64_t inv_mod(std::int64_t a, std::int64_t p) {
  std::int64_t t = 0, nt = 1, r = p, nr = ((a % p) + p) % p;
  while (nr != 0) {
    std::int64_t qq = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - qq * nt);
    std::tie(r, nr) = std::make_pair(nr, r - qq * nr);
  }
  return ((t % p) + p) % p;
}

inline PPoly ppoly_mod(PPoly a, const PPoly& m, std::int64_t p) {
  ppoly_trim(a);
  const std::int64_t lead_inv = inv_mod(m.back(), p);
  while (a.size() >= m.size()) {
    std::int64_t c = a.back() * lead_inv % p;
    std::size_t shift = a.size() - m.size();
    for (std::size_t i = 0; i < m.size(); ++i) a[shift + i] = ((a[shift + i] - c * m[i]) % p + p) % p;
    ppoly_trim(a);
  }
  return a;
}

inline PPoly ppoly_mulmod(const PPoly& a, const PPoly& b, const PPoly& m, std::int64_t p) {
  if (a.empty() || b.empty()) return {};
  PPoly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % p;
  return ppoly_mod(std::move(c), m, p);
}

inline PPoly ppoly_gcd(PPoly a, PPoly b, std::int64_t p) {
  ppoly_trim(a);
  ppoly_trim(b);
  while (!b.empty()) {
    PPoly r = ppoly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// x^e mod m
inline PPoly ppoly_xpow(std::uint64_t e, const PPoly& m, std::int64_t p) {
  PPoly result{1}, base = ppoly_mod(PPoly{0, 1}, m, p);
  while (e) {
    if (e & 1) result = ppoly_mulmod(result, base, m, p);
    base = ppoly_mulmod(base, base, m, p);
    e >>= 1;
  }
  return result;
}

inline bool ppoly_irreducible(const PPoly& f, std::int64_t p) {
  const int r = static_cast<int>(f.size()) - 1;
  std::uint64_t pk = 1;
  for (int k = 1; 2 * k <= r; ++k) {
    pk *= static_cast<std::uint64_t>(p);
    PPoly h = ppoly_xpow(pk, f, p);
    if (h.size() < 2) h.resize(2, 0);
    h[1] = ((h[1] - 1) % p + p) % p;
    ppoly_trim(h);
    if (ppoly_gcd(f, h, p).size() > 1) return false;
  }
  return true;
}

}  // namespace detail

/// Handle to an immutable, shared description of F_{p^r}. Cheap to copy.
class Field {
 public:
  static constexpr std::uint64_t kTableLimit = 1ULL << 22;
  // Above this size random table reads miss the cache and schoolbook multiplication is faster.
  static constexpr std::uint64_t kMulTableLimit = 1ULL << 18;
  static constexpr int kMaxDegree = 4;
  static constexpr std::uint32_t kMaxPrime = 1u << 15;

  Field() = default;

  /// Returns the (cached) field F_{p^r}.
  static Field make(std::uint32_t p, int r = 1) {
    static std::mutex mu;
    static std::map<std::pair<std::uint32_t, int>, std::shared_ptr<const Data>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(p, r);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_shared<const Data>(p, r)).first;
    Field f;
    f.d_ = it->second;
    return f;
  }

  bool valid() const { return d_ != nullptr; }
  std::uint32_t p() const { return d_->p; }
  int r() const { return d_->r; }
  std::uint64_t q() const { return d_->q; }
  bool has_tables() const { return !d_->exp.empty(); }
  /// Monic modulus, low degree first (length r+1).
  const std::vector<std::uint32_t>& modulus() const { return d_->modulus; }
  FieldElem generator() const { return d_->gen; }

  friend bool operator==(const Field& a, const Field& b) {
    return a.d_ == b.d_ || (a.d_ && b.d_ && a.d_->p == b.d_->p && a.d_->r == b.d_->r);
  }
  friend bool operator!=(const Field& a, const Field& b) { return !(a == b); }

  FieldElem zero() const { return {0}; }
  FieldElem one() const { return {1}; }

  FieldElem from_int(std::int64_t v) const {
    std::int64_t m = v % static_cast<std::int64_t>(d_->p);
    if (m < 0) m += d_->p;
    return {static_cast<std::uint64_t>(m)};
  }

  FieldElem from_coeffs(const std::vector<std::uint32_t>& c) const {
    PTLAB_REQUIRE(static_cast<int>(c.size()) <= d_->r, "too many coefficients for field");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < c.size(); ++i) v |= static_cast<std::uint64_t>(c[i] % d_->p) << (16 * i);
    return {v};
  }

  std::uint32_t coeff(FieldElem a, int i) const { return static_cast<std::uint32_t>(detail::lane(a.lanes, i)); }

  bool in_prime_field(FieldElem a) const { return (a.lanes >> 16) == 0; }

  /// Dense index sum_i c_i p^i; a bijection onto [0, q). Orders elements by
  /// (c_{r-1}, ..., c_0) lexicographically.
  std::uint64_t index(FieldElem a) const {
    const std::uint64_t p = d_->p;
    std::uint64_t v = 0;
    for (int i = d_->r - 1; i >= 0; --i) v = v * p + detail::lane(a.lanes, i);
    return v;
  }

  FieldElem from_index(std::uint64_t idx) const {
    const std::uint64_t p = d_->p;
    std::uint64_t v = 0;
    for (int i = 0; i < d_->r; ++i) {
      v |= (idx % p) << (16 * i);
      idx /= p;
    }
    return {v};
  }

  FieldElem add(FieldElem a, FieldElem b) const {
    std::uint64_t s = a.lanes + b.lanes;
    std::uint64_t t = s + d_->lane_bias;
    std::uint64_t mask = (t >> 15) & detail::kLaneOnes;
    return {s - mask * d_->p};
  }

  FieldElem sub(FieldElem a, FieldElem b) const {
    std::uint64_t s = a.lanes + d_->lane_p - b.lanes;
    std::uint64_t t = s + d_->lane_bias;
    std::uint64_t mask = (t >> 15) & detail::kLaneOnes;
    return {s - mask * d_->p};
  }

  FieldElem neg(FieldElem a) const { return sub(zero(), a); }

  FieldElem mul(FieldElem a, FieldElem b) const {
    if (d_->r == 1) return {fastmod(a.lanes * b.lanes)};
    if (a.lanes == 0 || b.lanes == 0) return {0};
    if (has_tables() && d_->q <= kMulTableLimit) {
      std::uint64_t e = static_cast<std::uint64_t>(d_->log[index(a)]) + d_->log[index(b)];
      if (e >= d_->q - 1) e -= d_->q - 1;
      return {d_->exp[e]};
    }
    return schoolbook_mul(a, b);
  }

  FieldElem sqr(FieldElem a) const { return mul(a, a); }

  FieldElem mul_int(FieldElem a, std::int64_t k) const { return mul(a, from_int(k)); }

  FieldElem pow(FieldElem a, std::uint64_t e) const {
    if (e == 0) return one();
    if (a.lanes == 0) return zero();
    if (has_tables()) {
      std::uint64_t l = d_->log[index(a)];
      unsigned __int128 t = static_cast<unsigned __int128>(l) * (e % (d_->q - 1));
      return {d_->exp[static_cast<std::uint64_t>(t % (d_->q - 1))]};
    }
    FieldElem result = one(), base = a;
    while (e) {
      if (e & 1) result = mul(result, base);
      base = mul(base, base);
      e >>= 1;
    }
    return result;
  }

  FieldElem inv(FieldElem a) const {
    PTLAB_REQUIRE(a.lanes != 0, "inverse of zero");
    if (has_tables()) {
      std::uint64_t l = d_->log[index(a)];
      return {d_->exp[l == 0 ? 0 : d_->q - 1 - l]};
    }
    return pow(a, d_->q - 2);
  }

  FieldElem div(FieldElem a, FieldElem b) const { return mul(a, inv(b)); }

  /// Discrete log with respect to generator(); requires tables and a != 0.
  std::uint64_t log(FieldElem a) const {
    PTLAB_ASSERT(has_tables() && a.lanes != 0, "log needs tables and a nonzero argument");
    return d_->log[index(a)];
  }

  bool is_square(FieldElem a) const {
    if (a.lanes == 0) return true;
    if (has_tables()) return (d_->log[index(a)] & 1) == 0;
    return pow(a, (d_->q - 1) / 2) == one();
  }

  bool is_cube(FieldElem a) const {
    if (a.lanes == 0 || (d_->q - 1) % 3 != 0) return true;
    if (has_tables()) return d_->log[index(a)] % 3 == 0;
    return pow(a, (d_->q - 1) / 3) == one();
  }

  /// Square root; of the two roots, the one with the smaller index() is returned.
  std::optional<FieldElem> sqrt(FieldElem a) const {
    if (a.lanes == 0) return zero();
    if (!is_square(a)) return std::nullopt;
    FieldElem s = has_tables() ? FieldElem{d_->exp[d_->log[index(a)] / 2]} : tonelli_shanks(a);
    FieldElem t = neg(s);
    return index(t) < index(s) ? t : s;
  }

  /// Tonelli-Shanks square root without the canonical choice of sign. Exposed for tests.
  FieldElem tonelli_shanks(FieldElem a) const {
    const std::uint64_t qm1 = d_->q - 1;
    int s = 0;
    std::uint64_t t = qm1;
    while ((t & 1) == 0) {
      t >>= 1;
      ++s;
    }
    FieldElem z = d_->nonresidue;
    FieldElem c = pow(z, t);
    FieldElem x = pow(a, (t + 1) / 2);
    FieldElem b = pow(a, t);
    int m = s;
    while (b != one()) {
      int i = 0;
      FieldElem bb = b;
      while (bb != one()) {
        bb = mul(bb, bb);
        ++i;
      }
      PTLAB_ASSERT(i < m, "Tonelli-Shanks on a non-square");
      FieldElem g = c;
      for (int k = 0; k < m - i - 1; ++k) g = mul(g, g);
      x = mul(x, g);
      c = mul(g, g);
      b = mul(b, c);
      m = i;
    }
    return x;
  }

  FieldElem frobenius(FieldElem a) const { return pow(a, d_->p); }

  std::string to_string(FieldElem a) const {
    if (d_->r == 1) return std::to_string(a.lanes);
    std::string s = "[";
    for (int i = 0; i < d_->r; ++i) {
      if (i) s += ",";
      s += std::to_string(detail::lane(a.lanes, i));
    }
    return s + "]";
  }

 private:
  struct Data {
    std::uint32_t p = 0;
    int r = 0;
    std::uint64_t q = 0;
    std::uint64_t lane_p = 0;     // p in each active lane
    std::uint64_t lane_bias = 0;  // 2^15 - p in each active lane
    std::uint64_t fm = 0;         // fastmod multiplier
    std::vector<std::uint32_t> modulus;
    std::vector<std::uint32_t> negmod;
    std::vector<std::uint32_t> log;
    std::vector<std::uint64_t> exp;
    FieldElem gen{0};
    FieldElem nonresidue{0};

    Data(std::uint32_t p_, int r_) : p(p_), r(r_) {
      PTLAB_REQUIRE(p >= 5 && p < kMaxPrime && detail::is_prime_u64(p), "field characteristic must be a prime in [5, 2^15)");
      PTLAB_REQUIRE(r >= 1 && r <= kMaxDegree, "extension degree must be in [1, 4]");
      q = 1;
      for (int i = 0; i < r; ++i) {
        q *= p;
        lane_p |= static_cast<std::uint64_t>(p) << (16 * i);
        lane_bias |= static_cast<std::uint64_t>((1u << 15) - p) << (16 * i);
      }
      fm = UINT64_MAX / p + 1;
      choose_modulus();
      Field self;
      // Temporarily borrow a non-owning handle for arithmetic during setup.
      self.d_ = std::shared_ptr<const Data>(this, [](const Data*) {});
      if (q <= kTableLimit) {
        gen = find_generator(self);
        build_tables(self);
      }
      for (std::uint64_t i = 2; i < q; ++i) {
        FieldElem z = self.from_index(i);
        if (self.pow(z, (q - 1) / 2) != self.one()) {
          nonresidue = z;
          break;
        }
      }
    }

    void choose_modulus() {
      if (r == 1) {
        modulus = {0, 1};
        negmod = {0};
        return;
      }
      // Least monic irreducible polynomial, ordered by sum a_i p^i over its lower coefficients.
      for (std::uint64_t v = 0;; ++v) {
        detail::PPoly f(r + 1, 0);
        std::uint64_t t = v;
        for (int i = 0; i < r; ++i) {
          f[i] = static_cast<std::int64_t>(t % p);
          t /= p;
        }
        f[r] = 1;
        if (f[0] == 0) continue;
        if (!detail::ppoly_irreducible(f, p)) continue;
        modulus.assign(f.begin(), f.end());
        negmod.resize(r);
        for (int i = 0; i < r; ++i) negmod[i] = (p - modulus[i]) % p;
        return;
      }
    }

    static FieldElem find_generator(const Field& F) {
      const std::uint64_t qm1 = F.q() - 1;
      auto factors = detail::prime_factors(qm1);
      for (std::uint64_t i = 1; i < F.q(); ++i) {
        FieldElem g = F.from_index(i);
        bool ok = true;
        for (auto l : factors) {
          if (F.pow_plain(g, qm1 / l) == F.one()) {
            ok = false;
            break;
          }
        }
        if (ok) return g;
      }
      throw InternalError("no generator found");
    }

    void build_tables(const Field& F) {
      exp.resize(q - 1);
      log.assign(q, 0);
      FieldElem x = F.one();
      for (std::uint64_t k = 0; k + 1 < q; ++k) {
        exp[k] = x.lanes;
        log[F.index(x)] = static_cast<std::uint32_t>(k);
        x = F.mul_plain(x, gen);
      }
      PTLAB_ASSERT(x == F.one(), "generator order mismatch");
    }
  };

  std::uint64_t fastmod(std::uint64_t x) const {
    std::uint64_t low = d_->fm * x;
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(low) * d_->p) >> 64);
  }

  FieldElem schoolbook_mul(FieldElem a, FieldElem b) const {
    const int r = d_->r;
    const std::uint64_t p = d_->p;
    std::uint64_t prod[7] = {0, 0, 0, 0, 0, 0, 0};
    for (int i = 0; i < r; ++i) {
      std::uint64_t ai = detail::lane(a.lanes, i);
      if (!ai) continue;
      for (int j = 0; j < r; ++j) prod[i + j] += ai * detail::lane(b.lanes, j);
    }
    for (int k = 2 * r - 2; k >= r; --k) {
      std::uint64_t c = prod[k] % p;
      if (!c) continue;
      for (int i = 0; i < r; ++i) prod[k - r + i] += c * d_->negmod[i];
    }
    std::uint64_t v = 0;
    for (int i = 0; i < r; ++i) v |= (prod[i] % p) << (16 * i);
    return {v};
  }

  FieldElem mul_plain(FieldElem a, FieldElem b) const {
    if (d_->r == 1) return {fastmod(a.lanes * b.lanes)};
    return schoolbook_mul(a, b);
  }

  FieldElem pow_plain(FieldElem a, std::uint64_t e) const {
    FieldElem result = one(), base = a;
    while (e) {
      if (e & 1) result = mul_plain(result, base);
      base = mul_plain(base, base);
      e >>= 1;
    }
    return result;
  }

  std::shared_ptr<const Data> d_;
};

/// q^k as an unsigned 64-bit integer; throws on overflow.
inline std::uint64_t checked_pow(std::uint64_t q, int k) {
  std::uint64_t v = 1;
  for (int i = 0; i < k; ++i) {
    PTLAB_REQUIRE(v <= UINT64_MAX / q, "integer overflow in q^k");
    v *= q;
  }
  return v;
}

}  // namespace ptlab

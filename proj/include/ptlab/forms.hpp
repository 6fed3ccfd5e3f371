#pragma once

// Homogeneous forms over the integers and over finite fields, with linear
// substitution, restriction to hyperplanes, and a small textual syntax:
//
//   diag:d=3;1,1,1,1                  G = x1^3 + x2^3 + x3^3 + x4^3
//   poly:d=2;m=3;x1^2-3*x2*x3         general integer form in x1..xm

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ptlab/errors.hpp"
#include "ptlab/field.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/projective.hpp"
#include "ptlab/univariate.hpp"

namespace ptlab {

constexpr int kMaxVars = 8;
using Monomial = std::array<std::uint8_t, kMaxVars>;

inline int monomial_degree(const Monomial& e) {
  int d = 0;
  for (auto x : e) d += x;
  return d;
}

inline Monomial monomial_var(int i, int power = 1) {
  Monomial e{};
  e[i] = static_cast<std::uint8_t>(power);
  return e;
}

/// Homogeneous polynomial with coefficients in a Field. The zero form keeps its declared degree.
class Form {
 public:
  Form() = default;
  Form(Field F, int nvars, int degree) : F_(std::move(F)), n_(nvars), d_(degree) {
    PTLAB_REQUIRE(nvars >= 1 && nvars <= kMaxVars, "number of variables out of range");
    PTLAB_REQUIRE(degree >= 0, "negative degree");
  }

  const Field& field() const { return F_; }
  int nvars() const { return n_; }
  int degree() const { return d_; }
  const std::map<Monomial, FieldElem>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }

  void add_term(const Monomial& e, FieldElem c) {
    PTLAB_REQUIRE(monomial_degree(e) == d_, "monomial degree does not match the form");
    for (int i = n_; i < kMaxVars; ++i) PTLAB_REQUIRE(e[i] == 0, "monomial uses an undeclared variable");
    if (!c.lanes) return;
    auto it = t_.find(e);
    if (it == t_.end()) {
      t_.emplace(e, c);
    } else {
      it->second = F_.add(it->second, c);
      if (!it->second.lanes) t_.erase(it);
    }
  }

  FieldElem coefficient(const Monomial& e) const {
    auto it = t_.find(e);
    return it == t_.end() ? F_.zero() : it->second;
  }

  friend bool operator==(const Form& a, const Form& b) {
    return a.n_ == b.n_ && a.d_ == b.d_ && a.t_.size() == b.t_.size() &&
           std::equal(a.t_.begin(), a.t_.end(), b.t_.begin(),
                      [](const auto& x, const auto& y) { return x.first == y.first && x.second == y.second; });
  }

  FieldElem eval(const std::vector<FieldElem>& x) const {
    PTLAB_REQUIRE(static_cast<int>(x.size()) == n_, "point has the wrong number of coordinates");
    FieldElem acc = F_.zero();
    for (const auto& [e, c] : t_) {
      FieldElem v = c;
      for (int i = 0; i < n_; ++i)
        for (int k = 0; k < e[i]; ++k) v = F_.mul(v, x[i]);
      acc = F_.add(acc, v);
    }
    return acc;
  }

  Form derivative(int i) const {
    PTLAB_REQUIRE(i >= 0 && i < n_, "variable index out of range");
    Form D(F_, n_, d_ > 0 ? d_ - 1 : 0);
    if (d_ == 0) return D;
    for (const auto& [e, c] : t_) {
      if (!e[i]) continue;
      Monomial f = e;
      f[i]--;
      D.add_term(f, F_.mul_int(c, e[i]));
    }
    return D;
  }

  std::vector<FieldElem> gradient(const std::vector<FieldElem>& x) const {
    std::vector<FieldElem> g;
    for (int i = 0; i < n_; ++i) g.push_back(derivative(i).eval(x));
    return g;
  }

  Form scaled(FieldElem s) const {
    Form out(F_, n_, d_);
    for (const auto& [e, c] : t_) out.add_term(e, F_.mul(c, s));
    return out;
  }

  friend Form operator+(const Form& a, const Form& b) {
    PTLAB_REQUIRE(a.n_ == b.n_ && a.d_ == b.d_, "adding forms of different shape");
    Form out = a;
    for (const auto& [e, c] : b.t_) out.add_term(e, c);
    return out;
  }

  friend Form operator-(const Form& a, const Form& b) { return a + b.scaled(b.F_.neg(b.F_.one())); }

  friend Form operator*(const Form& a, const Form& b) {
    PTLAB_REQUIRE(a.n_ == b.n_, "multiplying forms in different variables");
    Form out(a.F_, a.n_, a.d_ + b.d_);
    for (const auto& [e, c] : a.t_)
      for (const auto& [f, k] : b.t_) {
        Monomial g;
        for (int i = 0; i < kMaxVars; ++i) g[i] = static_cast<std::uint8_t>(e[i] + f[i]);
        out.add_term(g, a.F_.mul(c, k));
      }
    return out;
  }

  /// Substitutes x_i = sum_j L[i][j] y_j with y in `new_nvars` variables.
  Form substitute(const std::vector<std::vector<FieldElem>>& L, int new_nvars) const {
    PTLAB_REQUIRE(static_cast<int>(L.size()) == n_, "substitution needs one linear form per variable");
    std::vector<Form> lin;
    for (int i = 0; i < n_; ++i) {
      PTLAB_REQUIRE(static_cast<int>(L[i].size()) == new_nvars, "linear form has the wrong length");
      Form l(F_, new_nvars, 1);
      for (int j = 0; j < new_nvars; ++j) l.add_term(monomial_var(j), L[i][j]);
      lin.push_back(std::move(l));
    }
    // powers[i][k] = lin[i]^k
    std::vector<std::vector<Form>> powers(n_);
    for (int i = 0; i < n_; ++i) {
      Form one(F_, new_nvars, 0);
      one.add_term(Monomial{}, F_.one());
      powers[i].push_back(one);
    }
    Form out(F_, new_nvars, d_);
    for (const auto& [e, c] : t_) {
      Form acc(F_, new_nvars, 0);
      acc.add_term(Monomial{}, c);
      for (int i = 0; i < n_; ++i) {
        if (!e[i]) continue;
        while (static_cast<int>(powers[i].size()) <= e[i]) powers[i].push_back(powers[i].back() * lin[i]);
        acc = acc * powers[i][e[i]];
      }
      for (const auto& [f, k] : acc.t_) out.add_term(f, k);
    }
    return out;
  }

  /// F(M y).
  Form apply_linear_change(const Matrix& M) const {
    PTLAB_REQUIRE(M.rows() == n_ && M.cols() == n_, "change of variables has the wrong size");
    std::vector<std::vector<FieldElem>> L(n_, std::vector<FieldElem>(n_));
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) L[i][j] = M(i, j);
    return substitute(L, n_);
  }

  Form embed(const Embedding& e) const {
    Form out(e.to(), n_, d_);
    for (const auto& [m, c] : t_) out.add_term(m, e(c));
    return out;
  }

  std::string to_string() const {
    if (t_.empty()) return "0";
    std::string s;
    for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
      if (!s.empty()) s += " + ";
      s += F_.to_string(it->second);
      for (int i = 0; i < n_; ++i) {
        if (!it->first[i]) continue;
        s += "*x" + std::to_string(i + 1);
        if (it->first[i] > 1) s += "^" + std::to_string(it->first[i]);
      }
    }
    return s;
  }

 private:
  Field F_;
  int n_ = 0, d_ = 0;
  std::map<Monomial, FieldElem> t_;
};

/// Homogeneous form with integer coefficients.
class IntForm {
 public:
  IntForm() = default;
  IntForm(int nvars, int degree) : n_(nvars), d_(degree) {
    PTLAB_REQUIRE(nvars >= 1 && nvars <= kMaxVars, "number of variables out of range");
    PTLAB_REQUIRE(degree >= 1, "degree must be positive");
  }

  int nvars() const { return n_; }
  int degree() const { return d_; }
  const std::map<Monomial, std::int64_t>& terms() const { return t_; }

  void add_term(const Monomial& e, std::int64_t c) {
    PTLAB_REQUIRE(monomial_degree(e) == d_, "monomial degree does not match the form");
    for (int i = n_; i < kMaxVars; ++i) PTLAB_REQUIRE(e[i] == 0, "monomial uses an undeclared variable");
    if (!c) return;
    auto& v = t_[e];
    v += c;
    if (!v) t_.erase(e);
  }

  Form reduce(const Field& F) const {
    Form out(F, n_, d_);
    for (const auto& [e, c] : t_) out.add_term(e, F.from_int(c));
    return out;
  }

  /// Coefficients of x_i^d when the form is diagonal, otherwise empty.
  std::vector<std::int64_t> diagonal_coefficients() const {
    std::vector<std::int64_t> out(n_, 0);
    for (const auto& [e, c] : t_) {
      int nz = 0, at = -1;
      for (int i = 0; i < n_; ++i)
        if (e[i]) {
          ++nz;
          at = i;
        }
      if (nz != 1) return {};
      out[at] = c;
    }
    return out;
  }

  bool is_diagonal() const { return !diagonal_coefficients().empty(); }

  std::string to_string() const {
    auto diag = diagonal_coefficients();
    if (!diag.empty() && std::none_of(diag.begin(), diag.end(), [](auto c) { return c == 0; })) {
      std::string s = "diag:d=" + std::to_string(d_) + ";";
      for (int i = 0; i < n_; ++i) s += (i ? "," : "") + std::to_string(diag[i]);
      return s;
    }
    std::string s = "poly:d=" + std::to_string(d_) + ";m=" + std::to_string(n_) + ";";
    bool first = true;
    for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
      std::int64_t c = it->second;
      if (!first || c < 0) s += c < 0 ? "-" : "+";
      first = false;
      std::int64_t a = c < 0 ? -c : c;
      std::string mono;
      for (int i = 0; i < n_; ++i) {
        if (!it->first[i]) continue;
        if (!mono.empty()) mono += "*";
        mono += "x" + std::to_string(i + 1);
        if (it->first[i] > 1) mono += "^" + std::to_string(it->first[i]);
      }
      s += (a == 1 ? "" : std::to_string(a) + "*") + mono;
    }
    if (first) s += "0";
    return s;
  }

  friend bool operator==(const IntForm& a, const IntForm& b) { return a.n_ == b.n_ && a.d_ == b.d_ && a.t_ == b.t_; }

 private:
  int n_ = 0, d_ = 0;
  std::map<Monomial, std::int64_t> t_;
};

/// P = sum F_i x_i^d.
struct DiagonalForm {
  int d = 3;
  std::vector<std::int64_t> coeffs;

  int m() const { return static_cast<int>(coeffs.size()); }

  IntForm to_int_form() const {
    IntForm G(m(), d);
    for (int i = 0; i < m(); ++i) G.add_term(monomial_var(i, d), coeffs[i]);
    return G;
  }

  static DiagonalForm fermat(int m, int d = 3) { return DiagonalForm{d, std::vector<std::int64_t>(m, 1)}; }
};

namespace forms {

namespace detail {

inline std::int64_t parse_int(const std::string& s, std::size_t& pos) {
  std::size_t start = pos;
  if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  PTLAB_REQUIRE(pos > start && std::isdigit(static_cast<unsigned char>(s[pos - 1])), "malformed form spec: integer expected");
  return std::stoll(s.substr(start, pos - start));
}

inline std::string strip(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

}  // namespace detail

/// Parses the textual form syntax described at the top of this header.
inline IntForm parse(const std::string& text) {
  std::string s = detail::strip(text);
  if (s.rfind("diag:", 0) == 0) {
    std::size_t pos = 5;
    PTLAB_REQUIRE(s.compare(pos, 2, "d=") == 0, "malformed form spec: expected d=");
    pos += 2;
    int d = static_cast<int>(detail::parse_int(s, pos));
    PTLAB_REQUIRE(pos < s.size() && s[pos] == ';', "malformed form spec: expected ';'");
    ++pos;
    DiagonalForm D{d, {}};
    while (pos < s.size()) {
      D.coeffs.push_back(detail::parse_int(s, pos));
      if (pos < s.size()) {
        PTLAB_REQUIRE(s[pos] == ',', "malformed form spec: expected ','");
        ++pos;
      }
    }
    PTLAB_REQUIRE(D.m() >= 1, "malformed form spec: no coefficients");
    return D.to_int_form();
  }
  PTLAB_REQUIRE(s.rfind("poly:", 0) == 0, "malformed form spec: unknown kind");
  std::size_t pos = 5;
  PTLAB_REQUIRE(s.compare(pos, 2, "d=") == 0, "malformed form spec: expected d=");
  pos += 2;
  int d = static_cast<int>(detail::parse_int(s, pos));
  PTLAB_REQUIRE(s.compare(pos, 3, ";m=") == 0, "malformed form spec: expected ;m=");
  pos += 3;
  int m = static_cast<int>(detail::parse_int(s, pos));
  PTLAB_REQUIRE(pos < s.size() && s[pos] == ';', "malformed form spec: expected ';'");
  ++pos;
  IntForm G(m, d);
  while (pos < s.size()) {
    std::int64_t sign = 1;
    if (s[pos] == '+' || s[pos] == '-') {
      sign = s[pos] == '-' ? -1 : 1;
      ++pos;
    }
    std::int64_t coef = 1;
    if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      coef = detail::parse_int(s, pos);
      if (pos < s.size() && s[pos] == '*') ++pos;
    }
    Monomial e{};
    while (pos < s.size() && s[pos] == 'x') {
      ++pos;
      int var = static_cast<int>(detail::parse_int(s, pos));
      PTLAB_REQUIRE(var >= 1 && var <= m, "malformed form spec: variable index out of range");
      int pw = 1;
      if (pos < s.size() && s[pos] == '^') {
        ++pos;
        pw = static_cast<int>(detail::parse_int(s, pos));
      }
      e[var - 1] = static_cast<std::uint8_t>(e[var - 1] + pw);
      if (pos < s.size() && s[pos] == '*') ++pos;
    }
    PTLAB_REQUIRE(pos == s.size() || s[pos] == '+' || s[pos] == '-', "malformed form spec: unexpected character");
    PTLAB_REQUIRE(monomial_degree(e) == d, "malformed form spec: term degree differs from d");
    G.add_term(e, sign * coef);
  }
  return G;
}

/// Restriction of F to {c.x = 0}, solving for the last index j with c_j != 0.
/// The result is a form in the remaining variables, in their original order.
struct Restriction {
  Form form;
  int pivot = -1;
};

inline Restriction restrict_to_hyperplane(const Form& F, const std::vector<FieldElem>& c) {
  const Field& K = F.field();
  const int m = F.nvars();
  PTLAB_REQUIRE(static_cast<int>(c.size()) == m, "hyperplane has the wrong number of coefficients");
  PTLAB_REQUIRE(m >= 2, "cannot restrict a form in one variable");
  int j = -1;
  for (int i = m - 1; i >= 0; --i)
    if (c[i].lanes) {
      j = i;
      break;
    }
  PTLAB_REQUIRE(j >= 0, "hyperplane coefficients must not all vanish");
  FieldElem minv = K.neg(K.inv(c[j]));
  std::vector<std::vector<FieldElem>> L(m, std::vector<FieldElem>(m - 1, K.zero()));
  for (int i = 0, col = 0; i < m; ++i) {
    if (i == j) continue;
    L[i][col] = K.one();
    L[j][col] = K.mul(c[i], minv);
    ++col;
  }
  return {F.substitute(L, m - 1), j};
}

/// Lifts a point of the hyperplane model back to P^{m-1}.
inline Point lift_from_hyperplane(const Field& K, const std::vector<FieldElem>& c, int pivot, const Point& y) {
  Point x;
  FieldElem acc = K.zero();
  for (int i = 0, k = 0; i < static_cast<int>(c.size()); ++i) {
    if (i == pivot) {
      x.push_back(K.zero());
      continue;
    }
    x.push_back(y[k]);
    acc = K.add(acc, K.mul(c[i], y[k]));
    ++k;
  }
  x[pivot] = K.neg(K.div(acc, c[pivot]));
  return x;
}

/// Symmetric Gram matrix B with Q(x) = x^T B x; requires degree 2.
inline Matrix gram_matrix(const Form& Q) {
  PTLAB_REQUIRE(Q.degree() == 2, "Gram matrix needs a quadratic form");
  const Field& K = Q.field();
  const int n = Q.nvars();
  Matrix B(K, n, n);
  FieldElem half = K.inv(K.from_int(2));
  for (const auto& [e, c] : Q.terms()) {
    int a = -1, b = -1;
    for (int i = 0; i < n; ++i) {
      if (e[i] == 2) a = b = i;
      if (e[i] == 1) (a < 0 ? a : b) = i;
    }
    if (a == b) {
      B(a, a) = K.add(B(a, a), c);
    } else {
      B(a, b) = K.add(B(a, b), K.mul(c, half));
      B(b, a) = B(a, b);
    }
  }
  return B;
}

}  // namespace forms

/// Evaluates G(y, t) as a univariate polynomial in the last variable t for many prefixes y.
class SlicedForm {
 public:
  SlicedForm() = default;
  explicit SlicedForm(const Form& G) : F_(G.field()), n_(G.nvars() - 1), d_(G.degree()) {
    PTLAB_REQUIRE(d_ + 1 <= UPoly::kCap, "degree too large for slicing");
    for (const auto& [e, c] : G.terms()) {
      Term t;
      t.coeff = c;
      t.tdeg = e[n_];
      for (int i = 0; i < n_; ++i) t.exps[i] = e[i];
      terms_.push_back(t);
    }
  }

  int prefix_len() const { return n_; }
  int degree() const { return d_; }

  /// Coefficients of G(y, t) in t; y has prefix_len() entries.
  UPoly slice(const FieldElem* y) const {
    std::array<std::array<FieldElem, UPoly::kCap>, kMaxVars> pw;
    for (int i = 0; i < n_; ++i) {
      pw[i][0] = F_.one();
      for (int k = 1; k <= d_; ++k) pw[i][k] = F_.mul(pw[i][k - 1], y[i]);
    }
    UPoly P;
    for (const auto& t : terms_) {
      FieldElem v = t.coeff;
      for (int i = 0; i < n_; ++i)
        if (t.exps[i]) v = F_.mul(v, pw[i][t.exps[i]]);
      P.c[t.tdeg] = F_.add(P.c[t.tdeg], v);
    }
    P.deg = d_;
    P.trim();
    return P;
  }

 private:
  struct Term {
    FieldElem coeff;
    int tdeg = 0;
    std::array<std::uint8_t, kMaxVars> exps{};
  };
  Field F_;
  int n_ = 0, d_ = 0;
  std::vector<Term> terms_;
};

}  // namespace ptlab

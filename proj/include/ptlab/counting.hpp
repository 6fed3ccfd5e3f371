#pragma once

// Point counts of projective varieties and hyperplane sections over F_{q^r}, the
// rationality reduction for cubics with a rational singular point, closed-form quadric
// counts, and the square-root cancellation verdict.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ptlab/errors.hpp"
#include "ptlab/field.hpp"
#include "ptlab/forms.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/projective.hpp"
#include "ptlab/solver.hpp"
#include "ptlab/univariate.hpp"

namespace ptlab {

struct CountOptions {
  double budget = 2e9;  // units: prefix points times (degree + 1)
  int workers = 1;
};

namespace detail {

template <class Fn>
void parallel_ranges(std::uint64_t total, int workers, Fn fn) {
  if (workers <= 1 || total < 4096) {
    fn(0, total, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::uint64_t step = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::uint64_t lo = std::min(total, w * step), hi = std::min(total, lo + step);
    pool.emplace_back([=] { fn(lo, hi, w); });
  }
  for (auto& t : pool) t.join();
}

inline std::int64_t to_i64(unsigned __int128 v) {
  PTLAB_REQUIRE(v <= static_cast<unsigned __int128>(INT64_MAX), "count does not fit in 64 bits");
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

/// Work units charged for counting zeros of forms in N variables over F_q.
inline double count_cost(double q, int nvars, int degree) { return projective_size_approx(q, nvars - 2) * (degree + 1); }

/// #V(forms)(K) in P^{N-1} by slicing along the last coordinate.
inline std::uint64_t count_projective(const std::vector<Form>& forms, const CountOptions& opt = {}) {
  PTLAB_REQUIRE(!forms.empty(), "no forms to count");
  const Field K = forms.front().field();
  const int N = forms.front().nvars();
  int dmax = 0;
  for (const auto& G : forms) {
    PTLAB_REQUIRE(G.nvars() == N && G.field() == K, "forms must share field and variables");
    dmax = std::max(dmax, G.degree());
  }
  double cost = count_cost(static_cast<double>(K.q()), N, dmax) * forms.size();
  if (cost > opt.budget) throw BudgetExceeded("point count over F_" + std::to_string(K.q()), cost, opt.budget);

  // The point (0 : ... : 0 : 1).
  std::uint64_t extra = 1;
  for (const auto& G : forms)
    if (G.coefficient(monomial_var(N - 1, G.degree())).lanes) extra = 0;
  if (N == 1) return extra;

  std::vector<SlicedForm> sl;
  for (const auto& G : forms) sl.emplace_back(G);
  ProjectiveSpace prefix(K, N - 2);
  std::vector<std::uint64_t> partial(std::max(1, opt.workers), 0);
  detail::parallel_ranges(prefix.size(), opt.workers, [&](std::uint64_t lo, std::uint64_t hi, int w) {
    std::uint64_t acc = 0;
    for (auto cur = prefix.cursor(lo, hi); !cur.done(); cur.next()) {
      const FieldElem* y = cur.point().data();
      if (sl.size() == 1) {
        UPoly P = sl[0].slice(y);
        acc += P.is_zero() ? K.q() : upoly::count_roots(K, P);
        continue;
      }
      UPoly g;
      bool any = false;
      for (const auto& s : sl) {
        UPoly P = s.slice(y);
        if (P.is_zero()) continue;
        g = any ? upoly::gcd(K, g, P) : P;
        any = true;
        if (g.deg == 0) break;
      }
      acc += !any ? K.q() : (g.deg == 0 ? 0 : upoly::count_roots(K, g));
    }
    partial[w] = acc;
  });
  std::uint64_t total = extra;
  for (auto v : partial) total += v;
  return total;
}

/// E = N - #P^dim(F_q).
inline std::int64_t error_E(std::uint64_t N, std::uint64_t q, int dim) {
  return static_cast<std::int64_t>(N) - static_cast<std::int64_t>(projective_size(q, dim));
}

// ---------------------------------------------------------------------------
// Quadrics

struct QuadricCount {
  int rank = 0;
  std::uint64_t affine = 0;
  std::uint64_t projective = 0;
  int eta = 0;  // quadratic character of (-1)^{rank/2} * det for even rank, else 0
};

/// Closed-form count of V(Q) in P^{N-1}(K) from the diagonalized Gram matrix.
inline QuadricCount quadric_count(const Form& Q) {
  const Field& K = Q.field();
  const int N = Q.nvars();
  auto D = linalg::diagonalize_symmetric(forms::gram_matrix(Q));
  const int rho = D.rank;
  const unsigned __int128 q = K.q();
  auto pw = [&](int k) {
    unsigned __int128 v = 1;
    for (int i = 0; i < k; ++i) v *= q;
    return v;
  };
  QuadricCount out;
  out.rank = rho;
  unsigned __int128 A;
  if (rho == 0) {
    A = 1;
  } else if (rho % 2 == 1) {
    A = pw(rho - 1);
  } else {
    FieldElem det = K.one();
    for (auto d : D.diag)
      if (d.lanes) det = K.mul(det, d);
    if ((rho / 2) % 2 == 1) det = K.neg(det);
    out.eta = K.is_square(det) ? 1 : -1;
    unsigned __int128 corr = pw(rho / 2) - pw(rho / 2 - 1);
    A = out.eta > 0 ? pw(rho - 1) + corr : pw(rho - 1) - corr;
  }
  unsigned __int128 affine = pw(N - rho) * A;
  out.affine = static_cast<std::uint64_t>(affine);
  out.projective = static_cast<std::uint64_t>((affine - 1) / (q - 1));
  return out;
}

// ---------------------------------------------------------------------------
// Singular points and the rationality reduction

inline bool is_diagonal_form(const Form& F) {
  for (const auto& [e, c] : F.terms())
    if (monomial_degree(e) != *std::max_element(e.begin(), e.end())) return false;
  return true;
}

/// Points x of P^{m-1}(K) with F(x) = 0, c.x = 0 and rank [grad F(x); c] <= 1.
/// Diagonal forms use the 2x2 minors directly, since each involves two variables and the
/// solver prunes at every level; other forms are restricted to the hyperplane first.
inline std::vector<Point> find_rational_singular_points(const Form& F, const std::vector<FieldElem>& c,
                                                        const SolverOptions& opt = {}) {
  const Field& K = F.field();
  const int m = F.nvars();
  PTLAB_REQUIRE(static_cast<int>(c.size()) == m, "hyperplane has the wrong number of coefficients");
  if (!is_diagonal_form(F)) {
    auto res = forms::restrict_to_hyperplane(F, c);
    PTLAB_REQUIRE(!res.form.is_zero(), "the hyperplane lies inside V(F)");
    std::vector<Form> eqs{res.form};
    for (int i = 0; i < m - 1; ++i) {
      Form d = res.form.derivative(i);
      if (!d.is_zero()) eqs.push_back(d);
    }
    std::vector<Point> out;
    for (const auto& y : find_projective_zeros(eqs, opt))
      out.push_back(ProjectiveSpace::normalize(K, forms::lift_from_hyperplane(K, c, res.pivot, y)));
    std::sort(out.begin(), out.end(), [&](const Point& a, const Point& b) { return ProjectiveSpace::index_less(K, a, b); });
    return out;
  }
  std::vector<Form> eqs{F};
  Form lin(K, m, 1);
  for (int i = 0; i < m; ++i) lin.add_term(monomial_var(i), c[i]);
  eqs.push_back(lin);
  std::vector<Form> grad;
  for (int i = 0; i < m; ++i) grad.push_back(F.derivative(i));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Form minor = grad[i].scaled(c[j]) - grad[j].scaled(c[i]);
      if (!minor.is_zero()) eqs.push_back(minor);
    }
  return find_projective_zeros(eqs, opt);
}

/// C(y, y_n) = f2(y) y_n + f3(y) after moving a singular point to (0 : ... : 0 : 1).
struct ReducedCubic {
  Form f2, f3;            // forms in n variables; X = V(C) lives in P^n
  bool common_factor = false;
  Matrix change;          // C o change is the reduced form
};

namespace detail {

// Does the linear form with coefficients l divide f3 (over the field of l)?
inline bool linear_divides(const std::vector<FieldElem>& l, const Form& f3) {
  return forms::restrict_to_hyperplane(f3, l).form.is_zero();
}

// Geometric common-factor test for f2 (quadric) and f3 (cubic).
inline bool share_factor(const Form& f2, const Form& f3) {
  if (f2.is_zero()) return false;
  if (f3.is_zero()) return true;
  const Field& K = f2.field();
  const int n = f2.nvars();
  if (n == 1) return true;  // both are nonzero multiples of powers of the same variable
  Matrix B = forms::gram_matrix(f2);
  auto D = linalg::diagonalize_symmetric(B);
  if (D.rank >= 3) {
    // f2 irreducible: test f3 = f2 * L for some linear L by linear algebra.
    std::vector<Monomial> monos;
    for (const auto& [e, c] : f3.terms()) monos.push_back(e);
    std::vector<Form> prods;
    for (int j = 0; j < n; ++j) {
      Form xj(K, n, 1);
      xj.add_term(monomial_var(j), K.one());
      prods.push_back(f2 * xj);
      for (const auto& [e, c] : prods.back().terms()) monos.push_back(e);
    }
    std::sort(monos.begin(), monos.end());
    monos.erase(std::unique(monos.begin(), monos.end()), monos.end());
    Matrix A(K, static_cast<int>(monos.size()), n);
    std::vector<FieldElem> rhs;
    for (std::size_t r = 0; r < monos.size(); ++r) {
      for (int j = 0; j < n; ++j) A(static_cast<int>(r), j) = prods[j].coefficient(monos[r]);
      rhs.push_back(f3.coefficient(monos[r]));
    }
    return linalg::solve(A, rhs).has_value();
  }
  auto Pinv = linalg::inverse(D.P);
  PTLAB_ASSERT(Pinv.has_value(), "singular congruence transform");
  std::vector<int> nz;
  for (int i = 0; i < n; ++i)
    if (D.diag[i].lanes) nz.push_back(i);
  auto row = [&](int i) {
    std::vector<FieldElem> r;
    for (int j = 0; j < n; ++j) r.push_back((*Pinv)(i, j));
    return r;
  };
  if (D.rank == 1) return linear_divides(row(nz[0]), f3);
  // f2 = a u^2 + b v^2 = a (u + tau v)(u - tau v), tau^2 = -b/a.
  FieldElem a = D.diag[nz[0]], b = D.diag[nz[1]];
  std::vector<FieldElem> u = row(nz[0]), v = row(nz[1]);
  FieldElem t2 = K.neg(K.div(b, a));
  Field L = K;
  Embedding emb(K, K);
  if (!K.is_square(t2)) {
    PTLAB_REQUIRE(2 * K.r() <= Field::kMaxDegree, "quadratic extension needed for the factor test is too large");
    L = Field::make(K.p(), 2 * K.r());
    emb = Embedding(K, L);
  }
  FieldElem tau = *L.sqrt(emb(t2));
  Form f3L = f3.embed(emb);
  for (int sgn = 0; sgn < 2; ++sgn) {
    std::vector<FieldElem> l;
    for (int j = 0; j < n; ++j) {
      FieldElem tv = L.mul(tau, emb(v[j]));
      l.push_back(sgn ? L.sub(emb(u[j]), tv) : L.add(emb(u[j]), tv));
    }
    if (linear_divides(l, f3L)) return true;
  }
  return false;
}

}  // namespace detail

inline ReducedCubic move_singularity_to_pole(const Form& C, const Point& s) {
  PTLAB_REQUIRE(C.degree() == 3, "rationality reduction needs a cubic");
  const Field& K = C.field();
  const int N = C.nvars();
  Matrix M = linalg::complete_with_last_column(K, s);
  Form Cp = C.apply_linear_change(M);
  PTLAB_REQUIRE(!Cp.is_zero(), "zero cubic");
  ReducedCubic out{Form(K, N - 1, 2), Form(K, N - 1, 3), false, M};
  for (const auto& [e, c] : Cp.terms()) {
    Monomial f = e;
    f[N - 1] = 0;
    switch (e[N - 1]) {
      case 0:
        out.f3.add_term(f, c);
        break;
      case 1:
        out.f2.add_term(f, c);
        break;
      default:
        throw PreconditionError("point is not a singular point of the cubic");
    }
  }
  out.common_factor = detail::share_factor(out.f2, out.f3);
  return out;
}

/// #V(f2, f3) in P^{n-1}(L) with f2 quadratic and f3 cubic.
inline std::uint64_t count_quadric_cubic(const Form& f2, const Form& f3, const CountOptions& opt = {}) {
  const Field& L = f2.field();
  const int n = f2.nvars();
  double cost = count_cost(static_cast<double>(L.q()), n, 3);
  if (cost > opt.budget) throw BudgetExceeded("quadric-cubic count over F_" + std::to_string(L.q()), cost, opt.budget);
  std::uint64_t extra = (!f2.coefficient(monomial_var(n - 1, 2)).lanes && !f3.coefficient(monomial_var(n - 1, 3)).lanes) ? 1 : 0;
  if (n == 1) return extra;
  SlicedForm s2(f2), s3(f3);
  ProjectiveSpace prefix(L, n - 2);
  std::vector<std::uint64_t> partial(std::max(1, opt.workers), 0);
  detail::parallel_ranges(prefix.size(), opt.workers, [&](std::uint64_t lo, std::uint64_t hi, int w) {
    std::uint64_t acc = 0;
    for (auto cur = prefix.cursor(lo, hi); !cur.done(); cur.next()) {
      const FieldElem* y = cur.point().data();
      UPoly g2 = s2.slice(y), g3 = s3.slice(y);
      if (g2.is_zero()) {
        acc += g3.is_zero() ? L.q() : upoly::count_roots(L, g3);
        continue;
      }
      if (g2.deg == 0) continue;
      for (auto t : upoly::find_roots(L, g2))
        if (!upoly::eval(L, g3, t).lanes) ++acc;
    }
    partial[w] = acc;
  });
  std::uint64_t total = extra;
  for (auto v : partial) total += v;
  return total;
}

/// E(X) over F_{Q}, Q = q^r, for X = V(f2 y_n + f3) in P^n:
///   E(X) = Q E(V(f2, f3)) - E(V(f2)) + Q^{n-1} [f2, f3 share a factor].
inline std::int64_t rationality_reduced_E(const ReducedCubic& R, int r, const CountOptions& opt = {}) {
  const Field& K = R.f2.field();
  PTLAB_REQUIRE(K.r() * r <= Field::kMaxDegree, "extension degree beyond the supported range");
  Field L = Field::make(K.p(), K.r() * r);
  Embedding emb(K, L);
  Form f2 = R.f2.embed(emb), f3 = R.f3.embed(emb);
  const int n = f2.nvars();
  const std::int64_t Q = static_cast<std::int64_t>(L.q());
  int D2, D23;
  std::uint64_t n2;
  if (f2.is_zero()) {
    D2 = n - 1;
    D23 = n - 2;
    n2 = projective_size(L.q(), n - 1);
  } else {
    D2 = n - 2;
    D23 = R.common_factor ? n - 2 : n - 3;
    n2 = quadric_count(f2).projective;
  }
  std::uint64_t n23 = f3.is_zero() ? n2 : count_quadric_cubic(f2, f3, opt);
  std::int64_t E23 = error_E(n23, L.q(), D23), E2 = error_E(n2, L.q(), D2);
  std::int64_t tail = R.common_factor ? static_cast<std::int64_t>(checked_pow(L.q(), n - 1)) : 0;
  return Q * E23 - E2 + tail;
}

// ---------------------------------------------------------------------------
// Section series

struct SectionOptions {
  int R = 2;
  CountOptions count;
  bool prefer_rationality = false;   // use the reduction whenever a rational singular point exists
  bool rationality_fallback = true;  // use it when the direct count exceeds the budget
  bool cross_check = true;           // compare both methods at r = 1 when the reduction is used
  int direct_r_max = 1 << 20;        // levels above this are counted only through the reduction
  bool known_smooth = false;         // caller knows there is no singular point anywhere
  SolverOptions solver;
};

struct CountSeries {
  std::uint64_t q = 0;  // base field size
  int dim = 0;          // declared dimension of the section
  std::vector<std::uint64_t> N;
  std::vector<std::int64_t> E;
  std::vector<double> rho;
  std::vector<std::string> method;  // "direct" or "rationality" per r
  bool contained = false;           // the hyperplane lies inside V(F)
  std::string note;                 // why the series stopped early, if it did

  int length() const { return static_cast<int>(E.size()); }
};

inline double rho_value(std::int64_t E, double q, int r, int dim) {
  return std::fabs(static_cast<double>(E)) / std::pow(q, r * dim / 2.0);
}

/// N_r and E_r for V(F) cut by c.x = 0, r = 1..R, over F_{q^r} where q = |field of F|.
inline CountSeries hyperplane_section_series(const Form& F, const std::vector<FieldElem>& c, const SectionOptions& opt) {
  const Field& K = F.field();
  const int m = F.nvars();
  PTLAB_REQUIRE(m >= 3, "hyperplane sections need at least three variables");
  PTLAB_REQUIRE(opt.R >= 1, "series length must be positive");
  auto res = forms::restrict_to_hyperplane(F, c);
  const Form& G = res.form;
  CountSeries S;
  S.q = K.q();
  S.dim = m - 3;
  S.contained = G.is_zero();

  // Reductions keyed by the extension degree s of the field the singular point lives in.
  std::map<int, std::optional<ReducedCubic>> reductions;
  auto reduction_at = [&](int s) -> const std::optional<ReducedCubic>& {
    auto it = reductions.find(s);
    if (it != reductions.end()) return it->second;
    std::optional<ReducedCubic> red;
    if (F.degree() == 3 && !G.is_zero() && !opt.known_smooth) {
      SolverOptions so = opt.solver;
      so.max_solutions = 1;
      Field Ls = Field::make(K.p(), K.r() * s);
      Embedding emb(K, Ls);
      auto pts = find_rational_singular_points(F.embed(emb), emb(c), so);
      if (!pts.empty()) {
        Point y;
        for (int i = 0; i < m; ++i)
          if (i != res.pivot) y.push_back(pts.front()[i]);
        red = move_singularity_to_pole(G.embed(emb), y);
      }
    }
    return reductions.emplace(s, std::move(red)).first->second;
  };
  // A singular point over F_{q^s} with s | r serves the count over F_{q^r}.
  auto reduction = [&](int r) -> std::pair<const ReducedCubic*, int> {
    for (int s = 1; s <= r; ++s)
      if (r % s == 0 && reduction_at(s)) return {&*reduction_at(s), s};
    return {nullptr, 0};
  };

  for (int r = 1; r <= opt.R; ++r) {
    if (K.r() * r > Field::kMaxDegree) {
      S.note = "r=" + std::to_string(r) + " exceeds the supported extension degree";
      break;
    }
    Field L = Field::make(K.p(), K.r() * r);
    std::uint64_t Nr = 0;
    std::int64_t Er = 0;
    std::string how = "direct";
    if (G.is_zero()) {
      Nr = projective_size(L.q(), m - 2);
      Er = error_E(Nr, L.q(), S.dim);
    } else {
      double cost = count_cost(static_cast<double>(L.q()), m - 1, G.degree());
      std::pair<const ReducedCubic*, int> red{nullptr, 0};
      if (opt.prefer_rationality) red = reduction(r);
      bool use_red = red.first != nullptr;
      if (!use_red && r > opt.direct_r_max) {
        if ((red = reduction(r)).first) {
          use_red = true;
        } else {
          S.note = "r=" + std::to_string(r) + " skipped: no singular point for the reduction";
          break;
        }
      }
      if (!use_red && cost > opt.count.budget) {
        if (opt.rationality_fallback && (red = reduction(r)).first) {
          use_red = true;
        } else {
          if (S.E.empty()) throw BudgetExceeded("section count at r=" + std::to_string(r), cost, opt.count.budget);
          S.note = "r=" + std::to_string(r) + " refused: estimate " + std::to_string(cost) + " exceeds budget";
          break;
        }
      }
      if (use_red) {
        Er = rationality_reduced_E(*red.first, r / red.second, opt.count);
        Nr = static_cast<std::uint64_t>(Er + static_cast<std::int64_t>(projective_size(L.q(), S.dim)));
        how = "rationality";
        if (r == 1 && opt.cross_check && cost <= opt.count.budget) {
          Embedding emb(K, L);
          std::uint64_t direct = count_projective({G.embed(emb)}, opt.count);
          PTLAB_ASSERT(direct == Nr, "rationality reduction disagrees with the direct count");
        }
      } else {
        Embedding emb(K, L);
        Nr = count_projective({G.embed(emb)}, opt.count);
        Er = error_E(Nr, L.q(), S.dim);
      }
    }
    S.N.push_back(Nr);
    S.E.push_back(Er);
    S.rho.push_back(rho_value(Er, static_cast<double>(K.q()), r, S.dim));
    S.method.push_back(how);
  }
  return S;
}

// ---------------------------------------------------------------------------
// Verdict

struct VerdictThresholds {
  double tau_bound = 20;
  double delta = 0.25;
  double tau_growth = 5;
};

struct Verdict {
  std::string label;  // good-consistent | bad-suspected | inconclusive
  double slope = NAN;
  double max_rho = 0;
  double last_rho = 0;
};

/// Least-squares slope of log_q |E_r| against r over the r with E_r != 0.
inline double growth_slope(const CountSeries& S) {
  std::vector<double> xs, ys;
  for (int r = 0; r < S.length(); ++r) {
    if (!S.E[r]) continue;
    xs.push_back(r + 1);
    ys.push_back(std::log(std::fabs(static_cast<double>(S.E[r]))) / std::log(static_cast<double>(S.q)));
  }
  if (xs.size() < 2) return NAN;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= xs.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

/// Growth evidence is checked before the boundedness test, so a short series at small q
/// whose errors already grow like a failing section is not reported as bounded.
inline Verdict sqrt_cancellation_verdict(const CountSeries& S, const VerdictThresholds& th = {}) {
  Verdict v;
  PTLAB_REQUIRE(S.length() >= 1, "empty series");
  for (double r : S.rho) v.max_rho = std::max(v.max_rho, r);
  v.last_rho = S.rho.back();
  v.slope = growth_slope(S);
  bool all_zero = std::all_of(S.E.begin(), S.E.end(), [](auto e) { return e == 0; });
  if (all_zero) {
    v.label = "good-consistent";
  } else if (!std::isnan(v.slope) && v.slope >= S.dim / 2.0 + th.delta && v.last_rho >= th.tau_growth) {
    v.label = "bad-suspected";
  } else if (v.max_rho <= th.tau_bound) {
    v.label = "good-consistent";
  } else {
    v.label = "inconclusive";
  }
  return v;
}

}  // namespace ptlab

#pragma once

// Projective zeros of a system of forms by chart-wise backtracking. Each variable is
// solved from the equations that become univariate in it once the earlier variables are
// fixed; when no such equation exists, all field values are tried.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ptlab/errors.hpp"
#include "ptlab/forms.hpp"
#include "ptlab/projective.hpp"
#include "ptlab/univariate.hpp"

namespace ptlab {

struct SolverOptions {
  double budget = 2e9;                      // branch evaluations before refusing
  std::size_t max_solutions = SIZE_MAX;     // stop early once this many points are found
};

namespace detail {

class ChartSolver {
 public:
  ChartSolver(const std::vector<Form>& eqs, int chart, const SolverOptions& opt, double& spent)
      : F_(eqs.front().field()), n_(eqs.front().nvars()), b_(chart), opt_(opt), spent_(spent) {
    levels_.resize(n_);
    for (const auto& E : eqs) {
      // Specialize x_b = 1, x_i = 0 for i < b.
      std::vector<Term> terms;
      int maxv = -1;
      for (const auto& [e, c] : E.terms()) {
        bool dead = false;
        for (int i = 0; i < b_; ++i)
          if (e[i]) dead = true;
        if (dead) continue;
        Term t{c, e};
        t.e[b_] = 0;
        for (int i = n_ - 1; i > b_; --i)
          if (t.e[i]) {
            maxv = std::max(maxv, i);
            break;
          }
        terms.push_back(t);
      }
      if (terms.empty()) continue;
      if (maxv < 0) {
        FieldElem s = F_.zero();
        for (auto& t : terms) s = F_.add(s, t.c);
        if (s.lanes) infeasible_ = true;
        continue;
      }
      Eq eq;
      eq.terms = std::move(terms);
      for (auto& t : eq.terms) eq.deg = std::max<int>(eq.deg, t.e[maxv]);
      PTLAB_REQUIRE(eq.deg + 1 <= UPoly::kCap, "equation degree too large for the solver");
      levels_[maxv].push_back(std::move(eq));
    }
  }

  void run(std::vector<Point>& out) {
    if (infeasible_) return;
    x_.assign(n_, F_.zero());
    x_[b_] = F_.one();
    out_ = &out;
    descend(b_ + 1);
  }

 private:
  struct Term {
    FieldElem c;
    Monomial e;
  };
  struct Eq {
    std::vector<Term> terms;
    int deg = 0;
  };

  UPoly slice(const Eq& eq, int k) const {
    UPoly P;
    for (const auto& t : eq.terms) {
      FieldElem v = t.c;
      for (int i = b_ + 1; i < k; ++i)
        for (int j = 0; j < t.e[i]; ++j) v = F_.mul(v, x_[i]);
      P.c[t.e[k]] = F_.add(P.c[t.e[k]], v);
    }
    P.deg = eq.deg;
    P.trim();
    return P;
  }

  void charge(double units) {
    spent_ += units;
    if (spent_ > opt_.budget) throw BudgetExceeded("projective zero search over F_" + std::to_string(F_.q()), spent_, opt_.budget);
  }

  void descend(int k) {
    if (out_->size() >= opt_.max_solutions) return;
    if (k == n_) {
      out_->push_back(x_);
      return;
    }
    charge(1);
    UPoly g;
    bool constrained = false;
    for (const auto& eq : levels_[k]) {
      UPoly P = slice(eq, k);
      if (P.is_zero()) continue;
      if (P.deg == 0) return;
      g = constrained ? upoly::gcd(F_, g, P) : P;
      constrained = true;
      if (g.deg == 0) return;
    }
    if (constrained) {
      for (auto v : upoly::find_roots(F_, g)) {
        x_[k] = v;
        descend(k + 1);
      }
    } else {
      charge(static_cast<double>(F_.q()));
      for (std::uint64_t i = 0; i < F_.q(); ++i) {
        x_[k] = F_.from_index(i);
        descend(k + 1);
      }
    }
    x_[k] = F_.zero();
  }

  Field F_;
  int n_, b_;
  const SolverOptions& opt_;
  double& spent_;
  bool infeasible_ = false;
  std::vector<std::vector<Eq>> levels_;
  Point x_;
  std::vector<Point>* out_ = nullptr;
};

}  // namespace detail

/// Canonical points of P^{n-1}(K) where every form vanishes, sorted by projective index.
inline std::vector<Point> find_projective_zeros(const std::vector<Form>& eqs, const SolverOptions& opt = {}) {
  PTLAB_REQUIRE(!eqs.empty(), "empty system");
  const int n = eqs.front().nvars();
  for (const auto& E : eqs) PTLAB_REQUIRE(E.nvars() == n && E.field() == eqs.front().field(), "inconsistent system");
  std::vector<Point> out;
  double spent = 0;
  for (int b = 0; b < n && out.size() < opt.max_solutions; ++b) {
    detail::ChartSolver S(eqs, b, opt, spent);
    S.run(out);
  }
  const Field& K = eqs.front().field();
  std::sort(out.begin(), out.end(), [&](const Point& a, const Point& b) { return ProjectiveSpace::index_less(K, a, b); });
  return out;
}

}  // namespace ptlab

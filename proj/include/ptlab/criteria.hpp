#pragma once

// Predicted good/bad verdicts for hyperplane sections, and the audit that compares them
// with the empirical growth verdict.

#include <string>
#include <utility>
#include <vector>

#include "ptlab/counting.hpp"
#include "ptlab/discriminant.hpp"
#include "ptlab/errors.hpp"
#include "ptlab/forms.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/univariate.hpp"

namespace ptlab {

struct CriterionVerdict {
  bool predicted_bad = false;
  std::string witness;  // empty unless predicted_bad
  std::string source;   // quadric-rank | pairing
  std::string caveat;
};

/// V(Q) in P^n with n = nvars - 1 has dimension n - 1; bad iff the rank is even and in [2, n].
inline CriterionVerdict quadric_dichotomy(const Form& Q) {
  PTLAB_REQUIRE(Q.degree() == 2, "quadric_dichotomy needs a quadratic form");
  PTLAB_REQUIRE(Q.field().p() != 2, "odd characteristic required");
  const int n = Q.nvars() - 1;
  const int rho = linalg::rank(forms::gram_matrix(Q));
  CriterionVerdict v;
  v.source = "quadric-rank";
  v.predicted_bad = rho % 2 == 0 && rho >= 2 && rho <= n;
  if (v.predicted_bad) v.witness = "rank=" + std::to_string(rho);
  return v;
}

inline CriterionVerdict diagonal_cubic_dichotomy(const DiagonalForm& P, const std::vector<FieldElem>& c, const Field& K) {
  PTLAB_REQUIRE(P.d == 3, "diagonal cubic expected");
  PTLAB_REQUIRE(K.p() != 3, "characteristic 3 is excluded");
  auto pr = pairing_criterion(P, c, K);
  CriterionVerdict v;
  v.source = "pairing";
  v.predicted_bad = pr.holds;
  if (pr.holds) v.witness = "matching " + pr.matching_string();
  v.caveat = "large characteristic assumed; p=" + std::to_string(K.p());
  return v;
}

/// Counts of V(Q) over F_{q^r}, r = 1..R, from the closed form.
inline CountSeries quadric_series(const Form& Q, int R) {
  PTLAB_REQUIRE(Q.degree() == 2 && R >= 1, "quadric_series needs a quadric and R >= 1");
  const Field& K = Q.field();
  CountSeries S;
  S.q = K.q();
  S.dim = Q.nvars() - 2;
  for (int r = 1; r <= R && K.r() * r <= Field::kMaxDegree; ++r) {
    Field L = Field::make(K.p(), K.r() * r);
    std::uint64_t N = quadric_count(Q.embed(Embedding(K, L))).projective;
    S.N.push_back(N);
    S.E.push_back(error_E(N, L.q(), S.dim));
    S.rho.push_back(rho_value(S.E.back(), static_cast<double>(K.q()), r, S.dim));
    S.method.push_back("closed-form");
  }
  return S;
}

struct PairingPlane {
  std::vector<std::pair<int, int>> matching;
  std::vector<FieldElem> mu;     // x_i = mu x_j on each matched pair, in the search field
  std::vector<Point> basis;      // m/2 spanning vectors
};

/// Planes x_i = mu_ij x_j (F_i mu^3 + F_j = 0 on every matched pair) over F_{q^s}
/// that lie in c.x = 0. c is given over K = F_q.
inline std::vector<PairingPlane> plane_search(const DiagonalForm& P, const std::vector<FieldElem>& c, const Field& K,
                                              int s) {
  const int m = P.m();
  PTLAB_REQUIRE(m == 4 || m == 6, "plane search is implemented for m in {4, 6}");
  PTLAB_REQUIRE(static_cast<int>(c.size()) == m, "coefficient vector has the wrong length");
  PTLAB_REQUIRE(s >= 1 && K.r() * s <= Field::kMaxDegree, "extension degree out of range");
  Field L = Field::make(K.p(), K.r() * s);
  Embedding emb(K, L);
  auto cl = emb(c);
  std::vector<FieldElem> Fl(m);
  for (int i = 0; i < m; ++i) {
    Fl[i] = L.from_int(P.coeffs[i]);
    PTLAB_REQUIRE(Fl[i].lanes != 0, "diagonal coefficient vanishes modulo p");
  }
  std::vector<PairingPlane> out;
  for (const auto& M : perfect_matchings(m)) {
    // roots mu with c_i mu + c_j = 0 among those of F_i mu^3 + F_j
    std::vector<std::vector<FieldElem>> choices;
    for (auto [i, j] : M) {
      UPoly f = UPoly::from({Fl[j], L.zero(), L.zero(), Fl[i]});
      std::vector<FieldElem> ok;
      for (auto mu : upoly::find_roots(L, f))
        if (L.add(L.mul(cl[i], mu), cl[j]).lanes == 0) ok.push_back(mu);
      choices.push_back(std::move(ok));
    }
    std::vector<std::size_t> pick(choices.size(), 0);
    bool any = true;
    for (const auto& ch : choices) any = any && !ch.empty();
    while (any) {
      PairingPlane pl;
      pl.matching = M;
      for (std::size_t k = 0; k < M.size(); ++k) {
        auto [i, j] = M[k];
        FieldElem mu = choices[k][pick[k]];
        pl.mu.push_back(mu);
        Point b(m, L.zero());
        b[i] = mu;
        b[j] = L.one();
        pl.basis.push_back(b);
      }
      out.push_back(std::move(pl));
      std::size_t k = choices.size();
      while (k > 0 && ++pick[k - 1] == choices[k - 1].size()) pick[--k] = 0;
      if (k == 0) break;
    }
  }
  return out;
}

struct AuditRecord {
  std::string outcome;  // agree | disagree | undecided
  bool predicted_bad = false;
  std::string label;
  std::string details;
};

inline AuditRecord consistency_audit(const CountSeries& S, const Verdict& v, const std::vector<CriterionVerdict>& preds) {
  PTLAB_REQUIRE(!preds.empty(), "no predicted verdicts to audit against");
  AuditRecord a;
  a.label = v.label;
  for (const auto& p : preds) a.predicted_bad = a.predicted_bad || p.predicted_bad;
  if (v.label == "inconclusive") {
    a.outcome = "undecided";
  } else {
    bool empirical_bad = v.label == "bad-suspected";
    a.outcome = empirical_bad == a.predicted_bad ? "agree" : "disagree";
  }
  if (a.outcome == "disagree") {
    a.details = "predicted " + std::string(a.predicted_bad ? "bad" : "good") + ", observed " + v.label + "; E=";
    for (int r = 0; r < S.length(); ++r) a.details += (r ? "," : "") + std::to_string(S.E[r]);
    for (const auto& p : preds)
      if (!p.witness.empty()) a.details += "; " + p.witness;
  }
  return a;
}

}  // namespace ptlab

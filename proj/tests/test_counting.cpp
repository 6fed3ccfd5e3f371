#include <gtest/gtest.h>

#include <random>

#include "ptlab/counting.hpp"
#include "support/oracles.hpp"

using namespace ptlab;

namespace {

Form widen(const Form& F, int nvars) {
  Form out(F.field(), nvars, F.degree());
  for (const auto& [e, c] : F.terms()) out.add_term(e, c);
  return out;
}

Form linear(const Field& K, const std::vector<FieldElem>& l) {
  Form L(K, static_cast<int>(l.size()), 1);
  for (std::size_t i = 0; i < l.size(); ++i) L.add_term(monomial_var(static_cast<int>(i)), l[i]);
  return L;
}

Matrix random_invertible(const Field& K, int n, std::mt19937_64& rng) {
  for (;;) {
    Matrix M(K, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = K.from_index(rng() % K.q());
    if (linalg::det(M).lanes) return M;
  }
}

FieldElem nonsquare(const Field& K) {
  for (std::uint64_t i = 1;; ++i)
    if (!K.is_square(K.from_index(i))) return K.from_index(i);
}

}  // namespace

TEST(Counting, PrefixCountMatchesNaive) {
  std::mt19937_64 rng(21);
  for (auto [p, r] : std::vector<std::pair<int, int>>{{5, 1}, {7, 1}, {5, 2}, {11, 1}}) {
    Field K = Field::make(p, r);
    for (int it = 0; it < 12; ++it) {
      int n = 2 + it % 3, d = 2 + it % 3;
      if (K.q() > 11 && n > 3) n = 3;
      Form F = oracle::random_form(K, n, d, rng, 2);
      ASSERT_EQ(count_projective({F}), oracle::naive_count({F}));
      Form G = oracle::random_form(K, n, 2, rng, 2);
      ASSERT_EQ(count_projective({F, G}), oracle::naive_count({F, G}));
    }
  }
}

TEST(Counting, FermatCubicSurface) {
  // Every element is a cube when p = 2 mod 3, so the surface is a bijective image of a plane.
  for (int p : {5, 11, 17}) {
    Field K = Field::make(p);
    std::uint64_t N = count_projective({forms::parse("diag:d=3;1,1,1,1").reduce(K)});
    EXPECT_EQ(N, static_cast<std::uint64_t>(p * p + p + 1));
  }
  // p = 1 mod 3: 27 rational lines, N = p^2 + 7p + 1.
  for (int p : {7, 13, 19}) {
    Field K = Field::make(p);
    std::uint64_t N = count_projective({forms::parse("diag:d=3;1,1,1,1").reduce(K)});
    EXPECT_EQ(N, oracle::naive_count({forms::parse("diag:d=3;1,1,1,1").reduce(K)}));
    EXPECT_EQ(N, static_cast<std::uint64_t>(p * p + 7 * p + 1));
  }
}

TEST(Counting, BudgetRefusal) {
  Field K = Field::make(101, 3);
  Form F = forms::parse("diag:d=3;1,1,1,1,1").reduce(K);
  CountOptions opt;
  opt.budget = 1e6;
  try {
    count_projective({F}, opt);
    FAIL() << "expected a refusal";
  } catch (const BudgetExceeded& e) {
    EXPECT_GT(e.estimate(), 1e6);
  }
}

TEST(Counting, WorkersDoNotChangeCounts) {
  Field K = Field::make(31, 1);
  Form F = forms::parse("poly:d=3;m=4;x1^3+2*x2^3-x3^3+x1*x2*x4+5*x4^3").reduce(K);
  CountOptions one, many;
  many.workers = 4;
  EXPECT_EQ(count_projective({F}, one), count_projective({F}, many));
}

TEST(Counting, ConeIdentity) {
  std::mt19937_64 rng(22);
  for (int p : {5, 7}) {
    Field K = Field::make(p);
    for (int it = 0; it < 6; ++it) {
      Form G = oracle::random_form(K, 3, 3, rng, 2);
      std::int64_t EY = error_E(count_projective({G}), K.q(), 1);
      std::int64_t EC = error_E(count_projective({widen(G, 4)}), K.q(), 2);
      EXPECT_EQ(EC, static_cast<std::int64_t>(K.q()) * EY);
    }
  }
}

TEST(Counting, QuadricClosedFormMatchesNaive) {
  std::mt19937_64 rng(23);
  for (auto [p, r] : std::vector<std::pair<int, int>>{{5, 1}, {7, 1}, {11, 1}, {5, 2}}) {
    Field K = Field::make(p, r);
    for (int it = 0; it < 40; ++it) {
      int n = 1 + it % 4;
      if (K.q() > 11 && n > 3) n = 3;
      Form Q = oracle::random_form(K, n, 2, rng, 2);
      if (it % 5 == 0) {
        // low rank: square of a linear form or a product of two
        auto l1 = oracle::random_nonzero_vec(K, n, rng), l2 = oracle::random_nonzero_vec(K, n, rng);
        Q = (it % 10 == 0) ? linear(K, l1) * linear(K, l1) : linear(K, l1) * linear(K, l2);
      }
      auto qc = quadric_count(Q);
      std::uint64_t naive = Q.is_zero() ? projective_size(K.q(), n - 1) : oracle::naive_count({Q});
      ASSERT_EQ(qc.projective, naive) << Q.to_string();
    }
  }
}

TEST(Counting, SingularPointSearchMatchesBruteForce) {
  std::mt19937_64 rng(24);
  Field K = Field::make(7);
  Form F = forms::parse("diag:d=3;1,1,1,1").reduce(K);
  for (int it = 0; it < 60; ++it) {
    auto c = oracle::random_nonzero_vec(K, 4, rng);
    if (it % 4 == 0) c = {K.one(), K.from_int(3), K.zero(), K.zero()};
    if (it % 4 == 1) c = {K.one(), K.from_int(6), K.from_int(2), K.from_int(5)};
    auto pts = find_rational_singular_points(F, c);
    std::vector<Point> brute;
    ProjectiveSpace P(K, 3);
    for (auto cur = P.cursor(); !cur.done(); cur.next()) {
      const Point& x = cur.point();
      if (F.eval(x).lanes) continue;
      FieldElem dot = K.zero();
      for (int i = 0; i < 4; ++i) dot = K.add(dot, K.mul(c[i], x[i]));
      if (dot.lanes) continue;
      auto g = F.gradient(x);
      Matrix M(K, 2, 4);
      for (int i = 0; i < 4; ++i) {
        M(0, i) = g[i];
        M(1, i) = c[i];
      }
      if (linalg::rank(M) <= 1) brute.push_back(x);
    }
    ASSERT_EQ(pts, brute);
  }
}

TEST(Counting, SingularPointSearchGeneralForms) {
  std::mt19937_64 rng(25);
  Field K = Field::make(5);
  ProjectiveSpace P(K, 3);
  for (int it = 0; it < 40; ++it) {
    Form F = oracle::random_form(K, 4, 3, rng, 2);
    auto c = oracle::random_nonzero_vec(K, 4, rng);
    if (forms::restrict_to_hyperplane(F, c).form.is_zero()) continue;
    if (it % 2 == 0) {
      // force a singular point: c proportional to grad F at a rational zero
      Point x;
      bool found = false;
      for (auto cur = P.cursor(); !cur.done() && !found; cur.next())
        if (!F.eval(cur.point()).lanes) {
          auto g = F.gradient(cur.point());
          if (std::any_of(g.begin(), g.end(), [](auto v) { return v.lanes != 0; })) {
            c = g;
            found = true;
          }
        }
    }
    std::vector<Point> brute;
    for (auto cur = P.cursor(); !cur.done(); cur.next()) {
      const Point& x = cur.point();
      if (F.eval(x).lanes) continue;
      FieldElem dot = K.zero();
      for (int i = 0; i < 4; ++i) dot = K.add(dot, K.mul(c[i], x[i]));
      if (dot.lanes) continue;
      auto g = F.gradient(x);
      bool dep = true;
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          if (K.sub(K.mul(g[i], c[j]), K.mul(g[j], c[i])).lanes) dep = false;
      if (dep) brute.push_back(x);
    }
    ASSERT_EQ(find_rational_singular_points(F, c), brute) << F.to_string();
  }
}

TEST(Counting, SingularPointsInvariantUnderScaling) {
  Field K = Field::make(13);
  Form F = forms::parse("diag:d=3;1,1,1,1").reduce(K);
  std::vector<FieldElem> c = {K.one(), K.from_int(3), K.one(), K.from_int(3)};
  auto a = find_rational_singular_points(F, c);
  for (auto& v : c) v = K.mul_int(v, 5);
  EXPECT_EQ(find_rational_singular_points(F, c), a);
  EXPECT_FALSE(a.empty());
}

// Cubics C = f2 * y_n + f3 with the singular point moved by a random change of variables.
class RationalityReduction : public ::testing::TestWithParam<int> {};

TEST_P(RationalityReduction, MatchesDirectCount) {
  const int kind = GetParam();
  std::mt19937_64 rng(100 + kind);
  for (int p : {5, 7}) {
    Field K = Field::make(p);
    for (int n : {3, 4}) {
      for (int it = 0; it < 3; ++it) {
        auto l1 = oracle::random_nonzero_vec(K, n, rng), l2 = oracle::random_nonzero_vec(K, n, rng);
        Form f2 = oracle::random_form(K, n, 2, rng);
        Form f3 = oracle::random_form(K, n, 3, rng);
        switch (kind) {
          case 1:  // rank one
            f2 = linear(K, l1) * linear(K, l1);
            break;
          case 2:  // split rank two sharing a line with f3
            f2 = linear(K, l1) * linear(K, l2);
            f3 = linear(K, l1) * oracle::random_form(K, n, 2, rng);
            break;
          case 3: {  // rank two irreducible over K, lines conjugate over K(sqrt(delta))
            Form u = linear(K, l1), v = linear(K, l2);
            f2 = u * u - (v * v).scaled(nonsquare(K));
            break;
          }
          case 4:  // f2 divides f3
            f3 = f2 * linear(K, l1);
            break;
          case 5:  // f2 vanishes identically
            f2 = Form(K, n, 2);
            break;
          case 6:  // rank one sharing its line with f3
            f2 = linear(K, l1) * linear(K, l1);
            f3 = linear(K, l1) * oracle::random_form(K, n, 2, rng);
            break;
          default:
            break;
        }
        if (f2.is_zero() && f3.is_zero()) continue;
        Form y(K, n + 1, 1);
        y.add_term(monomial_var(n), K.one());
        Form C = widen(f2, n + 1) * y + widen(f3, n + 1);
        Matrix A = random_invertible(K, n + 1, rng);
        Form CA = C.apply_linear_change(A);
        Point pole(n + 1, K.zero());
        pole[n] = K.one();
        Point s = linalg::inverse(A)->apply(pole);
        auto R = move_singularity_to_pole(CA, s);
        if (kind == 2 || kind == 4 || kind == 6) EXPECT_TRUE(R.common_factor);
        for (int r = 1; r <= 2; ++r) {
          if (n == 4 && r == 2 && p == 7) continue;
          Field L = Field::make(p, r);
          Embedding emb(K, L);
          std::int64_t direct = error_E(count_projective({CA.embed(emb)}), L.q(), n - 1);
          ASSERT_EQ(rationality_reduced_E(R, r), direct) << "kind " << kind << " p " << p << " n " << n << " r " << r;
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, RationalityReduction, ::testing::Range(0, 7));

TEST(Counting, MoveSingularityRejectsSmoothPoint) {
  Field K = Field::make(7);
  Form F = forms::parse("diag:d=3;1,1,1").reduce(K);
  Point s = {K.one(), K.neg(K.one()), K.zero()};
  EXPECT_THROW(move_singularity_to_pole(F, s), PreconditionError);
}

TEST(Counting, SectionSeriesUsesReductionConsistently) {
  Field K = Field::make(7);
  Form F = forms::parse("diag:d=3;1,1,1,1,1,1").reduce(K);
  std::vector<FieldElem> c = {K.one(), K.one(), K.one(), K.one(), K.one(), K.one()};
  SectionOptions direct, red;
  direct.R = red.R = 2;
  red.prefer_rationality = true;
  auto a = hyperplane_section_series(F, c, direct);
  auto b = hyperplane_section_series(F, c, red);
  EXPECT_EQ(a.E, b.E);
  EXPECT_EQ(b.method[1], "rationality");
}

TEST(Counting, SectionSeriesUsesExtensionSingularPoint) {
  // Singular points at [1 : -1 : +-sqrt(n) : -+sqrt(n) : 0], none of them rational over F_7.
  Field K = Field::make(7);
  Form F = forms::parse("diag:d=3;1,1,1,1,1").reduce(K);
  FieldElem n = nonsquare(K);
  std::vector<FieldElem> c = {K.one(), K.one(), n, n, K.zero()};
  EXPECT_TRUE(find_rational_singular_points(F, c).empty());
  SectionOptions direct, red;
  direct.R = red.R = 2;
  red.prefer_rationality = true;
  auto a = hyperplane_section_series(F, c, direct);
  auto b = hyperplane_section_series(F, c, red);
  EXPECT_EQ(a.E, b.E);
  EXPECT_EQ(b.method[0], "direct");
  EXPECT_EQ(b.method[1], "rationality");
}

TEST(Verdict, Labels) {
  CountSeries S;
  S.q = 31;
  S.dim = 1;
  S.E = {3, -7, 20};
  S.rho = {3 / std::sqrt(31.0), 7 / 31.0, 20 / std::pow(31.0, 1.5)};
  EXPECT_EQ(sqrt_cancellation_verdict(S).label, "good-consistent");
  S.E = {31, 961, 29791};
  S.rho = {31 / std::sqrt(31.0), 961 / 31.0, 29791 / std::pow(31.0, 1.5)};
  auto v = sqrt_cancellation_verdict(S);
  EXPECT_EQ(v.label, "bad-suspected");
  EXPECT_NEAR(v.slope, 1.0, 1e-12);
  S.E = {0, 0, 0};
  S.rho = {0, 0, 0};
  EXPECT_EQ(sqrt_cancellation_verdict(S).label, "good-consistent");
  S.E = {700, -650, 660};
  S.rho = {700 / std::sqrt(31.0), 650 / 31.0, 660 / std::pow(31.0, 1.5)};
  EXPECT_EQ(sqrt_cancellation_verdict(S).label, "inconclusive");
}

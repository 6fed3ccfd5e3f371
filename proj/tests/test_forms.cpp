#include <gtest/gtest.h>

#include <random>

#include "ptlab/forms.hpp"
#include "ptlab/linalg.hpp"
#include "support/oracles.hpp"

using namespace ptlab;

using oracle::random_form;
using oracle::random_vec;

TEST(Forms, ParseAndPrintRoundTrip) {
  IntForm D = forms::parse("diag:d=3;1,2,-3,1");
  EXPECT_TRUE(D.is_diagonal());
  EXPECT_EQ(D.to_string(), "diag:d=3;1,2,-3,1");
  IntForm P = forms::parse("poly:d=3;m=3; x1^3 - 2*x1*x2*x3 + 5*x3^3");
  EXPECT_EQ(P.nvars(), 3);
  EXPECT_EQ(forms::parse(P.to_string()), P);
  EXPECT_EQ(P.terms().at(Monomial{1, 1, 1}), -2);
}

TEST(Forms, ParseRejectsMalformedInput) {
  EXPECT_THROW(forms::parse("diag:3;1,1"), PreconditionError);
  EXPECT_THROW(forms::parse("poly:d=3;m=2;x1^2"), PreconditionError);
  EXPECT_THROW(forms::parse("poly:d=2;m=2;x3^2"), PreconditionError);
  EXPECT_THROW(forms::parse("cubic:1,1"), PreconditionError);
}

TEST(Forms, GradientAndEulerIdentity) {
  Field K = Field::make(13, 1);
  std::mt19937_64 rng(1);
  for (int it = 0; it < 50; ++it) {
    Form F = random_form(K, 4, 3, rng);
    auto x = random_vec(K, 4, rng);
    auto g = F.gradient(x);
    FieldElem euler = K.zero();
    for (int i = 0; i < 4; ++i) euler = K.add(euler, K.mul(x[i], g[i]));
    EXPECT_EQ(euler, K.mul_int(F.eval(x), 3));
  }
}

TEST(Forms, LinearChangeMatchesPointwiseEvaluation) {
  Field K = Field::make(7, 2);
  std::mt19937_64 rng(2);
  for (int it = 0; it < 30; ++it) {
    Form F = random_form(K, 4, 3, rng);
    Matrix M(K, 4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) M(i, j) = K.from_index(rng() % K.q());
    Form G = F.apply_linear_change(M);
    auto y = random_vec(K, 4, rng);
    EXPECT_EQ(G.eval(y), F.eval(M.apply(y)));
  }
}

TEST(Forms, RestrictionAgreesOnHyperplane) {
  Field K = Field::make(11, 1);
  std::mt19937_64 rng(3);
  for (int it = 0; it < 50; ++it) {
    Form F = random_form(K, 5, 3, rng);
    auto c = random_vec(K, 5, rng);
    if (it % 3 == 0) c[4] = K.zero();
    if (std::all_of(c.begin(), c.end(), [](auto v) { return v.lanes == 0; })) c[0] = K.one();
    auto R = forms::restrict_to_hyperplane(F, c);
    int last = 4;
    while (!c[last].lanes) --last;
    EXPECT_EQ(R.pivot, last);
    auto y = random_vec(K, 4, rng);
    Point x = forms::lift_from_hyperplane(K, c, R.pivot, y);
    FieldElem dot = K.zero();
    for (int i = 0; i < 5; ++i) dot = K.add(dot, K.mul(c[i], x[i]));
    EXPECT_EQ(dot.lanes, 0u);
    EXPECT_EQ(R.form.eval(y), F.eval(x));
  }
}

TEST(Forms, RestrictionIsScaleInvariant) {
  Field K = Field::make(13, 1);
  Form F = forms::parse("diag:d=3;1,1,1,1").reduce(K);
  std::vector<FieldElem> c = {K.from_int(1), K.from_int(2), K.from_int(5), K.from_int(7)};
  auto a = forms::restrict_to_hyperplane(F, c).form;
  for (auto& v : c) v = K.mul_int(v, 6);
  EXPECT_EQ(forms::restrict_to_hyperplane(F, c).form, a);
}

TEST(Forms, SlicedFormMatchesEvaluation) {
  Field K = Field::make(17, 1);
  std::mt19937_64 rng(4);
  Form F = random_form(K, 4, 3, rng);
  SlicedForm S(F);
  for (int it = 0; it < 100; ++it) {
    auto y = random_vec(K, 3, rng);
    UPoly P = S.slice(y.data());
    FieldElem t = K.from_index(rng() % K.q());
    auto x = y;
    x.push_back(t);
    EXPECT_EQ(upoly::eval(K, P, t), F.eval(x));
  }
}

TEST(Linalg, DiagonalizationIsCongruence) {
  Field K = Field::make(11, 1);
  std::mt19937_64 rng(5);
  for (int it = 0; it < 100; ++it) {
    int n = 1 + it % 5;
    Matrix B(K, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) B(i, j) = B(j, i) = (rng() % 3 == 0) ? K.zero() : K.from_index(rng() % 11);
    auto D = linalg::diagonalize_symmetric(B);
    Matrix C = D.P.transpose() * B * D.P;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) EXPECT_EQ(C(i, j), i == j ? D.diag[i] : K.zero());
    EXPECT_EQ(D.rank, linalg::rank(B));
    EXPECT_NE(linalg::det(D.P).lanes, 0u);
  }
}

TEST(Linalg, InverseAndSolve) {
  Field K = Field::make(13, 1);
  std::mt19937_64 rng(6);
  for (int it = 0; it < 50; ++it) {
    Matrix A(K, 4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) A(i, j) = K.from_index(rng() % 13);
    auto inv = linalg::inverse(A);
    EXPECT_EQ(inv.has_value(), linalg::det(A).lanes != 0);
    if (inv) EXPECT_EQ(A * *inv, Matrix::identity(K, 4));
    auto x = random_vec(K, 4, rng);
    auto sol = linalg::solve(A, A.apply(x));
    ASSERT_TRUE(sol.has_value());
    EXPECT_EQ(A.apply(*sol), A.apply(x));
  }
}

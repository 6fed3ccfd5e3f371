#include <gtest/gtest.h>

#include <random>

#include "ptlab/fermat.hpp"
#include "support/oracles.hpp"

using namespace ptlab;

namespace {

const char* kRich43 = "[[-1/2, -1/2, -1/2, 1/2], [-2, -1, 1, 1], [-1, -1, -1, 2], '---']";
const char* kRich55 =
    "[[-1, -1, -1, 1, 1], [-1, -1/2, -1/2, 1/2, 1/2], [-2, -1, -1, 1, 2], "
    "[-1/2, -1/2, -1/2, -1/2, 1], [-2, -2, 1, 1, 1], '---', "
    "[[0, 1], [0, 2], [1, 3], [2, 3], [0, 1, 2, 3]], "
    "[[0, 1], [0, 2], [3, 4], [0, 1, 3, 4], [0, 2, 3, 4]]]";

std::vector<FieldElem> ints(const Field& K, std::initializer_list<std::int64_t> v) {
  std::vector<FieldElem> out;
  for (auto x : v) out.push_back(K.from_int(x));
  return out;
}

// Random point of the Fermat fourfold with the given number of zero coordinates and a_6 != 0.
std::vector<FieldElem> random_fermat_point(const Field& K, int zeros, std::mt19937_64& rng) {
  for (;;) {
    std::vector<FieldElem> a(6, K.zero());
    for (int i = zeros; i < 5; ++i) a[i] = K.from_index(1 + rng() % (K.q() - 1));
    FieldElem s = K.zero();
    for (int i = 0; i < 5; ++i) s = K.add(s, K.mul(K.sqr(a[i]), a[i]));
    auto r = oracle::cube_root(K, K.neg(s));
    if (!r || !r->lanes) continue;
    a[5] = *r;
    std::shuffle(a.begin(), a.begin() + 5, rng);
    return a;
  }
}

}  // namespace

TEST(Fermat, RichConfigurationsMatchPrintedOutput) {
  EXPECT_EQ(rich_configurations(4, 3, 0).to_string(), kRich43);
  EXPECT_EQ(rich_configurations(5, 5, 0).to_string(), kRich55);
}

TEST(Fermat, RichConfigurationsStableModP) {
  for (int n_r : {0, 1}) {
    int n = n_r ? 5 : 4, r = n_r ? 5 : 3;
    auto q0 = rich_configurations(n, r, 0);
    for (std::int64_t p : {11, 101}) {
      auto rp = rich_configurations(n, r, p);
      auto expect = reduce_solutions(q0, p);
      // both lists are in first-found order; compare as sets of sorted residue vectors
      auto got = rp.simple_p;
      std::sort(got.begin(), got.end());
      std::sort(expect.begin(), expect.end());
      EXPECT_EQ(got, expect) << "n=" << n << " p=" << p;
      EXPECT_EQ(rp.degenerate, q0.degenerate);
    }
  }
}

TEST(Fermat, PermEquivalence) {
  IndexSystem a = {{0, 1}}, b = {{2, 3}};
  EXPECT_TRUE(perm_equivalent(a, a, 4));
  EXPECT_TRUE(perm_equivalent(a, b, 4));
  EXPECT_FALSE(perm_equivalent({{0, 1}, {0, 2}}, {{0, 1}, {2, 3}}, 4));
  // reflexive, symmetric, transitive on random systems
  std::mt19937_64 rng(51);
  std::vector<IndexSystem> sys;
  for (int it = 0; it < 12; ++it) {
    IndexSystem S;
    while (S.size() < 2) {
      IndexSet I;
      for (int i = 0; i < 4; ++i)
        if (rng() % 2) I.push_back(i);
      if (!I.empty() && std::find(S.begin(), S.end(), I) == S.end()) S.push_back(I);
    }
    sys.push_back(S);
  }
  for (auto& x : sys) {
    EXPECT_TRUE(perm_equivalent(x, x, 4));
    for (auto& y : sys) {
      EXPECT_EQ(perm_equivalent(x, y, 4), perm_equivalent(y, x, 4));
      for (auto& z : sys)
        if (perm_equivalent(x, y, 4) && perm_equivalent(y, z, 4)) EXPECT_TRUE(perm_equivalent(x, z, 4));
    }
  }
}

TEST(Fermat, ClassifyProfiles) {
  Field K = Field::make(101);
  EXPECT_EQ(classify_rich_profile(K, ints(K, {-2, -1, 1, 1, 0, 1})), RichPattern::P1);
  EXPECT_EQ(classify_rich_profile(K, ints(K, {3, -3, -3, 3, -1, 1})), RichPattern::P3);
  EXPECT_EQ(classify_rich_profile(K, ints(K, {-5, 1, 1, 1, 1, 1})), RichPattern::None);
  EXPECT_EQ(classify_rich_profile(K, ints(K, {1, 1, -2, 1, -2, 1})), RichPattern::P2);
  EXPECT_THROW(classify_rich_profile(K, ints(K, {1, 1, 1, 1, 1, 1})), PreconditionError);
  std::mt19937_64 rng(52);
  for (auto base : {std::initializer_list<std::int64_t>{-2, -1, 1, 1, 0, 1}, {-2, -2, 1, 1, 1, 1}, {7, -7, -7, 7, -1, 1},
                    {-4, 1, 1, 1, 1, 0}}) {
    auto x = ints(K, base);
    RichPattern want = classify_rich_profile(K, x);
    for (int t = 0; t < 10; ++t) {
      std::shuffle(x.begin(), x.end(), rng);
      FieldElem lam = K.from_int(1 + rng() % 100);
      auto y = x;
      for (auto& v : y) v = K.mul(v, lam);
      EXPECT_EQ(classify_rich_profile(K, y), want);
    }
  }
}

TEST(Fermat, VisionTripleFormulas) {
  Field K = Field::make(31);
  auto v = tangential_vision(K, ints(K, {0, 0, 0, 0, -1, 1}));
  EXPECT_EQ(v.f1.to_string(), forms::parse("poly:d=1;m=5;3*x5").reduce(K).to_string());
  EXPECT_EQ(v.f2.to_string(), forms::parse("poly:d=2;m=5;-3*x5^2").reduce(K).to_string());
  EXPECT_EQ(v.f3.to_string(), forms::parse("diag:d=3;1,1,1,1,1").reduce(K).to_string());
  EXPECT_THROW(tangential_vision(K, ints(K, {1, -1, 0, 0, 0, 0})), PreconditionError);
  EXPECT_THROW(tangential_vision(K, ints(K, {1, 1, 0, 0, 0, 1})), PreconditionError);
}

TEST(Fermat, VisionConeLiesOnFourfold) {
  Field K = Field::make(31);
  std::mt19937_64 rng(53);
  for (int it = 0; it < 50; ++it) {
    auto a = random_fermat_point(K, it % 3, rng);
    auto v = tangential_vision(K, a);
    SolverOptions so;
    so.max_solutions = 3;
    for (const auto& y : find_projective_zeros({v.f1, v.f2, v.f3}, so)) {
      for (int s = 0; s < 31; s += 5)
        for (int t = 1; t < 31; t += 3) {
          std::vector<FieldElem> x(6);
          for (int i = 0; i < 6; ++i) x[i] = K.mul_int(a[i], s);
          for (int i = 0; i < 5; ++i) x[i] = K.add(x[i], K.mul_int(y[i], t));
          ASSERT_EQ(fermat_value(K, x).lanes, 0u);
        }
    }
  }
}

TEST(Fermat, SingCountProfiles) {
  Field K = Field::make(31);
  auto p1 = oracle::point_with_cube_profile(K, {-2, -1, 1, 1, 0, 1});
  ASSERT_TRUE(p1.has_value());
  auto r1 = vision_sing_count(K, *p1);
  EXPECT_EQ(r1.n, 4);
  EXPECT_EQ(r1.zero_subsets.size(), 16u);
  EXPECT_EQ(r1.sing_count, 3);
  auto p2 = oracle::point_with_cube_profile(K, {-2, -2, 1, 1, 1, 1});
  ASSERT_TRUE(p2.has_value());
  auto r2 = vision_sing_count(K, *p2);
  EXPECT_EQ(r2.zero_subsets.size(), 14u);
  EXPECT_EQ(r2.sing_count, 6);
  std::mt19937_64 rng(55);
  for (int it = 0; it < 20; ++it) {
    auto g = random_fermat_point(K, 0, rng);
    auto rg = vision_sing_count(K, g);
    if (rg.zero_subsets.size() == 2) EXPECT_EQ(rg.sing_count, 0);
  }
  EXPECT_FALSE(vision_sing_count(K, ints(K, {1, -1, 0, 0, 0, 0})).applicable);
}

TEST(Fermat, SingCountMatchesBruteForce) {
  std::mt19937_64 rng(54);
  for (int p : {7, 13}) {
    Field K = Field::make(p);
    for (int it = 0; it < 6; ++it) {
      auto a = random_fermat_point(K, p == 7 ? 0 : it % 2, rng);  // no n = 4 points over F_7
      auto f = vision_sing_count(K, a);
      auto b = vision_sing_bruteforce(K, a, 2);
      EXPECT_TRUE(b.stabilized);
      EXPECT_EQ(b.count, f.sing_count) << "p=" << p;
    }
  }
  Field K = Field::make(31);
  auto p1 = *oracle::point_with_cube_profile(K, {-2, -1, 1, 1, 0, 1});
  std::swap(p1[4], p1[0]);  // keep a_6 != 0
  EXPECT_EQ(vision_sing_bruteforce(K, p1, 2).count, 3);
}

TEST(Fermat, ScrollScreen) {
  Field K = Field::make(31);
  std::mt19937_64 rng(56);
  std::vector<FieldElem> g;
  do g = random_fermat_point(K, 0, rng);
  while (vision_sing_count(K, g).zero_subsets.size() != 2);
  auto s = scroll_screen(K, g);
  EXPECT_EQ(s.n, 5);
  EXPECT_EQ(s.verdict, "scroll-impossible");
  auto p2 = *oracle::point_with_cube_profile(K, {-2, -2, 1, 1, 1, 1});
  auto t = scroll_screen(K, p2);
  EXPECT_EQ(t.pattern, RichPattern::P2);
  EXPECT_EQ(t.verdict, "scroll-unexcluded");
  auto u = scroll_screen(K, ints(K, {1, -1, 1, -1, 0, 0}));
  EXPECT_EQ(u.n, 3);
  EXPECT_EQ(u.verdict, "scroll-impossible");
  auto n2 = scroll_screen(K, *oracle::point_with_cube_profile(K, {1, 1, -2, 0, 0, 0}));
  EXPECT_EQ(n2.n, 2);
  EXPECT_EQ(n2.verdict, "scroll-impossible");
  auto w = scroll_screen(K, ints(K, {1, -1, 0, 0, 0, 0}));
  EXPECT_EQ(w.n, 1);
  EXPECT_EQ(w.verdict, "scroll-unexcluded");
}

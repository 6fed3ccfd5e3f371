#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ptlab/moments.hpp"
#include "support/oracles.hpp"

using namespace ptlab;

namespace {

IntForm random_int_form(int n, int d, std::mt19937_64& rng) {
  IntForm G(n, d);
  for (auto& e : oracle::all_monomials(n, d)) G.add_term(e, static_cast<std::int64_t>(rng() % 7) - 3);
  return G;
}

Form linear_form(const Field& K, const std::vector<FieldElem>& c) {
  Form L(K, static_cast<int>(c.size()), 1);
  for (std::size_t i = 0; i < c.size(); ++i) L.add_term(monomial_var(static_cast<int>(i)), c[i]);
  return L;
}

// E_c over F_{p^r} from enumerating all of P^{m-1}(F_{p^r}).
std::int64_t naive_E(const Form& F, const std::vector<FieldElem>& c, int r) {
  const Field& K = F.field();
  Field L = Field::make(K.p(), r);
  Embedding e(K, L);
  std::uint64_t N = oracle::naive_count({F.embed(e), linear_form(K, c).embed(e)});
  return static_cast<std::int64_t>(N) - static_cast<std::int64_t>(projective_size(L.q(), F.nvars() - 3));
}

// Norm form of F_{p^3}/F_p in the basis 1, t, t^2, recovered by interpolation.
IntForm norm_form(std::uint32_t p) {
  Field K = Field::make(p), L = Field::make(p, 3);
  auto monos = oracle::all_monomials(3, 3);
  std::mt19937_64 rng(7);
  const int n = static_cast<int>(monos.size());
  for (;;) {
    Matrix A(K, n, n);
    std::vector<FieldElem> b(n);
    for (int row = 0; row < n; ++row) {
      std::vector<std::uint32_t> x = {static_cast<std::uint32_t>(rng() % p), static_cast<std::uint32_t>(rng() % p),
                                      static_cast<std::uint32_t>(rng() % p)};
      FieldElem a = L.from_coeffs(x);
      FieldElem nm = L.pow(a, 1 + p + static_cast<std::uint64_t>(p) * p);
      b[row] = K.from_int(L.coeff(nm, 0));
      for (int j = 0; j < n; ++j) {
        FieldElem v = K.one();
        for (int i = 0; i < 3; ++i) v = K.mul(v, K.pow(K.from_int(x[i]), monos[j][i]));
        A(row, j) = v;
      }
    }
    auto sol = linalg::solve(A, b);
    if (!sol || linalg::rank(A) < n) continue;
    IntForm G(3, 3);
    for (int j = 0; j < n; ++j) G.add_term(monos[j], static_cast<std::int64_t>(K.index((*sol)[j])));
    return G;
  }
}

ScanConfig config(const IntForm& G, std::uint32_t p, ScanMode mode, int R = 1) {
  ScanConfig cfg;
  cfg.G = G;
  cfg.p = p;
  cfg.mode = mode;
  cfg.R = R;
  return cfg;
}

std::string csv_of(const ETable& t) {
  std::string s = csv_header(t.config.G.nvars(), t.config.R) + "\n";
  for (const auto& r : t.rows) s += csv_row(t.config, r) + "\n";
  return s;
}

}  // namespace

TEST(Moments, EntryCounts) {
  IntForm G = DiagonalForm::fermat(3).to_int_form();
  auto full = scan_E_table(config(G, 7, ScanMode::full));
  EXPECT_EQ(full.rows.size(), 342u);
  EXPECT_EQ(full.represented(), 342u);
  auto proj = scan_E_table(config(G, 7, ScanMode::projective));
  EXPECT_EQ(proj.rows.size(), 57u);
  EXPECT_EQ(proj.represented(), 342u);
  // every nonzero vector appears once in full mode
  std::set<std::vector<std::uint32_t>> seen;
  for (const auto& r : full.rows) seen.insert(r.c);
  EXPECT_EQ(seen.size(), 342u);
}

TEST(Moments, EntriesMatchNaiveCounts) {
  std::mt19937_64 rng(61);
  for (int it = 0; it < 3; ++it) {
    IntForm G = random_int_form(4, it == 2 ? 2 : 3, rng);
    auto cfg = config(G, 5, ScanMode::projective, 2);
    cfg.orbit_cache = false;
    ETable t = scan_E_table(cfg);
    Field K = Field::make(5);
    Form F = G.reduce(K);
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      const auto& row = t.rows[k];
      std::vector<FieldElem> c;
      for (auto v : row.c) c.push_back(K.from_index(v));
      ASSERT_EQ(row.E.size(), 2u);
      EXPECT_EQ(row.E[0], naive_E(F, c, 1));
      if (k % 13 == 0) EXPECT_EQ(row.E[1], naive_E(F, c, 2));
    }
  }
}

TEST(Moments, ScalingInvariance) {
  std::mt19937_64 rng(62);
  Field K = Field::make(11);
  IntForm G = random_int_form(4, 3, rng);
  ScanContext ctx(config(G, 11, ScanMode::projective, 2));
  for (int it = 0; it < 20; ++it) {
    auto c = oracle::random_nonzero_vec(K, 4, rng);
    auto lc = c;
    FieldElem lam = K.from_int(2 + rng() % 9);
    for (auto& x : lc) x = K.mul(x, lam);
    auto a = ctx.evaluate(c), b = ctx.evaluate(lc);
    EXPECT_EQ(a.E, b.E);
    EXPECT_EQ(a.disc_zero, b.disc_zero);
  }
}

TEST(Moments, OrbitCacheDoesNotChangeResults) {
  for (auto coeffs : {std::vector<std::int64_t>{1, 1, 1, 1}, std::vector<std::int64_t>{1, 2, 1, 3}}) {
    IntForm G = DiagonalForm{3, coeffs}.to_int_form();
    auto a = config(G, 13, ScanMode::projective, 2);
    auto b = a;
    b.orbit_cache = false;
    ScanContext ctx(a);
    ETable ta = scan_E_table(a), tb = scan_E_table(b);
    EXPECT_EQ(csv_of(ta), csv_of(tb));
    scan_items(ctx, 0, ctx.item_count(), 1);
    EXPECT_LT(ctx.cache_size(), ctx.item_count() / 4);
  }
}

TEST(Moments, SamplingIsReproducibleAndPartitionIndependent) {
  IntForm G = DiagonalForm{3, {1, 2, 3, 4}}.to_int_form();
  auto cfg = config(G, 31, ScanMode::sample, 2);
  cfg.samples = 60;
  cfg.seed = 99;
  ETable a = scan_E_table(cfg, 1), b = scan_E_table(cfg, 4);
  EXPECT_EQ(csv_of(a), csv_of(b));
  ScanContext ctx(cfg);
  auto head = scan_items(ctx, 0, 25, 2), tail = scan_items(ctx, 25, 60, 3);
  head.insert(head.end(), tail.begin(), tail.end());
  ETable c = a;
  c.rows = head;
  EXPECT_EQ(csv_of(a), csv_of(c));
  cfg.seed = 100;
  EXPECT_NE(csv_of(scan_E_table(cfg)), csv_of(a));
  for (const auto& r : a.rows) EXPECT_EQ(r.weight, 1u);
}

TEST(Moments, MomentEdgeCases) {
  ETable t;
  t.config = config(DiagonalForm::fermat(4).to_int_form(), 7, ScanMode::projective);
  for (int i = 0; i < 400; ++i) {
    ETableRow r;
    r.weight = 6;
    r.E = {0};
    t.rows.push_back(r);
  }
  EXPECT_EQ(moment_M(t, 2).exact_value, 0);
  EXPECT_EQ(moment_M(t, 3.5).value, 0);
  EXPECT_EQ(moment_M(t, 0).exact_value, 2400);
  EXPECT_EQ(superlevel_S(t, 1e9), 0u);
  // sigma = 0 counts every nonzero c
  auto real = scan_E_table(config(DiagonalForm::fermat(4).to_int_form(), 7, ScanMode::projective));
  EXPECT_EQ(moment_M(real, 0).exact_value, 7 * 7 * 7 * 7 - 1);
  auto rows = exponent_ladder(real.config, {7, 11}, {0});
  for (const auto& r : rows) EXPECT_NEAR(r.e, 4.0, 1e-12);
}

TEST(Moments, SecondMomentReconcilesWithIdentity) {
  // m = 3: E_c = #W_c - 1, so sum_{c != 0} E_c^2 follows from the second and first
  // identities once the c = 0 term is removed.
  std::mt19937_64 rng(63);
  for (int it = 0; it < 4; ++it) {
    IntForm G = it == 0 ? DiagonalForm::fermat(3).to_int_form() : random_int_form(3, 3, rng);
    const std::int64_t p = 7;
    ETable t = scan_E_table(config(G, p, ScanMode::full));
    Field K = Field::make(p);
    Form F = G.reduce(K);
    BigInt direct = 0;
    oracle::for_each_vector(K, 3, [&](const std::vector<FieldElem>& c) {
      if (std::all_of(c.begin(), c.end(), [](auto x) { return x.lanes == 0; })) return;
      std::int64_t e = naive_E(F, c, 1);
      direct += BigInt(e) * e;
    });
    EXPECT_EQ(moment_M(t, 2).exact_value, BigRational(direct));
    auto id2 = identity_second_moment(G, p);
    ASSERT_TRUE(id2.equal);
    BigInt W = oracle::naive_count({F});
    BigRational via = id2.rhs * (p * p * p) - W * W - 2 * (W * p * p - W) + (p * p * p - 1);
    EXPECT_EQ(moment_M(t, 2).exact_value, via);
  }
}

TEST(Moments, FloatMomentsStable) {
  auto t = scan_E_table(config(DiagonalForm{3, {1, 2, 3, 5}}.to_int_form(), 13, ScanMode::projective));
  for (double s : {1.0, 3.0, 2.5, 4.0}) {
    double a = moment_M(t, s, false).value, b = moment_M(t, s, true).value;
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::fabs(a)));
  }
  // exact and float paths agree for even sigma
  auto ex = moment_M(t, 4);
  ASSERT_TRUE(ex.exact);
  double fl = 0;
  for (const auto& r : t.rows) fl += r.weight * std::pow(std::fabs(static_cast<double>(r.E[0])) / std::sqrt(13.0), 4);
  EXPECT_NEAR(ex.value, fl, 1e-9 * fl);
}

TEST(Moments, SuperlevelMatchesDefinition) {
  auto t = scan_E_table(config(DiagonalForm::fermat(4).to_int_form(), 13, ScanMode::projective));
  for (double eps : {0.0, 0.25, 0.5, 0.3}) {
    std::uint64_t want = 0;
    for (const auto& r : t.rows)
      if (std::fabs(static_cast<double>(r.E[0])) >= std::pow(13.0, eps + 0.5) * (1 - 1e-12)) want += r.weight;
    EXPECT_EQ(superlevel_S(t, eps), want) << eps;
  }
  // at p = 13 every pairing c in this table clears the 0.25 level
  std::uint64_t pairing = 0, hit = 0;
  for (const auto& r : t.rows)
    if (r.pairing != "none") {
      pairing += r.weight;
      hit += std::pow(std::fabs(static_cast<double>(r.E[0])), 4) >= std::pow(13.0, 3) ? r.weight : 0;
    }
  EXPECT_GT(pairing, 0u);
  EXPECT_LE(hit, superlevel_S(t, 0.25));
}

TEST(Moments, IdentitiesHoldOnBattery) {
  std::mt19937_64 rng(64);
  int n = 0;
  for (std::uint32_t p : {5u, 7u, 11u, 13u})
    for (int d : {2, 3})
      for (int m : {3, 4}) {
        if (p == 13 && m == 4 && d == 2) continue;
        IntForm G = random_int_form(m, d, rng);
        if (G.reduce(Field::make(p)).is_zero()) continue;
        for (auto rep : {identity_first_moment(G, p), identity_second_moment(G, p), identity_qsquare(G, p)})
          EXPECT_TRUE(rep.equal) << rep.id << " " << G.to_string() << " p=" << p << " " << rep.details;
        ++n;
      }
  EXPECT_GE(n, 15);
}

TEST(Moments, IdentitySidesAgainstNaiveSums) {
  IntForm G = DiagonalForm::fermat(3).to_int_form();
  const std::int64_t p = 5;
  Field K = Field::make(p), L = Field::make(p, 2);
  Form F = G.reduce(K);
  BigInt s1 = 0, s2 = 0, s3 = 0;
  oracle::for_each_vector(K, 3, [&](const std::vector<FieldElem>& c) {
    BigInt n = oracle::naive_count({F, linear_form(K, c)});
    Embedding e(K, L);
    BigInt n2 = oracle::naive_count({F.embed(e), linear_form(K, c).embed(e)});
    s1 += n;
    s2 += n * n;
    s3 += n2;
  });
  EXPECT_EQ(identity_first_moment(G, p).lhs, BigRational(s1, 125));
  EXPECT_EQ(identity_second_moment(G, p).lhs, BigRational(s2, 125));
  auto q = identity_qsquare(G, p);
  EXPECT_EQ(q.lhs, BigRational(s3, 125));
  EXPECT_TRUE(q.equal) << q.details;
}

TEST(Moments, IdentitiesWithEmptyW) {
  for (std::uint32_t p : {5u, 7u}) {
    IntForm N = norm_form(p);
    Form F = N.reduce(Field::make(p));
    ASSERT_EQ(oracle::naive_count({F}), 0u);
    auto a = identity_first_moment(N, p);
    EXPECT_TRUE(a.equal);
    EXPECT_EQ(a.lhs, 0);
    EXPECT_TRUE(identity_second_moment(N, p).equal);
    auto q = identity_qsquare(N, p);
    EXPECT_TRUE(q.equal) << q.details;
    EXPECT_EQ(q.lhs, 0);  // an F_{p^2} point would lie on two conjugate lines, hence be rational
  }
}

TEST(Moments, CsvFormat) {
  auto cfg = config(DiagonalForm::fermat(4).to_int_form(), 7, ScanMode::projective, 2);
  EXPECT_EQ(csv_header(4, 2), "p,m,d,form,c1,c2,c3,c4,disc_zero,pairing,E1,E2,rho1,rho2,verdict,note");
  ScanContext ctx(cfg);
  auto row = ctx.compute_item(0).front();
  std::string s = csv_row(cfg, row);
  EXPECT_EQ(s.rfind("7,4,3,\"diag:d=3;1,1,1,1\",1,0,0,0,0,none,", 0), 0u) << s;
  EXPECT_EQ(std::count(s.begin(), s.end(), ','), 18);
}

TEST(Moments, SkippedLevelsAreAnnotated) {
  // m = 6: level 2 only through the reduction, so smooth sections stop at r = 1.
  auto cfg = config(DiagonalForm::fermat(6).to_int_form(), 7, ScanMode::sample, 2);
  cfg.samples = 12;
  ETable t = scan_E_table(cfg);
  for (const auto& r : t.rows) {
    if (r.disc_zero) {
      EXPECT_EQ(r.E.size(), 2u);
    } else {
      EXPECT_EQ(r.E.size(), 1u);
      EXPECT_NE(r.note.find("r=2 skipped"), std::string::npos);
    }
  }
  auto smooth = std::find_if(t.rows.begin(), t.rows.end(), [](const auto& r) { return !r.disc_zero; });
  ASSERT_NE(smooth, t.rows.end());
  EXPECT_NE(csv_row(cfg, *smooth).find(",,"), std::string::npos);
}

TEST(Moments, BudgetRefusal) {
  auto cfg = config(DiagonalForm::fermat(4).to_int_form(), 101, ScanMode::full, 3);
  cfg.scan_budget = 1e6;
  try {
    scan_E_table(cfg);
    FAIL();
  } catch (const BudgetExceeded& e) {
    EXPECT_GT(e.estimate(), 1e6);
  }
}

TEST(Moments, DashboardResidualsShrink) {
  auto cfg = config(DiagonalForm::fermat(4).to_int_form(), 0, ScanMode::projective);
  auto db = corollary_dashboard(cfg, {3, 7, 13, 19, 31});
  ASSERT_EQ(db.rows.size(), 5u);
  EXPECT_TRUE(db.rows[0].skipped);
  EXPECT_EQ(db.expected_rate, "O(p^-1)");
  for (std::size_t i = 1; i < db.rows.size(); ++i) {
    EXPECT_FALSE(db.rows[i].skipped);
    EXPECT_TRUE(db.rows[i].stat2_available);
  }
  EXPECT_LT(std::fabs(db.rows.back().r2), std::fabs(db.rows[1].r2));
  EXPECT_LT(std::fabs(db.rows.back().r3), std::fabs(db.rows[1].r3));
  EXPECT_LT(db.trend_slope[1], 0);
  EXPECT_LT(db.trend_slope[2], 0);
}

#pragma once

// Tables of E_c over c-space, the moments and super-level sets built from them, the exact
// double-counting identities, and the residual dashboard.
//
// Conventions: moments and level sets sum over c != 0. Expectations (identities and the
// dashboard) average over all of F_p^m, c = 0 included, where W_0 = W.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ptlab/counting.hpp"
#include "ptlab/discriminant.hpp"
#include "ptlab/errors.hpp"
#include "ptlab/forms.hpp"
#include "ptlab/projective.hpp"

namespace ptlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

enum class ScanMode { full, projective, sample };

inline std::string to_string(ScanMode m) {
  switch (m) {
    case ScanMode::full: return "full";
    case ScanMode::projective: return "projective";
    case ScanMode::sample: return "sample";
  }
  return "?";
}

inline ScanMode parse_scan_mode(const std::string& s) {
  if (s == "full") return ScanMode::full;
  if (s == "projective") return ScanMode::projective;
  if (s == "sample") return ScanMode::sample;
  throw PreconditionError("unknown scan mode '" + s + "'");
}

struct ScanConfig {
  IntForm G;
  std::uint32_t p = 0;
  ScanMode mode = ScanMode::projective;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  int R = 1;                      // E_c(p^r) for r = 1..R
  int s_max = 6;                  // geometric singularity search depth
  bool prefer_rationality = true;
  int direct_r_max = 0;           // 0: every level when m <= 4, only r = 1 otherwise
  bool orbit_cache = true;
  VerdictThresholds thresholds;
  double count_budget = 2e9;      // per point count
  double scan_budget = 1e13;      // whole scan, checked before any work
  SolverOptions solver;
};

struct ETableRow {
  std::vector<std::uint32_t> c;
  std::uint64_t weight = 1;  // vectors of F_p^m this row stands for
  bool disc_zero = false;
  std::string pairing;       // matching, "none", or "n/a"
  std::vector<std::int64_t> E;
  std::vector<double> rho;
  std::string verdict;
  std::string note;
};

struct ETable {
  ScanConfig config;
  std::vector<ETableRow> rows;

  std::uint64_t represented() const {
    std::uint64_t s = 0;
    for (const auto& r : rows) s += r.weight;
    return s;
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// The k-th sampled nonzero vector; depends only on (seed, k).
inline Point sample_vector(const Field& K, int m, std::uint64_t seed, std::uint64_t k) {
  const std::uint64_t base = splitmix64(seed ^ splitmix64(k));
  for (std::uint64_t attempt = 0;; ++attempt) {
    Point c(m);
    bool nz = false;
    for (int i = 0; i < m; ++i) {
      std::uint64_t h = splitmix64(base + attempt * static_cast<std::uint64_t>(m) + i);
      auto v = static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * K.q()) >> 64);
      c[i] = K.from_index(v);
      nz = nz || v != 0;
    }
    if (nz) return c;
  }
}

/// Per-c work: disc flag, pairing, series and verdict. Thread-safe.
class ScanContext {
 public:
  explicit ScanContext(const ScanConfig& cfg) : cfg_(cfg) {
    PTLAB_REQUIRE(cfg.p >= 2, "a prime is required");
    PTLAB_REQUIRE(cfg.R >= 1, "rmax must be positive");
    K_ = Field::make(cfg.p);
    F_ = cfg.G.reduce(K_);
    m_ = F_.nvars();
    PTLAB_REQUIRE(m_ >= 3, "hyperplane sections need m >= 3");
    PTLAB_REQUIRE(!F_.is_zero(), "the form vanishes modulo p");
    PTLAB_REQUIRE(cfg.mode != ScanMode::sample || cfg.samples > 0, "sample mode needs a positive sample count");
    auto dc = cfg.G.diagonal_coefficients();
    bool diag = !dc.empty() && std::none_of(dc.begin(), dc.end(), [&](std::int64_t a) { return K_.from_int(a).lanes == 0; });
    if (diag) {
      diag_ = DiagonalForm{cfg.G.degree(), dc};
      // twists x_i -> zeta x_i and swaps of equal coefficients preserve F
      for (std::uint64_t i = 1; i < K_.q(); ++i) {
        FieldElem z = K_.from_index(i);
        if (K_.pow(z, diag_->d) == K_.one()) roots_.push_back(z);
      }
      std::map<std::uint64_t, std::vector<int>> by_coeff;
      for (int i = 0; i < m_; ++i) by_coeff[K_.index(K_.from_int(dc[i]))].push_back(i);
      for (auto& [k, v] : by_coeff) groups_.push_back(v);
    }
    direct_r_max_ = cfg.direct_r_max > 0 ? cfg.direct_r_max : (m_ <= 4 ? cfg.R : 1);
  }

  const ScanConfig& config() const { return cfg_; }
  const Field& field() const { return K_; }
  const Form& form() const { return F_; }
  int m() const { return m_; }
  bool diagonal() const { return diag_.has_value(); }
  int direct_r_max() const { return direct_r_max_; }

  std::uint64_t item_count() const {
    if (cfg_.mode == ScanMode::sample) return cfg_.samples;
    return projective_size(K_.q(), m_ - 1);
  }

  /// Upper bound in count units; the orbit cache only lowers the real cost.
  double cost_estimate() const {
    double per = 0;
    for (int r = 1; r <= std::min(cfg_.R, direct_r_max_); ++r)
      per += count_cost(std::pow(static_cast<double>(K_.q()), r), m_ - 1, F_.degree());
    return per * static_cast<double>(item_count());
  }

  void check_budget() const {
    double est = cost_estimate();
    if (est > cfg_.scan_budget) throw BudgetExceeded("E table scan", est, cfg_.scan_budget);
  }

  Point item_vector(std::uint64_t k) const {
    if (cfg_.mode == ScanMode::sample) return sample_vector(K_, m_, cfg_.seed, k);
    return ProjectiveSpace(K_, m_ - 1).point(k);
  }

  /// Rows produced by item k: p - 1 scalar multiples in full mode, one row otherwise.
  std::vector<ETableRow> compute_item(std::uint64_t k) const {
    Point c = item_vector(k);
    ETableRow base = evaluate(c);
    if (cfg_.mode == ScanMode::projective) base.weight = K_.q() - 1;
    if (cfg_.mode != ScanMode::full) return {base};
    std::vector<ETableRow> out;
    out.reserve(K_.q() - 1);
    for (std::uint64_t l = 1; l < K_.q(); ++l) {
      ETableRow row = base;
      FieldElem lam = K_.from_index(l);
      for (int i = 0; i < m_; ++i) row.c[i] = static_cast<std::uint32_t>(K_.index(K_.mul(lam, c[i])));
      out.push_back(std::move(row));
    }
    return out;
  }

  ETableRow evaluate(const Point& c) const {
    ETableRow row;
    for (auto x : c) row.c.push_back(static_cast<std::uint32_t>(K_.index(x)));
    if (diag_ && diag_->d == 3 && K_.p() != 3) {
      row.disc_zero = eval_diag_disc(*diag_, c, K_).value.lanes == 0;
    } else {
      row.disc_zero = disc_vanish_geometric(F_, c, cfg_.s_max, cfg_.solver).vanishes;
    }
    if (diag_ && diag_->d == 3 && K_.p() != 3 && (m_ == 4 || m_ == 6)) {
      auto pr = pairing_criterion(*diag_, c, K_);
      row.pairing = pr.holds ? pr.matching_string() : "none";
    } else {
      row.pairing = "n/a";
    }
    const bool smooth_known = diag_ && diag_->d == 3 && K_.p() != 3 && !row.disc_zero;
    const Cached s = series_for(c, smooth_known);
    row.E = s.E;
    row.rho = s.rho;
    row.verdict = s.verdict;
    row.note = s.note;
    return row;
  }

  /// Canonical representative of c under scaling and, for diagonal forms, coordinate twists
  /// by d-th roots of unity and swaps of coordinates with equal coefficients.
  std::vector<std::uint64_t> orbit_key(const Point& c) const {
    if (!diag_ || !cfg_.orbit_cache) {
      Point n = ProjectiveSpace::normalize(K_, c);
      std::vector<std::uint64_t> key;
      for (auto x : n) key.push_back(K_.index(x));
      return key;
    }
    std::vector<std::uint64_t> best, cur(m_);
    for (std::uint64_t l = 1; l < K_.q(); ++l) {
      FieldElem lam = K_.from_index(l);
      for (int i = 0; i < m_; ++i) {
        std::uint64_t lo = UINT64_MAX;
        for (auto z : roots_) lo = std::min(lo, K_.index(K_.mul(K_.mul(lam, z), c[i])));
        cur[i] = lo;
      }
      for (const auto& g : groups_) {
        std::vector<std::uint64_t> vals;
        for (int i : g) vals.push_back(cur[i]);
        std::sort(vals.begin(), vals.end());
        for (std::size_t t = 0; t < g.size(); ++t) cur[g[t]] = vals[t];
      }
      if (best.empty() || cur < best) best = cur;
    }
    return best;
  }

  std::size_t cache_size() const {
    std::shared_lock lk(mu_);
    return cache_.size();
  }

 private:
  struct Cached {
    std::vector<std::int64_t> E;
    std::vector<double> rho;
    std::string verdict, note;
  };

  Cached series_for(const Point& c, bool smooth_known) const {
    auto key = orbit_key(c);
    {
      std::shared_lock lk(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    // Work on the representative so the stored value does not depend on which c came first.
    Point rep(m_);
    for (int i = 0; i < m_; ++i) rep[i] = K_.from_index(key[i]);
    SectionOptions so;
    so.R = cfg_.R;
    so.count.budget = cfg_.count_budget;
    so.prefer_rationality = cfg_.prefer_rationality;
    so.direct_r_max = direct_r_max_;
    so.known_smooth = smooth_known;
    so.solver = cfg_.solver;
    auto S = hyperplane_section_series(F_, rep, so);
    Cached out;
    out.E = S.E;
    out.rho = S.rho;
    out.verdict = sqrt_cancellation_verdict(S, cfg_.thresholds).label;
    out.note = S.contained ? "hyperplane contained in V(F)" : S.note;
    std::unique_lock lk(mu_);
    return cache_.emplace(std::move(key), std::move(out)).first->second;
  }

  ScanConfig cfg_;
  Field K_;
  Form F_;
  int m_ = 0;
  int direct_r_max_ = 1;
  std::optional<DiagonalForm> diag_;
  std::vector<FieldElem> roots_;
  std::vector<std::vector<int>> groups_;
  mutable std::shared_mutex mu_;
  mutable std::map<std::vector<std::uint64_t>, Cached> cache_;
};

/// Runs items [begin, end) on `workers` threads; rows come back in item order.
inline std::vector<ETableRow> scan_items(const ScanContext& ctx, std::uint64_t begin, std::uint64_t end, int workers) {
  std::vector<std::vector<ETableRow>> parts(end - begin);
  std::atomic<std::uint64_t> next{begin};
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&] {
    try {
      for (std::uint64_t k; (k = next++) < end;) parts[k - begin] = ctx.compute_item(k);
    } catch (...) {
      std::lock_guard lk(err_mu);
      if (!err) err = std::current_exception();
      next = end;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::max(1, workers); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  std::vector<ETableRow> rows;
  for (auto& p : parts)
    for (auto& r : p) rows.push_back(std::move(r));
  return rows;
}

inline ETable scan_E_table(const ScanConfig& cfg, int workers = 1) {
  ScanContext ctx(cfg);
  ctx.check_budget();
  ETable t;
  t.config = cfg;
  t.rows = scan_items(ctx, 0, ctx.item_count(), workers);
  return t;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_header(int m, int R) {
  std::string h = "p,m,d,form";
  for (int i = 1; i <= m; ++i) h += ",c" + std::to_string(i);
  h += ",disc_zero,pairing";
  for (int r = 1; r <= R; ++r) h += ",E" + std::to_string(r);
  for (int r = 1; r <= R; ++r) h += ",rho" + std::to_string(r);
  return h + ",verdict,note";
}

inline std::string csv_row(const ScanConfig& cfg, const ETableRow& row) {
  std::string s = std::to_string(cfg.p) + "," + std::to_string(cfg.G.nvars()) + "," + std::to_string(cfg.G.degree()) +
                  ",\"" + cfg.G.to_string() + "\"";
  for (auto v : row.c) s += "," + std::to_string(v);
  s += row.disc_zero ? ",1," : ",0,";
  s += row.pairing;
  for (int r = 0; r < cfg.R; ++r) s += "," + (r < static_cast<int>(row.E.size()) ? std::to_string(row.E[r]) : "");
  char buf[64];
  for (int r = 0; r < cfg.R; ++r) {
    s += ",";
    if (r < static_cast<int>(row.rho.size())) {
      std::snprintf(buf, sizeof buf, "%.6f", row.rho[r]);
      s += buf;
    }
  }
  s += "," + row.verdict + ",";
  if (!row.note.empty()) s += "\"" + row.note + "\"";
  return s;
}

// ---------------------------------------------------------------------------
// Moments and level sets

namespace detail {

inline double neumaier_sum(const std::vector<double>& xs) {
  double s = 0, comp = 0;
  for (double x : xs) {
    double t = s + x;
    comp += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + comp;
}

inline bool even_integer(double s) { return s >= 0 && s == std::floor(s) && std::fmod(s, 2.0) == 0 && s <= 64; }

inline BigInt big_pow(std::uint64_t b, unsigned e) { return boost::multiprecision::pow(BigInt(b), e); }

}  // namespace detail

struct MomentValue {
  double sigma = 0;
  bool exact = false;
  bool estimated = false;  // sample mode: scaled up to the full c-space
  BigRational exact_value = 0;
  double value = 0;
};

/// sum_{c != 0} |E_c(p) / p^{(m-3)/2}|^sigma, with 0^0 = 1.
inline MomentValue moment_M(const ETable& t, double sigma, bool sorted_summation = false) {
  const std::uint64_t p = t.config.p;
  const int m = t.config.G.nvars();
  MomentValue out;
  out.sigma = sigma;
  out.estimated = t.config.mode == ScanMode::sample;
  BigRational scale = 1;
  if (out.estimated) {
    std::uint64_t n = t.represented();
    PTLAB_REQUIRE(n > 0, "empty table");
    scale = BigRational(detail::big_pow(p, m) - 1, BigInt(n));
  }
  if (detail::even_integer(sigma)) {
    auto s = static_cast<unsigned>(sigma);
    BigInt num = 0;
    for (const auto& r : t.rows) {
      PTLAB_REQUIRE(!r.E.empty(), "row without E_1");
      num += BigInt(r.weight) * boost::multiprecision::pow(BigInt(r.E[0]), s);
    }
    out.exact = true;
    out.exact_value = BigRational(num, detail::big_pow(p, s * (m - 3) / 2)) * scale;
    out.value = static_cast<double>(out.exact_value);
    return out;
  }
  const double norm = std::pow(static_cast<double>(p), (m - 3) / 2.0);
  std::vector<double> terms;
  terms.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    PTLAB_REQUIRE(!r.E.empty(), "row without E_1");
    double a = std::fabs(static_cast<double>(r.E[0])) / norm;
    double v = sigma == 0 ? 1.0 : (a == 0 ? 0.0 : std::pow(a, sigma));
    terms.push_back(static_cast<double>(r.weight) * v);
  }
  if (sorted_summation) std::sort(terms.begin(), terms.end());
  out.value = detail::neumaier_sum(terms) * static_cast<double>(scale);
  return out;
}

/// Weight of rows with |E_c(p)| >= p^{eps + (m-3)/2}. Exact whenever 8(eps + (m-3)/2) is
/// a small integer; otherwise compared in floating point.
inline std::uint64_t superlevel_S(const ETable& t, double eps) {
  const std::uint64_t p = t.config.p;
  const int m = t.config.G.nvars();
  const double x = eps + (m - 3) / 2.0;
  int k = 0;
  for (int c : {1, 2, 4, 8})
    if (std::fabs(c * x - std::round(c * x)) < 1e-12) {
      k = c;
      break;
    }
  std::uint64_t count = 0;
  if (k && std::round(k * x) >= 0 && k * x <= 512) {
    BigInt rhs = detail::big_pow(p, static_cast<unsigned>(std::llround(k * x)));
    for (const auto& r : t.rows)
      if (boost::multiprecision::pow(BigInt(std::llabs(r.E.at(0))), k) >= rhs) count += r.weight;
  } else {
    const double thr = std::pow(static_cast<double>(p), x);
    for (const auto& r : t.rows)
      if (std::fabs(static_cast<double>(r.E.at(0))) >= thr) count += r.weight;
  }
  return count;
}

struct MomentReport {
  std::uint64_t q = 0;
  int m = 0;
  std::string mode;
  std::vector<MomentValue> M;
  std::vector<double> epsilon;
  std::vector<std::uint64_t> S;
  std::vector<double> e;  // log_q(1 + M)
  std::string convention = "moments and level sets sum over c != 0; 0^0 = 1";
};

inline MomentReport moment_report(const ETable& t, const std::vector<double>& sigmas, const std::vector<double>& eps) {
  MomentReport rep;
  rep.q = t.config.p;
  rep.m = t.config.G.nvars();
  rep.mode = to_string(t.config.mode);
  for (double s : sigmas) {
    rep.M.push_back(moment_M(t, s));
    rep.e.push_back(std::log1p(rep.M.back().value) / std::log(static_cast<double>(rep.q)));
  }
  rep.epsilon = eps;
  for (double x : eps) rep.S.push_back(superlevel_S(t, x));
  return rep;
}

struct ExponentRow {
  std::uint32_t p = 0;
  double sigma = 0;
  double M = 0;
  double e = 0;
  double bound = 0;     // m
  bool bound_applies = false;
};

/// e = log_p(1 + M(p, sigma)) per prime. The bound m is asserted for sigma = 2 always,
/// sigma = 4 when d >= 3, and sigma = 6 for diagonal forms with (m, d) = (6, 3).
inline std::vector<ExponentRow> exponent_ladder(const ScanConfig& base, const std::vector<std::uint32_t>& primes,
                                                const std::vector<double>& sigmas, int workers = 1) {
  std::vector<ExponentRow> out;
  const int m = base.G.nvars(), d = base.G.degree();
  for (auto p : primes) {
    ScanConfig cfg = base;
    cfg.p = p;
    cfg.mode = ScanMode::projective;
    cfg.R = 1;
    ETable t = scan_E_table(cfg, workers);
    for (double s : sigmas) {
      ExponentRow row;
      row.p = p;
      row.sigma = s;
      row.M = moment_M(t, s).value;
      row.e = std::log1p(row.M) / std::log(static_cast<double>(p));
      row.bound = m;
      row.bound_applies = s == 2 || (s == 4 && d >= 3) || (s == 6 && base.G.is_diagonal() && m == 6 && d == 3);
      out.push_back(row);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact identities

struct IdentityReport {
  std::string id;
  BigRational lhs = 0, rhs = 0;
  bool equal = false;
  std::string details;
};

namespace detail {

/// #W_c over L for c over the prime field K of F.
inline std::uint64_t section_points(const Form& F, const Point& c, const Field& L) {
  auto res = forms::restrict_to_hyperplane(F, c);
  if (res.form.is_zero()) return projective_size(L.q(), F.nvars() - 2);
  CountOptions co;
  co.budget = 1e15;
  return count_projective({res.form.embed(Embedding(F.field(), L))}, co);
}

inline std::uint64_t full_points(const Form& F, const Field& L) {
  CountOptions co;
  co.budget = 1e15;
  return count_projective({F.embed(Embedding(F.field(), L))}, co);
}

inline Form reduce_nonzero(const IntForm& G, std::uint32_t p) {
  Form F = G.reduce(Field::make(p));
  PTLAB_REQUIRE(!F.is_zero(), "the form vanishes modulo p");
  PTLAB_REQUIRE(G.nvars() >= 2, "at least two variables needed");
  return F;
}

}  // namespace detail

/// sum over all c in F_p^m of #W_c(F_p) against p^{m-1} |W(F_p)|.
inline IdentityReport identity_first_moment(const IntForm& G, std::uint32_t p) {
  Form F = detail::reduce_nonzero(G, p);
  const Field& K = F.field();
  const int m = F.nvars();
  const std::uint64_t W = detail::full_points(F, K);
  BigInt sum = 0;
  ProjectiveSpace P(K, m - 1);
  for (auto cur = P.cursor(); !cur.done(); cur.next()) sum += detail::section_points(F, cur.point(), K);
  IdentityReport r;
  r.id = "first-moment";
  r.lhs = BigRational(sum * (p - 1) + W, detail::big_pow(p, m));
  r.rhs = BigRational(BigInt(W), BigInt(p));
  r.equal = r.lhs == r.rhs;
  r.details = "|W(F_p)|=" + std::to_string(W);
  return r;
}

/// E_c[#W_c(F_p)^2] against p^{-1}|W| + p^{-2}(|W|^2 - |W|).
inline IdentityReport identity_second_moment(const IntForm& G, std::uint32_t p) {
  Form F = detail::reduce_nonzero(G, p);
  const Field& K = F.field();
  const int m = F.nvars();
  const std::uint64_t W = detail::full_points(F, K);
  BigInt sum = 0;
  ProjectiveSpace P(K, m - 1);
  for (auto cur = P.cursor(); !cur.done(); cur.next()) {
    BigInt n = detail::section_points(F, cur.point(), K);
    sum += n * n;
  }
  IdentityReport r;
  r.id = "second-moment";
  BigInt w = W;
  r.lhs = BigRational(sum * (p - 1) + w * w, detail::big_pow(p, m));
  r.rhs = BigRational(w, BigInt(p)) + BigRational(w * w - w, BigInt(p) * p);
  r.equal = r.lhs == r.rhs;
  r.details = "|W(F_p)|=" + std::to_string(W);
  return r;
}

/// E_c[#W_c(F_{p^2})] against p^{-1}|W(F_p)| + p^{-2}(|W(F_{p^2})| - |W(F_p)|). Also checks,
/// point by point, that c -> c.x has rank 1 over F_p at rational points and rank 2 elsewhere.
inline IdentityReport identity_qsquare(const IntForm& G, std::uint32_t p) {
  Form F = detail::reduce_nonzero(G, p);
  const Field& K = F.field();
  const int m = F.nvars();
  Field L = Field::make(p, 2);
  const std::uint64_t W1 = detail::full_points(F, K), W2 = detail::full_points(F, L);
  BigInt sum = 0;
  ProjectiveSpace P(K, m - 1);
  for (auto cur = P.cursor(); !cur.done(); cur.next()) sum += detail::section_points(F, cur.point(), L);

  // Points of W(F_{p^2}) and the F_p-rank of c -> c.x.
  auto pts = find_projective_zeros({F.embed(Embedding(K, L))});
  PTLAB_ASSERT(pts.size() == W2, "solver and counter disagree on |W(F_{p^2})|");
  std::uint64_t rank1 = 0, rank2 = 0, other = 0;
  BigInt via_lemma = 0;
  for (const auto& x : pts) {
    Matrix A(K, m, 2);
    for (int i = 0; i < m; ++i) {
      A(i, 0) = K.from_int(L.coeff(x[i], 0));
      A(i, 1) = K.from_int(L.coeff(x[i], 1));
    }
    int rk = linalg::rank(A);
    bool rational = std::all_of(x.begin(), x.end(), [&](FieldElem v) { return L.in_prime_field(v); });
    if (rk == 1 && rational) {
      ++rank1;
    } else if (rk == 2 && !rational) {
      ++rank2;
    } else {
      ++other;
    }
    via_lemma += detail::big_pow(p, m - rk);
  }
  IdentityReport r;
  r.id = "qsquare";
  r.lhs = BigRational(sum * (p - 1) + W2, detail::big_pow(p, m));
  r.rhs = BigRational(BigInt(W1), BigInt(p)) + BigRational(BigInt(W2) - W1, BigInt(p) * p);
  bool lemma_ok = other == 0 && rank1 == W1 && BigRational(via_lemma, detail::big_pow(p, m)) == r.lhs;
  r.equal = r.lhs == r.rhs && lemma_ok;
  r.details = "|W(F_p)|=" + std::to_string(W1) + "; |W(F_p^2)|=" + std::to_string(W2) + "; rank1=" +
              std::to_string(rank1) + "; rank2=" + std::to_string(rank2) + "; lemma " + (lemma_ok ? "ok" : "violated");
  return r;
}

// ---------------------------------------------------------------------------
// Dashboard

/// Singular points of V(F) over F_{p^s}, s <= s_max (capped at the supported degree).
inline bool hypersurface_smooth(const Form& F, int s_max, const SolverOptions& opt = {}) {
  const Field& K = F.field();
  std::vector<Form> eqs{F};
  for (int i = 0; i < F.nvars(); ++i) {
    Form D = F.derivative(i);
    if (!D.is_zero()) eqs.push_back(D);
  }
  SolverOptions so = opt;
  so.max_solutions = 1;
  for (int s = 1; s <= s_max && K.r() * s <= Field::kMaxDegree; ++s) {
    Embedding emb(K, Field::make(K.p(), K.r() * s));
    std::vector<Form> e;
    for (const auto& f : eqs) e.push_back(f.embed(emb));
    if (!find_projective_zeros(e, so).empty()) return false;
  }
  return true;
}

struct DashboardRow {
  std::uint32_t p = 0;
  bool skipped = false;
  std::string notice;
  BigRational stat1 = 0, stat2 = 0, stat3 = 0;  // expectations over all c in F_p^m
  bool stat2_available = true;
  std::int64_t EW = 0;  // E(W) over F_p
  double r1 = NAN, r2 = NAN, r3 = NAN;
  std::uint64_t singular_c = 0;  // c != 0 with the vanishing flag set
};

struct Dashboard {
  std::vector<DashboardRow> rows;
  std::vector<std::string> trend;     // one summary per statistic
  std::vector<double> trend_slope;    // slope of log|r| against log p
  std::string expected_rate;
};

/// Least-squares slope of log|r| on log p and a one-line description.
inline std::pair<double, std::string> residual_trend(const std::vector<std::pair<double, double>>& pr) {
  std::vector<double> xs, ys;
  for (auto [p, r] : pr)
    if (!std::isnan(r) && r != 0) {
      xs.push_back(std::log(p));
      ys.push_back(std::log(std::fabs(r)));
    }
  if (xs.size() < 2) return {NAN, "too few primes"};
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
  double slope = sxy / sxx;
  bool monotone = true;
  for (std::size_t i = 1; i < ys.size(); ++i) monotone = monotone && ys[i] <= ys[i - 1];
  std::string label = monotone ? "decreasing" : (slope < 0 ? "decreasing trendwise" : "not decreasing");
  return {slope, label};
}

inline Dashboard corollary_dashboard(const ScanConfig& base, const std::vector<std::uint32_t>& primes, int workers = 1) {
  const int m = base.G.nvars(), d = base.G.degree();
  PTLAB_REQUIRE(d >= 3 && m >= 3, "the dashboard needs d, m >= 3");
  Dashboard db;
  db.expected_rate = m == 3 ? "O(p^-1/2) + O(p^-1)" : "O(p^-1)";
  for (auto p : primes) {
    DashboardRow row;
    row.p = p;
    if (static_cast<std::int64_t>(d) * (d - 1) % p == 0) {
      row.skipped = true;
      row.notice = "p divides d(d-1)";
      db.rows.push_back(row);
      continue;
    }
    Field K = Field::make(p);
    Form F = base.G.reduce(K);
    if (F.is_zero() || !hypersurface_smooth(F, base.s_max, base.solver)) {
      row.skipped = true;
      row.notice = "p divides disc(G)";
      db.rows.push_back(row);
      continue;
    }
    ScanConfig cfg = base;
    cfg.p = p;
    cfg.mode = ScanMode::projective;
    cfg.R = 2;
    ETable t = scan_E_table(cfg, workers);
    BigInt s1 = 0, s2 = 0, s3 = 0;
    for (const auto& r : t.rows) {
      if (r.disc_zero) {
        row.singular_c += r.weight;
        continue;
      }
      s1 += BigInt(r.weight) * r.E[0];
      s3 += BigInt(r.weight) * r.E[0] * r.E[0];
      if (r.E.size() >= 2) {
        s2 += BigInt(r.weight) * r.E[1];
      } else {
        row.stat2_available = false;
      }
    }
    BigInt pm = detail::big_pow(p, m);
    row.stat1 = BigRational(s1, pm);
    row.stat2 = BigRational(s2, pm);
    row.stat3 = BigRational(s3, pm);
    row.EW = error_E(detail::full_points(F, K), p, m - 2);
    const double dp = p;
    row.r1 = (static_cast<double>(row.stat1) - static_cast<double>(row.EW) / dp) / std::pow(dp, (m - 3) / 2.0);
    row.r2 = row.stat2_available ? static_cast<double>(row.stat2) / std::pow(dp, m - 3) - 1 : NAN;
    row.r3 = static_cast<double>(row.stat3) / std::pow(dp, m - 3) - 1;
    if (!row.stat2_available) row.notice = "E_c(p^2) missing for some smooth c";
    db.rows.push_back(row);
  }
  for (int k = 0; k < 3; ++k) {
    std::vector<std::pair<double, double>> pr;
    for (const auto& r : db.rows)
      if (!r.skipped) pr.push_back({static_cast<double>(r.p), k == 0 ? r.r1 : k == 1 ? r.r2 : r.r3});
    auto [slope, label] = residual_trend(pr);
    db.trend_slope.push_back(slope);
    db.trend.push_back(label);
  }
  return db;
}

}  // namespace ptlab

// ptlab: command-line front end. Exit status 0 on success, 2 when an input or budget is
// refused, 1 on an internal error.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ptlab/counting.hpp"
#include "ptlab/criteria.hpp"
#include "ptlab/discriminant.hpp"
#include "ptlab/fermat.hpp"
#include "ptlab/harness.hpp"
#include "ptlab/moments.hpp"

using namespace ptlab;
using harness::json;

namespace {

enum class Kind { Int, Double, String, Flag, NegFlag };

struct KeySpec {
  const char* key;
  const char* flag;
  Kind kind;
  const char* help;
};

const std::vector<KeySpec> kKeys = {
    {"form", "--form", Kind::String, "form spec, e.g. diag:d=3;1,1,1,1 or poly:d=3;m=3;x1^3+x2^3+x3^3"},
    {"p", "--p", Kind::Int, "prime"},
    {"primes", "--primes", Kind::String, "prime list a,b,c or range lo..hi"},
    {"r", "--r", Kind::Int, "extension degree for count"},
    {"rmax", "--rmax", Kind::Int, "series length R"},
    {"c", "--c", Kind::String, "hyperplane coefficients, comma separated"},
    {"point", "--point", Kind::String, "point of P^5, comma separated"},
    {"mode", "--mode", Kind::String, "full | projective | sample"},
    {"samples", "--samples", Kind::Int, "number of sampled c"},
    {"seed", "--seed", Kind::Int, "64-bit seed for sampling"},
    {"s_max", "--s-max", Kind::Int, "deepest extension searched for singular points"},
    {"tau_bound", "--tau-bound", Kind::Double, "good-consistent bound on rho"},
    {"delta", "--delta", Kind::Double, "slope margin for bad-suspected"},
    {"tau_growth", "--tau-growth", Kind::Double, "last-rho threshold for bad-suspected"},
    {"budget", "--budget", Kind::Double, "work budget per count"},
    {"scan_budget", "--scan-budget", Kind::Double, "work budget per scan"},
    {"direct_r_max", "--direct-r-max", Kind::Int, "highest level counted directly (0: automatic)"},
    {"prefer_rationality", "--no-rationality", Kind::NegFlag, "count singular sections directly"},
    {"orbit_cache", "--no-orbit-cache", Kind::NegFlag, "disable the symmetry cache"},
    {"sigma", "--sigma", Kind::String, "moment orders, comma separated"},
    {"epsilon", "--epsilon", Kind::String, "level-set offsets, comma separated"},
    {"n", "--n", Kind::Int, "number of coordinates for rich-configs"},
    {"nsub", "--nsub", Kind::Int, "number of subsets for rich-configs"},
    {"char", "--char", Kind::Int, "characteristic for rich-configs (0 or a prime)"},
    {"brute_s_max", "--brute-s-max", Kind::Int, "also run the brute-force singular count up to this degree"},
    {"format", "--format", Kind::String, "json | text (rich-configs)"},
    {"workers", "--workers", Kind::Int, "worker threads"},
    {"chunk_size", "--chunk-size", Kind::Int, "items per checkpoint chunk"},
    {"checkpoint_dir", "--checkpoint-dir", Kind::String, "directory for chunk files"},
    {"resume", "--resume", Kind::Flag, "reuse valid chunk files"},
    {"stop_after_chunks", "--stop-after-chunks", Kind::Int, "stop after computing this many chunks"},
    {"out", "--out", Kind::String, "output path (default stdout)"},
};

const std::map<std::string, std::vector<std::string>> kCommandKeys = {
    {"count", {"form", "p", "r", "c", "budget"}},
    {"series", {"form", "p", "c", "rmax", "tau_bound", "delta", "tau_growth", "budget", "prefer_rationality", "direct_r_max"}},
    {"scan", {"form", "p", "rmax", "mode", "samples", "seed", "s_max", "tau_bound", "delta", "tau_growth", "budget",
              "scan_budget", "direct_r_max", "prefer_rationality", "orbit_cache", "workers", "chunk_size",
              "checkpoint_dir", "resume", "stop_after_chunks"}},
    {"moments", {"form", "p", "primes", "mode", "samples", "seed", "s_max", "budget", "scan_budget", "orbit_cache",
                 "prefer_rationality", "sigma", "epsilon", "workers"}},
    {"identities", {"form", "p", "primes"}},
    {"dashboard", {"form", "primes", "s_max", "budget", "scan_budget", "orbit_cache", "prefer_rationality", "direct_r_max",
                   "workers"}},
    {"rich-configs", {"n", "nsub", "char", "format"}},
    {"vision", {"p", "point", "brute_s_max"}},
    {"screen", {"p", "point"}},
    {"quadric", {"form", "p", "rmax"}},
    {"audit", {"form", "p", "rmax", "mode", "samples", "seed", "s_max", "tau_bound", "delta", "tau_growth", "budget",
               "scan_budget", "orbit_cache", "prefer_rationality", "direct_r_max", "workers"}},
};

const KeySpec& spec_of(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.key) return k;
  throw InternalError("unknown key " + key);
}

std::string rational_string(const BigRational& r) {
  std::string s = boost::multiprecision::numerator(r).str();
  if (boost::multiprecision::denominator(r) != 1) s += "/" + boost::multiprecision::denominator(r).str();
  return s;
}

std::vector<FieldElem> field_vector(const Field& K, const json& v, const std::string& what) {
  std::vector<FieldElem> out;
  for (auto x : harness::int_list(v)) out.push_back(K.from_int(x));
  PTLAB_REQUIRE(!out.empty(), what + " is empty");
  return out;
}

json series_json(const CountSeries& S, const Verdict& v) {
  return json{{"q", S.q},
              {"dim", S.dim},
              {"N", S.N},
              {"E", S.E},
              {"rho", S.rho},
              {"method", S.method},
              {"contained", S.contained},
              {"note", S.note},
              {"verdict", {{"label", v.label}, {"slope", v.slope}, {"max_rho", v.max_rho}, {"last_rho", v.last_rho}}}};
}

VerdictThresholds thresholds(const json& cfg) {
  VerdictThresholds th;
  th.tau_bound = harness::get_or<double>(cfg, "tau_bound", 20);
  th.delta = harness::get_or<double>(cfg, "delta", 0.25);
  th.tau_growth = harness::get_or<double>(cfg, "tau_growth", 5);
  return th;
}

// ---------------------------------------------------------------------------
// Subcommands

json cmd_count(const json& cfg) {
  Field K = Field::make(harness::require_prime(cfg));
  Form F = forms::parse(harness::require_string(cfg, "form")).reduce(K);
  const int r = harness::get_or<int>(cfg, "r", 1);
  PTLAB_REQUIRE(r >= 1 && r <= Field::kMaxDegree, "r out of range");
  Field L = Field::make(K.p(), r);
  Embedding emb(K, L);
  CountOptions co;
  co.budget = harness::get_or<double>(cfg, "budget", 2e9);
  json out;
  Form G = F;
  int dim = F.nvars() - 2;
  if (cfg.contains("c")) {
    auto c = field_vector(K, cfg["c"], "c");
    auto res = forms::restrict_to_hyperplane(F, c);
    out["section"] = true;
    dim = F.nvars() - 3;
    if (res.form.is_zero()) {
      std::uint64_t N = projective_size(L.q(), F.nvars() - 2);
      out.update({{"N", N}, {"E", error_E(N, L.q(), dim)}, {"dim", dim}, {"contained", true}});
      return out;
    }
    G = res.form;
  }
  std::uint64_t N = count_projective({G.embed(emb)}, co);
  out.update({{"q", L.q()}, {"N", N}, {"E", error_E(N, L.q(), dim)}, {"dim", dim}});
  return out;
}

json cmd_series(const json& cfg) {
  Field K = Field::make(harness::require_prime(cfg));
  Form F = forms::parse(harness::require_string(cfg, "form")).reduce(K);
  PTLAB_REQUIRE(cfg.contains("c"), "missing required setting 'c'");
  auto c = field_vector(K, cfg["c"], "c");
  SectionOptions so;
  so.R = harness::get_or<int>(cfg, "rmax", 1);
  so.count.budget = harness::get_or<double>(cfg, "budget", 2e9);
  so.solver.budget = so.count.budget;
  so.prefer_rationality = harness::get_or<bool>(cfg, "prefer_rationality", true);
  int drm = harness::get_or<int>(cfg, "direct_r_max", 0);
  if (drm > 0) so.direct_r_max = drm;
  auto S = hyperplane_section_series(F, c, so);
  return series_json(S, sqrt_cancellation_verdict(S, thresholds(cfg)));
}

json moment_json(const MomentReport& rep) {
  json M = json::array();
  for (const auto& m : rep.M) {
    json x{{"sigma", m.sigma}, {"value", m.value}, {"exact", m.exact}, {"estimated", m.estimated}};
    if (m.exact) x["exact_value"] = rational_string(m.exact_value);
    M.push_back(x);
  }
  json S = json::array();
  for (std::size_t i = 0; i < rep.epsilon.size(); ++i)
    S.push_back({{"epsilon", rep.epsilon[i]},
                 {"S", rep.S[i]},
                 {"S_over_q_m_minus_2", static_cast<double>(rep.S[i]) / std::pow(static_cast<double>(rep.q), rep.m - 2)}});
  json e = json::array();
  for (std::size_t i = 0; i < rep.M.size(); ++i) e.push_back({{"sigma", rep.M[i].sigma}, {"e", rep.e[i]}, {"bound", rep.m}});
  return json{{"q", rep.q}, {"m", rep.m}, {"mode", rep.mode}, {"M", M}, {"S", S}, {"exponents", e}, {"convention", rep.convention}};
}

json cmd_moments(const json& cfg, int workers) {
  auto sig = harness::double_list(cfg.value("sigma", json("0,2,4")));
  auto eps = harness::double_list(cfg.value("epsilon", json("0.25")));
  std::vector<std::uint32_t> primes;
  if (cfg.contains("primes")) {
    primes = harness::prime_list(cfg["primes"]);
  } else {
    primes = {harness::require_prime(cfg)};
  }
  json reports = json::array();
  for (auto p : primes) {
    ScanConfig sc = harness::scan_config(cfg, false);
    sc.p = p;
    sc.R = 1;
    reports.push_back(moment_json(moment_report(scan_E_table(sc, workers), sig, eps)));
  }
  return json{{"reports", reports},
              {"label", "finite-ladder estimates; the limsup statements are not reproduced"}};
}

json identity_json(const IdentityReport& r) {
  return json{{"id", r.id}, {"lhs", rational_string(r.lhs)}, {"rhs", rational_string(r.rhs)}, {"equal", r.equal}, {"details", r.details}};
}

json cmd_identities(const json& cfg, bool& all_equal) {
  IntForm G = forms::parse(harness::require_string(cfg, "form"));
  std::vector<std::uint32_t> primes =
      cfg.contains("primes") ? harness::prime_list(cfg["primes"]) : std::vector<std::uint32_t>{harness::require_prime(cfg)};
  json out = json::array();
  all_equal = true;
  for (auto p : primes) {
    for (const auto& r : {identity_first_moment(G, p), identity_second_moment(G, p), identity_qsquare(G, p)}) {
      json j = identity_json(r);
      j["p"] = p;
      all_equal = all_equal && r.equal;
      out.push_back(j);
    }
  }
  return json{{"identities", out}, {"convention", "expectations over all c in F_p^m, c = 0 included (W_0 = W)"}};
}

json cmd_dashboard(const json& cfg, int workers) {
  PTLAB_REQUIRE(cfg.contains("primes"), "missing required setting 'primes'");
  ScanConfig sc = harness::scan_config(cfg, false);
  auto db = corollary_dashboard(sc, harness::prime_list(cfg["primes"]), workers);
  json rows = json::array();
  for (const auto& r : db.rows) {
    json j{{"p", r.p}, {"skipped", r.skipped}, {"notice", r.notice}};
    if (!r.skipped)
      j.update({{"stat1", rational_string(r.stat1)},
                {"stat2", r.stat2_available ? json(rational_string(r.stat2)) : json(nullptr)},
                {"stat3", rational_string(r.stat3)},
                {"E_W", r.EW},
                {"r1", r.r1},
                {"r2", r.r2},
                {"r3", r.r3},
                {"singular_c", r.singular_c}});
    rows.push_back(j);
  }
  json trend = json::array();
  for (int k = 0; k < 3; ++k) trend.push_back({{"statistic", k + 1}, {"summary", db.trend[k]}, {"log_slope", db.trend_slope[k]}});
  return json{{"rows", rows},
              {"trend", trend},
              {"expected_rate", db.expected_rate},
              {"residuals",
               "r1 = (stat1 - E(W)/p) / p^((m-3)/2); r2 = stat2 / p^(m-3) - 1; r3 = stat3 / p^(m-3) - 1"},
              {"label", "asymptotic statements; trend summary only, no pass/fail"}};
}

json cmd_vision(const json& cfg) {
  Field K = Field::make(harness::require_prime(cfg));
  PTLAB_REQUIRE(cfg.contains("point"), "missing required setting 'point'");
  auto a = field_vector(K, cfg["point"], "point");
  PTLAB_REQUIRE(a.size() == 6, "a point of P^5 is expected");
  auto rep = vision_sing_count(K, a);
  json out{{"n", rep.n}, {"zero_subsets", rep.zero_subsets}, {"applicable", rep.applicable}, {"sing_count", rep.sing_count}};
  if (a[5].lanes && fermat_value(K, a).lanes == 0) {
    auto v = tangential_vision(K, a);
    out["f1"] = v.f1.to_string();
    out["f2"] = v.f2.to_string();
    out["f3"] = v.f3.to_string();
  }
  int bs = harness::get_or<int>(cfg, "brute_s_max", 0);
  if (bs > 0) {
    auto b = vision_sing_bruteforce(K, a, bs);
    out["bruteforce"] = {{"counts", b.counts}, {"count", b.count}, {"stabilized", b.stabilized}};
  }
  return out;
}

json cmd_screen(const json& cfg) {
  Field K = Field::make(harness::require_prime(cfg));
  PTLAB_REQUIRE(cfg.contains("point"), "missing required setting 'point'");
  auto a = field_vector(K, cfg["point"], "point");
  auto s = scroll_screen(K, a);
  std::vector<std::string> normal;
  for (auto x : s.span_normal) normal.push_back(K.to_string(x));
  return json{{"n", s.n},
              {"n_allowed", s.n_allowed},
              {"zero_subset_count", s.zero_subset_count},
              {"sing_count", s.sing_count},
              {"pattern", pattern_name(s.pattern)},
              {"verdict", s.verdict},
              {"span_normal", normal}};
}

json cmd_quadric(const json& cfg) {
  Field K = Field::make(harness::require_prime(cfg));
  Form Q = forms::parse(harness::require_string(cfg, "form")).reduce(K);
  auto qc = quadric_count(Q);
  auto pred = quadric_dichotomy(Q);
  auto S = quadric_series(Q, harness::get_or<int>(cfg, "rmax", 3));
  auto v = sqrt_cancellation_verdict(S);
  return json{{"rank", qc.rank},
              {"affine", qc.affine},
              {"projective", qc.projective},
              {"prediction", {{"bad", pred.predicted_bad}, {"witness", pred.witness}}},
              {"series", series_json(S, v)}};
}

json cmd_audit(const json& cfg, int workers, bool& clean) {
  ScanConfig sc = harness::scan_config(cfg);
  const int d = sc.G.degree(), m = sc.G.nvars();
  auto dc = sc.G.diagonal_coefficients();
  PTLAB_REQUIRE((d == 3 && !dc.empty() && (m == 4 || m == 6)) || d == 2,
                "audit needs a diagonal cubic with m in {4, 6} or a quadric");
  ETable t = scan_E_table(sc, workers);
  Field K = Field::make(sc.p);
  Form F = sc.G.reduce(K);
  std::map<std::string, std::uint64_t> tally;
  json disagreements = json::array();
  for (const auto& row : t.rows) {
    std::vector<FieldElem> c;
    for (auto v : row.c) c.push_back(K.from_index(v));
    CriterionVerdict pred;
    if (d == 3) {
      pred = diagonal_cubic_dichotomy(DiagonalForm{3, dc}, c, K);
    } else {
      auto res = forms::restrict_to_hyperplane(F, c);
      if (res.form.is_zero()) continue;
      pred = quadric_dichotomy(res.form);
    }
    CountSeries S;
    S.q = sc.p;
    S.dim = m - 3;
    S.E = row.E;
    S.rho = row.rho;
    Verdict v;
    v.label = row.verdict;
    auto a = consistency_audit(S, v, {pred});
    tally[a.outcome] += row.weight;
    if (a.outcome == "disagree" && disagreements.size() < 100)
      disagreements.push_back({{"c", row.c}, {"details", a.details}});
  }
  clean = tally["disagree"] == 0;
  const double decided = static_cast<double>(tally["agree"] + tally["disagree"]);
  const double total = decided + static_cast<double>(tally["undecided"]);
  return json{{"agree", tally["agree"]},
              {"disagree", tally["disagree"]},
              {"undecided", tally["undecided"]},
              {"disagreement_rate", decided > 0 ? tally["disagree"] / decided : 0.0},
              {"inconclusive_rate", total > 0 ? tally["undecided"] / total : 0.0},
              {"disagreements", disagreements}};
}

void emit(const json& cfg, const std::string& text) {
  std::string path = harness::get_or<std::string>(cfg, "out", "");
  if (path.empty()) {
    std::cout << text;
    return;
  }
  harness::write_file_atomic(path, text);
}

int run(const std::string& cmd, const json& cfg) {
  const int workers = harness::get_or<int>(cfg, "workers", 1);
  PTLAB_REQUIRE(workers >= 1, "workers must be positive");
  if (cmd == "scan") {
    auto run = harness::run_scan(harness::scan_config(cfg), cfg, harness::exec_options(cfg));
    std::cerr << "chunks " << run.chunks << " reused " << run.reused << " computed " << run.computed << "\n";
    if (!run.completed) {
      std::cerr << "stopped before completion; rerun with --resume\n";
      return 0;
    }
    emit(cfg, run.csv);
    return 0;
  }
  if (cmd == "rich-configs") {
    auto out = rich_configurations(harness::get_or<int>(cfg, "n", 5), harness::get_or<int>(cfg, "nsub", 5),
                                   harness::get_or<std::int64_t>(cfg, "char", 0));
    if (harness::get_or<std::string>(cfg, "format", "json") == "text") {
      emit(cfg, out.to_string() + "\n");
      return 0;
    }
    json doc{{"schema", "v1"},
             {"command", cmd},
             {"config", harness::provenance_config(cfg)},
             {"config_hash", harness::config_hash(cfg)},
             {"result", {{"output", out.to_string()}, {"simple_count", out.simple_count()}, {"degenerate_count", out.degenerate.size()}}}};
    emit(cfg, doc.dump(2) + "\n");
    return 0;
  }
  json result;
  int status = 0;
  if (cmd == "count") {
    result = cmd_count(cfg);
  } else if (cmd == "series") {
    result = cmd_series(cfg);
  } else if (cmd == "moments") {
    result = cmd_moments(cfg, workers);
  } else if (cmd == "identities") {
    bool ok = true;
    result = cmd_identities(cfg, ok);
    if (!ok) status = 1;
  } else if (cmd == "dashboard") {
    result = cmd_dashboard(cfg, workers);
  } else if (cmd == "vision") {
    result = cmd_vision(cfg);
  } else if (cmd == "screen") {
    result = cmd_screen(cfg);
  } else if (cmd == "quadric") {
    result = cmd_quadric(cfg);
  } else if (cmd == "audit") {
    bool clean = true;
    result = cmd_audit(cfg, workers, clean);
  } else {
    throw InternalError("unhandled subcommand " + cmd);
  }
  json doc{{"schema", "v1"},
           {"command", cmd},
           {"config", harness::provenance_config(cfg)},
           {"config_hash", harness::config_hash(cfg)},
           {"result", result}};
  emit(cfg, doc.dump(2) + "\n");
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ptlab: point counts of hyperplane sections over finite fields"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  std::map<std::string, std::string> config_path;
  for (const auto& [cmd, keys] : kCommandKeys) {
    auto* sub = app.add_subcommand(cmd);
    sub->add_option("--config", config_path[cmd], "JSON config file; flags override its values");
    for (const auto& key : keys) {
      const auto& k = spec_of(key);
      if (k.kind == Kind::Flag || k.kind == Kind::NegFlag) {
        opts[cmd][key] = sub->add_flag(k.flag, k.help);
      } else {
        opts[cmd][key] = sub->add_option(k.flag, raw[cmd][key], k.help);
      }
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    for (auto* sub : app.get_subcommands()) {
      const std::string cmd = sub->get_name();
      json flags = json::object();
      for (const auto& [key, opt] : opts[cmd]) {
        if (opt->count() == 0) continue;
        const auto& k = spec_of(key);
        const std::string& v = raw[cmd][key];
        switch (k.kind) {
          case Kind::Int: flags[key] = harness::to_int(v); break;
          case Kind::Double: flags[key] = harness::to_double(v); break;
          case Kind::String: flags[key] = v; break;
          case Kind::Flag: flags[key] = true; break;
          case Kind::NegFlag: flags[key] = false; break;
        }
      }
      json file = config_path[cmd].empty() ? json::object() : harness::load_config_file(config_path[cmd]);
      return run(cmd, harness::resolve_config(file, flags));
    }
  } catch (const PreconditionError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

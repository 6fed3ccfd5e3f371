#pragma once

// Experiment configuration, provenance hashing, and the chunked, resumable scan driver.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ptlab/errors.hpp"
#include "ptlab/forms.hpp"
#include "ptlab/moments.hpp"

namespace ptlab::harness {

using json = nlohmann::json;

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Keys that change how a run executes but not what it produces.
inline const std::set<std::string>& execution_keys() {
  static const std::set<std::string> k = {"workers", "chunk_size", "checkpoint_dir", "resume",
                                          "out",     "stop_after_chunks", "config"};
  return k;
}

inline json provenance_config(const json& cfg) {
  json c = cfg;
  for (const auto& k : execution_keys()) c.erase(k);
  return c;
}

inline std::string config_hash(const json& cfg) { return hex64(fnv1a(provenance_config(cfg).dump())); }

inline json default_config() {
  return json{{"rmax", 1},          {"mode", "projective"},   {"samples", 0},
              {"seed", 0},          {"s_max", 6},             {"tau_bound", 20.0},
              {"delta", 0.25},      {"tau_growth", 5.0},      {"workers", 1},
              {"chunk_size", 4096}, {"checkpoint_dir", ""},   {"resume", false},
              {"out", ""},          {"budget", 2e9},          {"scan_budget", 1e13},
              {"prefer_rationality", true}, {"orbit_cache", true}, {"direct_r_max", 0}};
}

/// defaults, then the config file, then explicit flags.
inline json resolve_config(const json& file, const json& flags) {
  PTLAB_REQUIRE(file.is_object() && flags.is_object(), "configuration must be a JSON object");
  json out = default_config();
  out.update(file);
  out.update(flags);
  return out;
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  PTLAB_REQUIRE(in.good(), "cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw PreconditionError("malformed config file " + path + ": " + e.what());
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!forms::detail::strip(cur).empty()) out.push_back(forms::detail::strip(cur));
  return out;
}

inline std::int64_t to_int(const std::string& s) {
  std::size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw PreconditionError("not an integer: '" + s + "'");
  }
  PTLAB_REQUIRE(pos == s.size(), "not an integer: '" + s + "'");
  return v;
}

inline double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw PreconditionError("not a number: '" + s + "'");
  }
  PTLAB_REQUIRE(pos == s.size(), "not a number: '" + s + "'");
  return v;
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Accepts a number, a JSON array, "a,b,c" or "lo..hi" (every prime in the range).
inline std::vector<std::int64_t> int_list(const json& v) {
  std::vector<std::int64_t> out;
  if (v.is_number_integer()) return {v.get<std::int64_t>()};
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(x.get<std::int64_t>());
    return out;
  }
  PTLAB_REQUIRE(v.is_string(), "expected a list of integers");
  for (const auto& part : split(v.get<std::string>(), ',')) out.push_back(to_int(part));
  return out;
}

inline std::vector<double> double_list(const json& v) {
  std::vector<double> out;
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(x.get<double>());
    return out;
  }
  PTLAB_REQUIRE(v.is_string(), "expected a list of numbers");
  for (const auto& part : split(v.get<std::string>(), ',')) out.push_back(to_double(part));
  return out;
}

inline std::vector<std::uint32_t> prime_list(const json& v) {
  std::vector<std::uint32_t> out;
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    auto dots = s.find("..");
    if (dots != std::string::npos) {
      std::int64_t lo = to_int(forms::detail::strip(s.substr(0, dots))), hi = to_int(forms::detail::strip(s.substr(dots + 2)));
      for (std::int64_t n = lo; n <= hi; ++n)
        if (is_prime(n)) out.push_back(static_cast<std::uint32_t>(n));
      return out;
    }
  }
  for (auto n : int_list(v)) {
    PTLAB_REQUIRE(n > 0 && is_prime(n), "not a prime: " + std::to_string(n));
    out.push_back(static_cast<std::uint32_t>(n));
  }
  return out;
}

template <class T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key) || cfg[key].is_null()) return fallback;
  const json& v = cfg[key];
  if constexpr (std::is_same_v<T, std::string>) {
    PTLAB_REQUIRE(v.is_string(), "config key '" + key + "' must be a string");
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, bool>) {
    if (v.is_string()) return v.get<std::string>() == "true" || v.get<std::string>() == "1";
    PTLAB_REQUIRE(v.is_boolean(), "config key '" + key + "' must be a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (v.is_string()) return static_cast<T>(to_int(v.get<std::string>()));
    PTLAB_REQUIRE(v.is_number(), "config key '" + key + "' must be a number");
    return v.get<T>();
  } else {
    if (v.is_string()) return static_cast<T>(to_double(v.get<std::string>()));
    PTLAB_REQUIRE(v.is_number(), "config key '" + key + "' must be a number");
    return v.get<T>();
  }
}

inline std::string require_string(const json& cfg, const std::string& key) {
  PTLAB_REQUIRE(cfg.contains(key) && cfg[key].is_string() && !cfg[key].get<std::string>().empty(),
                "missing required setting '" + key + "'");
  return cfg[key].get<std::string>();
}

inline std::uint32_t require_prime(const json& cfg) {
  PTLAB_REQUIRE(cfg.contains("p") && !cfg["p"].is_null(), "missing required setting 'p'");
  auto v = get_or<std::int64_t>(cfg, "p", 0);
  PTLAB_REQUIRE(v > 0 && is_prime(v), "p must be a prime");
  return static_cast<std::uint32_t>(v);
}

inline ScanConfig scan_config(const json& cfg, bool need_p = true) {
  ScanConfig s;
  s.G = forms::parse(require_string(cfg, "form"));
  if (need_p) s.p = require_prime(cfg);
  s.R = get_or<int>(cfg, "rmax", 1);
  s.mode = parse_scan_mode(get_or<std::string>(cfg, "mode", "projective"));
  s.samples = get_or<std::uint64_t>(cfg, "samples", 0);
  s.seed = get_or<std::uint64_t>(cfg, "seed", 0);
  s.s_max = get_or<int>(cfg, "s_max", 6);
  s.prefer_rationality = get_or<bool>(cfg, "prefer_rationality", true);
  s.direct_r_max = get_or<int>(cfg, "direct_r_max", 0);
  s.orbit_cache = get_or<bool>(cfg, "orbit_cache", true);
  s.thresholds.tau_bound = get_or<double>(cfg, "tau_bound", 20);
  s.thresholds.delta = get_or<double>(cfg, "delta", 0.25);
  s.thresholds.tau_growth = get_or<double>(cfg, "tau_growth", 5);
  s.count_budget = get_or<double>(cfg, "budget", 2e9);
  s.scan_budget = get_or<double>(cfg, "scan_budget", 1e13);
  s.solver.budget = s.count_budget;
  return s;
}

// ---------------------------------------------------------------------------
// Checkpointed scan

struct ExecOptions {
  int workers = 1;
  std::uint64_t chunk_size = 4096;
  std::string checkpoint_dir;  // empty: no checkpoints
  bool resume = false;
  std::int64_t stop_after_chunks = -1;  // testing aid: stop once this many chunks were computed
};

inline ExecOptions exec_options(const json& cfg) {
  ExecOptions ex;
  ex.workers = get_or<int>(cfg, "workers", 1);
  ex.chunk_size = get_or<std::uint64_t>(cfg, "chunk_size", 4096);
  ex.checkpoint_dir = get_or<std::string>(cfg, "checkpoint_dir", "");
  ex.resume = get_or<bool>(cfg, "resume", false);
  ex.stop_after_chunks = get_or<std::int64_t>(cfg, "stop_after_chunks", -1);
  PTLAB_REQUIRE(ex.workers >= 1, "workers must be positive");
  PTLAB_REQUIRE(ex.chunk_size >= 1, "chunk_size must be positive");
  return ex;
}

inline std::string chunk_path(const std::string& dir, std::uint64_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "chunk_%08llu.ckpt", static_cast<unsigned long long>(id));
  return (std::filesystem::path(dir) / buf).string();
}

inline std::string encode_chunk(const std::string& hash, std::uint64_t id, std::uint64_t begin, std::uint64_t end,
                                const std::vector<std::string>& lines) {
  std::string body = "ptlab-chunk v1\nconfig_hash " + hash + "\nchunk " + std::to_string(id) + " " +
                     std::to_string(begin) + " " + std::to_string(end) + "\nrows " + std::to_string(lines.size()) + "\n";
  for (const auto& l : lines) body += l + "\n";
  return body + "checksum " + hex64(fnv1a(body)) + "\n";
}

/// Rows of a chunk file, or nothing when the file is missing, torn, or from another run.
inline std::optional<std::vector<std::string>> decode_chunk(const std::string& text, const std::string& hash,
                                                            std::uint64_t id, std::uint64_t begin, std::uint64_t end) {
  auto cut = text.rfind("checksum ");
  if (cut == std::string::npos || (cut > 0 && text[cut - 1] != '\n')) return std::nullopt;
  const std::string body = text.substr(0, cut);
  if (text.substr(cut) != "checksum " + hex64(fnv1a(body)) + "\n") return std::nullopt;
  std::istringstream in(body);
  std::string line;
  std::vector<std::string> head;
  for (int i = 0; i < 4 && std::getline(in, line); ++i) head.push_back(line);
  if (head.size() != 4 || head[0] != "ptlab-chunk v1" || head[1] != "config_hash " + hash) return std::nullopt;
  if (head[2] != "chunk " + std::to_string(id) + " " + std::to_string(begin) + " " + std::to_string(end))
    return std::nullopt;
  if (head[3].rfind("rows ", 0) != 0) return std::nullopt;
  std::uint64_t n = std::stoull(head[3].substr(5));
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  if (rows.size() != n) return std::nullopt;
  return rows;
}

inline void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    PTLAB_REQUIRE(out.good(), "cannot write " + tmp);
    out << text;
    out.flush();
    PTLAB_REQUIRE(out.good(), "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

struct ScanRun {
  bool completed = false;
  std::uint64_t chunks = 0, reused = 0, computed = 0;
  std::string csv;  // full document when completed
};

/// Provenance line, header, then rows in item order. Chunks run one after another with the
/// items of a chunk spread over the workers; only this thread touches the checkpoint files.
inline ScanRun run_scan(const ScanConfig& cfg, const json& resolved, const ExecOptions& ex) {
  ScanContext ctx(cfg);
  ctx.check_budget();
  const std::string hash = config_hash(resolved);
  const std::uint64_t items = ctx.item_count();
  ScanRun run;
  run.chunks = (items + ex.chunk_size - 1) / ex.chunk_size;
  if (!ex.checkpoint_dir.empty()) std::filesystem::create_directories(ex.checkpoint_dir);

  std::string csv = "# ptlab scan schema=v1 config_hash=" + hash + " config=" + provenance_config(resolved).dump() + "\n";
  csv += csv_header(ctx.m(), cfg.R) + "\n";
  for (std::uint64_t id = 0; id < run.chunks; ++id) {
    const std::uint64_t b = id * ex.chunk_size, e = std::min(items, b + ex.chunk_size);
    std::optional<std::vector<std::string>> lines;
    if (!ex.checkpoint_dir.empty() && ex.resume) {
      std::ifstream in(chunk_path(ex.checkpoint_dir, id), std::ios::binary);
      if (in.good()) {
        std::stringstream ss;
        ss << in.rdbuf();
        lines = decode_chunk(ss.str(), hash, id, b, e);
      }
      if (lines) ++run.reused;
    }
    if (!lines) {
      if (ex.stop_after_chunks >= 0 && static_cast<std::int64_t>(run.computed) >= ex.stop_after_chunks) return run;
      lines.emplace();
      for (const auto& row : scan_items(ctx, b, e, ex.workers)) lines->push_back(csv_row(cfg, row));
      ++run.computed;
      if (!ex.checkpoint_dir.empty()) write_file_atomic(chunk_path(ex.checkpoint_dir, id), encode_chunk(hash, id, b, e, *lines));
    }
    for (const auto& l : *lines) csv += l + "\n";
  }
  run.completed = true;
  run.csv = std::move(csv);
  return run;
}

}  // namespace ptlab::harness

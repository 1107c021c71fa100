#pragma once

// Command implementations behind the circhad tool. Each command produces one
// Outcome: a JSON document {command, inputs, result, ok}, a text rendering
// of the same content, and the process exit code.
//
// Exit codes: 0 success or property holds, 1 property fails or search
// incomplete, 2 usage or parse error.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "circhad/blockform.hpp"
#include "circhad/error.hpp"
#include "circhad/matchchase.hpp"
#include "circhad/searcher.hpp"
#include "circhad/seqcore.hpp"

namespace circhad::cmd {

using json = nlohmann::json;

enum ExitCode : int { exit_ok = 0, exit_fail = 1, exit_usage = 2 };

struct Outcome {
  json doc;
  std::string text;
  int exit_code = exit_ok;
};

namespace detail {

inline json matrix_json(const SymBlockMatrix& m) { return json::array({{m.diag, m.off}, {m.off, m.diag}}); }

inline std::string matrix_text(const SymBlockMatrix& m, const std::string& indent = "  ") {
  std::ostringstream out;
  const int w = static_cast<int>(std::max(std::to_string(m.diag).size(), std::to_string(m.off).size()));
  out << indent << "[ " << std::setw(w) << m.diag << ' ' << std::setw(w) << m.off << " ]\n";
  out << indent << "[ " << std::setw(w) << m.off << ' ' << std::setw(w) << m.diag << " ]\n";
  return out.str();
}

inline json pair_json(const IndexPair& p) { return json::array({p.first, p.second}); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw usage_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline Outcome finish(std::string command, json inputs, json result, bool ok, std::string text, int code) {
  Outcome o;
  o.doc = {{"command", std::move(command)}, {"inputs", std::move(inputs)}, {"result", std::move(result)}, {"ok", ok}};
  o.text = std::move(text);
  o.exit_code = code;
  return o;
}

/// Runs `body`; a usage_error becomes an exit-2 outcome carrying the message.
inline Outcome guarded(const std::string& command, const json& inputs, const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const matching_file_error& e) {
    Outcome o = finish(command, inputs, nullptr, false, std::string("error: ") + e.what() + "\n", exit_usage);
    o.doc["error"] = "invalid matching file";
    o.doc["diagnostics"] = e.diagnostics();
    return o;
  } catch (const usage_error& e) {
    Outcome o = finish(command, inputs, nullptr, false, std::string("error: ") + e.what() + "\n", exit_usage);
    o.doc["error"] = e.what();
    return o;
  }
}

inline IndexPair parse_start(std::string_view text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '(' && c != ')') s.push_back(c);
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw usage_error("start must look like 'i,j', got '" + std::string(text) + "'");
  IndexPair p;
  auto parse_one = [&](std::string_view part, std::size_t& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
      throw usage_error("start must look like 'i,j', got '" + std::string(text) + "'");
  };
  std::string_view sv(s);
  parse_one(sv.substr(0, comma), p.first);
  parse_one(sv.substr(comma + 1), p.second);
  return p;
}

inline json trace_json(const ChaseTrace& t) {
  json steps = json::array();
  for (const ChaseStep& s : t.steps)
    steps.push_back({{"obligation", pair_json(s.obligation)},
                     {"matched", s.matched ? pair_json(*s.matched) : json(nullptr)}});
  return {{"steps", steps}, {"outcome", to_string(t.outcome)}, {"terminal", pair_json(t.terminal)}};
}

}  // namespace detail

using detail::parse_start;

inline Outcome verify(std::string_view seq) {
  const json inputs = {{"sequence", seq}};
  return detail::guarded("verify", inputs, [&] {
    const SignSequence h = SignSequence::parse(seq);
    const PafSpectrum spec = paf_spectrum(h);
    const bool ok = is_circulant_hadamard(h);
    std::ostringstream text;
    text << "sequence: " << h.to_string() << " (length " << h.size() << ")\n";
    text << "row sum: " << row_sum(h) << '\n';
    text << "paf:";
    for (std::int64_t v : spec.values) text << ' ' << v;
    text << "\ncirculant Hadamard: " << (ok ? "yes" : "no") << '\n';
    json result = {{"length", h.size()}, {"row_sum", row_sum(h)}, {"paf", spec.values}, {"circulant_hadamard", ok}};
    return detail::finish("verify", inputs, std::move(result), ok, text.str(), ok ? exit_ok : exit_fail);
  });
}

inline Outcome paf(std::string_view seq, std::optional<std::int64_t> lag) {
  json inputs = {{"sequence", seq}};
  if (lag) inputs["lag"] = *lag;
  return detail::guarded("paf", inputs, [&] {
    const SignSequence h = SignSequence::parse(seq);
    std::ostringstream text;
    json result;
    if (lag) {
      const std::int64_t v = circhad::paf(h, *lag);
      text << "paf(" << *lag << ") = " << v << '\n';
      result = {{"lag", *lag}, {"paf", v}};
    } else {
      const PafSpectrum spec = paf_spectrum(h);
      for (std::size_t u = 0; u < spec.size(); ++u) text << "paf(" << u << ") = " << spec[u] << '\n';
      result = {{"spectrum", spec.values}};
    }
    return detail::finish("paf", inputs, std::move(result), true, text.str(), exit_ok);
  });
}

inline Outcome decompose(std::string_view seq) {
  const json inputs = {{"sequence", seq}};
  return detail::guarded("decompose", inputs, [&] {
    const BlockSequence bs = block_decompose(SignSequence::parse(seq));
    std::ostringstream text;
    json parities = json::array();
    json symmetric = json::object();
    text << "blocks: " << bs.to_string() << '\n';
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const Parity p = parity(bs[i]);
      parities.push_back(to_string(p));
      text << "  M" << i << " " << to_char(bs[i].diag) << to_char(bs[i].offdiag) << "  " << to_string(p);
      if (p == Parity::even) {
        const bool sym = is_symmetric_even(bs, static_cast<std::int64_t>(i));
        symmetric[std::to_string(i)] = sym;
        text << (sym ? "  symmetric" : "  not symmetric");
      }
      text << '\n';
    }
    text << "even count: " << even_count(bs) << " (n = " << bs.n() << ")\n";
    json result = {{"blocks", bs.to_string()},
                   {"n", bs.n()},
                   {"parities", parities},
                   {"even_count", even_count(bs)},
                   {"symmetric", symmetric}};
    return detail::finish("decompose", inputs, std::move(result), true, text.str(), exit_ok);
  });
}

inline Outcome eqn1(std::string_view blocks, std::optional<std::int64_t> lag) {
  json inputs = {{"blocks", blocks}};
  if (lag) inputs["lag"] = *lag;
  return detail::guarded("eqn1", inputs, [&] {
    const BlockSequence bs = BlockSequence::parse(blocks);
    std::ostringstream text;
    json result;
    bool ok = true;
    if (lag) {
      const SymBlockMatrix r = eqn1_residual(bs, *lag);
      ok = r.is_zero();
      text << "residual at u=" << *lag << ":\n" << detail::matrix_text(r);
      result = {{"lag", *lag}, {"residual", detail::matrix_json(r)}, {"zero", ok}};
    } else {
      json per_lag = json::array();
      for (std::size_t u = 1; u < bs.size(); ++u) {
        const SymBlockMatrix r = eqn1_residual(bs, static_cast<std::int64_t>(u));
        ok = ok && r.is_zero();
        text << "u=" << u << ":\n" << detail::matrix_text(r);
        per_lag.push_back({{"lag", u}, {"residual", detail::matrix_json(r)}, {"zero", r.is_zero()}});
      }
      result = {{"residuals", per_lag}, {"holds", ok}};
    }
    text << "condition " << (ok ? "holds" : "fails") << '\n';
    return detail::finish("eqn1", inputs, std::move(result), ok, text.str(), ok ? exit_ok : exit_fail);
  });
}

/// Without a matchings file: greedy matchings at `lag` (or every lag), ok iff
/// all are perfect. With one: validates the file, ok iff it parses cleanly.
inline Outcome match(std::string_view blocks, std::optional<std::int64_t> lag,
                     const std::optional<std::string>& matchings_path) {
  json inputs = {{"blocks", blocks}};
  if (lag) inputs["lag"] = *lag;
  if (matchings_path) inputs["matchings"] = *matchings_path;
  return detail::guarded("match", inputs, [&] {
    const BlockSequence bs = BlockSequence::parse(blocks);
    std::ostringstream text;
    if (matchings_path) {
      const MatchingBook book = parse_matchings(detail::read_file(*matchings_path), bs);
      text << "matching file valid\n" << render_matchings(book);
      json lags = json::array();
      for (const auto& [u, m] : book) lags.push_back({{"lag", u}, {"pairs", m.pairs.size()}, {"perfect", is_perfect(bs, m)}});
      return detail::finish("match", inputs, {{"valid", true}, {"lags", lags}}, true, text.str(), exit_ok);
    }
    std::vector<std::size_t> lags;
    if (lag)
      lags.push_back(checked_lag(bs, *lag));
    else
      for (std::size_t u = 1; u < bs.size(); ++u) lags.push_back(u);
    json per_lag = json::array();
    bool all_perfect = true;
    for (std::size_t u : lags) {
      const LagMatching m = find_matching(bs, static_cast<std::int64_t>(u));
      const bool perfect = is_perfect(bs, m);
      all_perfect = all_perfect && perfect;
      json pairs = json::array();
      json unmatched = json::array();
      for (const MatchedPair& mp : m.pairs) {
        pairs.push_back(json::array({detail::pair_json(mp.a), detail::pair_json(mp.b)}));
        text << "u=" << u << ": " << to_string(mp.a) << "~" << to_string(mp.b) << '\n';
      }
      for (const IndexPair& p : even_pairs_at_lag(bs, static_cast<std::int64_t>(u)))
        if (!m.partner(p)) {
          unmatched.push_back(detail::pair_json(p));
          text << "# u=" << u << ": " << to_string(p) << " unmatched\n";
        }
      per_lag.push_back({{"lag", u}, {"pairs", pairs}, {"unmatched", unmatched}, {"perfect", perfect}});
    }
    text << (all_perfect ? "all matchings perfect\n" : "some matchings are partial\n");
    return detail::finish("match", inputs, {{"matchings", per_lag}, {"perfect", all_perfect}}, all_perfect, text.str(),
                          all_perfect ? exit_ok : exit_fail);
  });
}

inline Outcome chase(std::string_view blocks, const std::string& matchings_path, std::string_view start) {
  const json inputs = {{"blocks", blocks}, {"matchings", matchings_path}, {"start", start}};
  return detail::guarded("chase", inputs, [&] {
    const BlockSequence bs = BlockSequence::parse(blocks);
    const MatchingBook book = parse_matchings(detail::read_file(matchings_path), bs);
    const ChaseTrace trace = circhad::chase(bs, book, parse_start(start));
    const bool ok = trace.outcome != ChaseOutcome::matching_unavailable;
    return detail::finish("chase", inputs, detail::trace_json(trace), ok, render_trace(trace), ok ? exit_ok : exit_fail);
  });
}

/// Self-contained check of the built-in n = 3 counterexample.
inline Outcome counterexample() {
  const json inputs = json::object();
  return detail::guarded("counterexample", inputs, [&] {
    const Counterexample ce = known_counterexample();
    json checks = json::array();
    std::ostringstream text;
    bool all = true;
    auto record = [&](const std::string& name, bool pass, json detail) {
      all = all && pass;
      checks.push_back({{"name", name}, {"pass", pass}, {"detail", std::move(detail)}});
      text << (pass ? "[pass] " : "[FAIL] ") << name << '\n';
    };

    const std::vector<std::size_t> evens = even_indices(ce.blocks);
    record("even blocks are exactly M0, M2, M4", evens == std::vector<std::size_t>{0, 2, 4}, evens);

    json sym = json::object();
    bool none_symmetric = true;
    for (std::size_t i : evens) {
      const bool s = is_symmetric_even(ce.blocks, static_cast<std::int64_t>(i));
      sym[std::to_string(i)] = s;
      none_symmetric = none_symmetric && !s;
    }
    record("no even block is symmetric", none_symmetric, sym);

    json valid = json::object();
    bool both_valid = ce.book.size() == 2;
    for (const auto& [u, m] : ce.book) {
      const ValidationResult v = validate_matching(ce.blocks, m);
      valid[std::to_string(u)] = v.ok();
      both_valid = both_valid && v.ok();
    }
    record("matchings (0,2)~(2,4) and (0,4)~(4,2) are valid", both_valid, valid);

    const ChaseTrace trace = circhad::chase(ce.blocks, ce.book, ce.start);
    const std::vector<ChaseStep> expected{{{0, 2}, IndexPair{2, 4}}, {{0, 4}, IndexPair{4, 2}}};
    const bool cycles = trace.outcome == ChaseOutcome::cycle && trace.steps == expected &&
                        trace.terminal == IndexPair{0, 2};
    record("chase from (0,2) cycles back to (0,2)", cycles, detail::trace_json(trace));

    text << "blocks: " << ce.blocks.to_string() << '\n' << render_matchings(ce.book) << render_trace(trace);
    json result = {{"blocks", ce.blocks.to_string()}, {"checks", checks}, {"trace", detail::trace_json(trace)}};
    return detail::finish("counterexample", inputs, std::move(result), all, text.str(), all ? exit_ok : exit_fail);
  });
}

inline json report_json(const SearchReport& r, bool include_elapsed = true) {
  json sols = json::array();
  for (const SignSequence& h : r.solutions) sols.push_back(h.to_string());
  json canon = json::array();
  for (const SignSequence& h : r.canonical) canon.push_back(h.to_string());
  json j = {{"order", r.order},
            {"sequences_examined", r.sequences_examined},
            {"solution_count", r.solutions.size()},
            {"solutions", sols},
            {"canonical", canon},
            {"prune_statistics",
             {{"order_rejected_by_row_sum", r.prunes.order_rejected},
              {"row_sum_cuts", r.prunes.row_sum_cuts},
              {"prefix_paf_cuts", r.prunes.prefix_paf_cuts}}},
            {"shards_total", r.shards_total},
            {"shards_completed", r.shards_completed},
            {"incomplete", r.incomplete}};
  if (include_elapsed) j["elapsed_seconds"] = r.elapsed_seconds;
  return j;
}

inline Outcome search(const SearchConfig& cfg) {
  json inputs = {{"order", cfg.order},
                 {"prunes", cfg.prune_names()},
                 {"workers", cfg.workers},
                 {"canonical", cfg.canonicalize}};
  if (cfg.budget_seconds) inputs["budget_seconds"] = *cfg.budget_seconds;
  if (cfg.ledger) inputs["ledger"] = cfg.ledger->string();
  return detail::guarded("search", inputs, [&] {
    const SearchReport r = circhad::search(cfg);
    std::ostringstream text;
    text << "order " << r.order << ": " << r.solutions.size() << " solution(s), " << r.sequences_examined
         << " sequences examined, " << std::fixed << std::setprecision(3) << r.elapsed_seconds << " s\n";
    if (r.prunes.order_rejected) text << "row-sum prune: order " << r.order << " is not a perfect square\n";
    text << "cuts: row-sum " << r.prunes.row_sum_cuts << ", prefix-paf " << r.prunes.prefix_paf_cuts << '\n';
    text << "shards: " << r.shards_completed << "/" << r.shards_total << (r.incomplete ? " (incomplete)" : "") << '\n';
    for (const SignSequence& h : r.solutions) text << "  " << h.to_string() << '\n';
    if (cfg.canonicalize) {
      text << "classes under rotation and negation: " << r.canonical.size() << '\n';
      for (const SignSequence& h : r.canonical) text << "  " << h.to_string() << '\n';
    }
    return detail::finish("search", inputs, report_json(r), !r.incomplete, text.str(),
                          r.incomplete ? exit_fail : exit_ok);
  });
}

/// Runs `run` on every non-empty line of `path` and gathers the outcomes in
/// one document. The exit code is the worst of the per-line codes.
inline Outcome over_file(const std::string& command, const std::string& path,
                         const std::function<Outcome(std::string_view)>& run) {
  const json inputs = {{"file", path}};
  return detail::guarded(command, inputs, [&] {
    std::istringstream lines(detail::read_file(path));
    std::string line;
    json results = json::array();
    std::string text;
    bool ok = true;
    int code = exit_ok;
    while (std::getline(lines, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      Outcome o = run(line);
      ok = ok && o.doc["ok"].get<bool>();
      code = std::max(code, o.exit_code);
      text += "== " + line + "\n" + o.text;
      results.push_back(std::move(o.doc));
    }
    return detail::finish(command, inputs, std::move(results), ok, text, code);
  });
}

}  // namespace circhad::cmd

#pragma once

// Matching pairs at a fixed lag and the chase procedure over them.
//
// At lag u, an index pair (i, i+u) is live when both M_i and M_{i+u} are
// even; its product M_i M_{i+u} is then +2J or -2J. A LagMatching is a set of
// unordered 2-sets {(i, i+u), (l, l+u)} of live pairs whose products are
// negatives of each other, each live pair used at most once. Storing 2-sets
// makes the relation involutive by construction.
//
// The chase follows one step rule: an obligation (a, b) matched to (l, m)
// produces the next obligation (a, m). The first coordinate never moves.
// This is the first of the five cases of the argument being checked; the
// other four are not modelled.

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "circhad/blockform.hpp"
#include "circhad/error.hpp"

namespace circhad {

struct IndexPair {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const IndexPair&, const IndexPair&) = default;
  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

inline std::string to_string(const IndexPair& p) {
  return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

/// Unordered 2-set of pairs; kept normalized so that `a < b`.
struct MatchedPair {
  IndexPair a;
  IndexPair b;

  MatchedPair() = default;
  MatchedPair(IndexPair x, IndexPair y) : a(std::min(x, y)), b(std::max(x, y)) {}

  bool contains(const IndexPair& p) const noexcept { return a == p || b == p; }
  const IndexPair& partner_of(const IndexPair& p) const noexcept { return a == p ? b : a; }

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct LagMatching {
  std::size_t lag = 0;
  std::vector<MatchedPair> pairs;

  std::optional<IndexPair> partner(const IndexPair& p) const {
    for (const MatchedPair& mp : pairs)
      if (mp.contains(p)) return mp.partner_of(p);
    return std::nullopt;
  }

  friend bool operator==(const LagMatching&, const LagMatching&) = default;
};

/// Lag-indexed collection of matchings over one block sequence, at most one per lag.
class MatchingBook {
 public:
  void add(LagMatching m) {
    if (by_lag_.count(m.lag)) throw usage_error("matching book already holds lag " + std::to_string(m.lag));
    const std::size_t lag = m.lag;
    by_lag_.emplace(lag, std::move(m));
  }

  /// Adds one 2-set, creating the lag entry on first use.
  void add_pair(std::size_t lag, MatchedPair mp) {
    auto [it, inserted] = by_lag_.try_emplace(lag);
    if (inserted) it->second.lag = lag;
    it->second.pairs.push_back(mp);
  }

  const LagMatching* find(std::size_t lag) const {
    auto it = by_lag_.find(lag);
    return it == by_lag_.end() ? nullptr : &it->second;
  }

  bool empty() const noexcept { return by_lag_.empty(); }
  std::size_t size() const noexcept { return by_lag_.size(); }
  auto begin() const { return by_lag_.begin(); }
  auto end() const { return by_lag_.end(); }

  friend bool operator==(const MatchingBook&, const MatchingBook&) = default;

 private:
  std::map<std::size_t, LagMatching> by_lag_;
};

struct ValidationResult {
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
  explicit operator bool() const noexcept { return ok(); }
};

/// Live pairs (i, i+u) at lag u, ordered by first index.
inline std::vector<IndexPair> even_pairs_at_lag(const BlockSequence& bs, std::int64_t u) {
  const std::size_t lag = checked_lag(bs, u);
  std::vector<IndexPair> out;
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const std::size_t j = (i + lag) % bs.size();
    if (is_even(bs[i]) && is_even(bs[j])) out.push_back({i, j});
  }
  return out;
}

namespace detail {

inline void check_index_pair(const BlockSequence& bs, std::size_t lag, const IndexPair& p, const std::string& where,
                             std::vector<std::string>& out) {
  const std::size_t len = bs.size();
  if (p.first >= len || p.second >= len) {
    out.push_back(where + ": pair " + to_string(p) + " has an index outside 0.." + std::to_string(len - 1));
    return;
  }
  if (p.first == p.second) out.push_back(where + ": pair " + to_string(p) + " repeats an index");
  if ((p.first + lag) % len != p.second)
    out.push_back(where + ": pair " + to_string(p) + " is not at lag " + std::to_string(lag));
  if (!is_even(bs[p.first])) out.push_back(where + ": block " + std::to_string(p.first) + " is odd");
  if (!is_even(bs[p.second])) out.push_back(where + ": block " + std::to_string(p.second) + " is odd");
}

inline void check_matched_pair(const BlockSequence& bs, std::size_t lag, const MatchedPair& mp,
                               const std::string& where, std::vector<std::string>& out) {
  const std::size_t before = out.size();
  check_index_pair(bs, lag, mp.a, where, out);
  check_index_pair(bs, lag, mp.b, where, out);
  if (mp.a == mp.b) out.push_back(where + ": pair " + to_string(mp.a) + " matched with itself");
  if (out.size() != before) return;
  const SymBlockMatrix pa = block_product(bs[mp.a.first], bs[mp.a.second]);
  const SymBlockMatrix pb = block_product(bs[mp.b.first], bs[mp.b.second]);
  if (pa != -pb)
    out.push_back(where + ": products of " + to_string(mp.a) + " and " + to_string(mp.b) + " do not negate");
}

}  // namespace detail

/// Checks every LagMatching invariant against `bs`; violations are listed, never thrown.
inline ValidationResult validate_matching(const BlockSequence& bs, const LagMatching& m) {
  ValidationResult result;
  if (m.lag < 1 || m.lag >= bs.size()) {
    result.violations.push_back("lag " + std::to_string(m.lag) + " out of range 1.." + std::to_string(bs.size() - 1));
    return result;
  }
  std::set<IndexPair> used;
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const MatchedPair& mp = m.pairs[k];
    const std::string where = "u=" + std::to_string(m.lag) + " entry " + std::to_string(k);
    detail::check_matched_pair(bs, m.lag, mp, where, result.violations);
    for (const IndexPair& p : {mp.a, mp.b})
      if (!used.insert(p).second) result.violations.push_back(where + ": pair " + to_string(p) + " matched more than once");
  }
  return result;
}

inline ValidationResult validate_book(const BlockSequence& bs, const MatchingBook& book) {
  ValidationResult result;
  for (const auto& [lag, m] : book) {
    if (lag != m.lag) result.violations.push_back("book key " + std::to_string(lag) + " holds lag " + std::to_string(m.lag));
    ValidationResult r = validate_matching(bs, m);
    result.violations.insert(result.violations.end(), r.violations.begin(), r.violations.end());
  }
  return result;
}

/// Maximal matching at lag u: live pairs with product +2J are paired, in
/// first-index order, with live pairs whose product is -2J. Perfect exactly
/// when the two counts agree, i.e. when eqn1_residual(bs, u) is zero.
inline LagMatching find_matching(const BlockSequence& bs, std::int64_t u) {
  LagMatching m;
  m.lag = checked_lag(bs, u);
  std::vector<IndexPair> positive, negative;
  for (const IndexPair& p : even_pairs_at_lag(bs, u)) {
    const SymBlockMatrix prod = block_product(bs[p.first], bs[p.second]);
    (prod.diag > 0 ? positive : negative).push_back(p);
  }
  const std::size_t k = std::min(positive.size(), negative.size());
  for (std::size_t t = 0; t < k; ++t) m.pairs.emplace_back(positive[t], negative[t]);
  std::sort(m.pairs.begin(), m.pairs.end(), [](const MatchedPair& x, const MatchedPair& y) { return x.a < y.a; });
  return m;
}

/// True when every live pair at m.lag is matched.
inline bool is_perfect(const BlockSequence& bs, const LagMatching& m) {
  return 2 * m.pairs.size() == even_pairs_at_lag(bs, static_cast<std::int64_t>(m.lag)).size() &&
         validate_matching(bs, m).ok();
}

/// Book holding find_matching at every lag that has at least one matched 2-set.
inline MatchingBook greedy_book(const BlockSequence& bs) {
  MatchingBook book;
  for (std::size_t u = 1; u < bs.size(); ++u) {
    LagMatching m = find_matching(bs, static_cast<std::int64_t>(u));
    if (!m.pairs.empty()) book.add(std::move(m));
  }
  return book;
}

// ---------------------------------------------------------------------------
// chase

enum class ChaseOutcome { cycle, matching_unavailable, degenerate };

inline const char* to_string(ChaseOutcome o) noexcept {
  switch (o) {
    case ChaseOutcome::cycle: return "Cycle";
    case ChaseOutcome::matching_unavailable: return "MatchingUnavailable";
    case ChaseOutcome::degenerate: return "Degenerate";
  }
  return "?";
}

struct ChaseStep {
  IndexPair obligation;
  std::optional<IndexPair> matched;

  friend bool operator==(const ChaseStep&, const ChaseStep&) = default;
};

struct ChaseTrace {
  std::vector<ChaseStep> steps;
  ChaseOutcome outcome = ChaseOutcome::matching_unavailable;
  // Cycle: the recurring obligation. MatchingUnavailable: the unmatched one.
  // Degenerate: the collapsed pair (a, a).
  IndexPair terminal;

  friend bool operator==(const ChaseTrace&, const ChaseTrace&) = default;
};

/// Upper bound on chase steps for a sequence with E even blocks.
inline std::size_t chase_step_bound(const BlockSequence& bs) {
  const std::size_t e = even_count(bs);
  return e * e + 1;
}

inline ChaseTrace chase(const BlockSequence& bs, const MatchingBook& book, IndexPair start) {
  const std::size_t len = bs.size();
  if (start.first >= len || start.second >= len || start.first == start.second)
    throw usage_error("start " + to_string(start) + " is not a valid index pair");
  if (!is_even(bs[start.first]) || !is_even(bs[start.second]))
    throw usage_error("start " + to_string(start) + " does not join two even blocks");
  if (is_symmetric_even(bs, static_cast<std::int64_t>(start.first)))
    throw usage_error("start block " + std::to_string(start.first) + " is symmetric");
  if (ValidationResult v = validate_book(bs, book); !v)
    throw usage_error("matching book is invalid: " + v.violations.front());

  ChaseTrace trace;
  std::set<IndexPair> seen{start};
  IndexPair current = start;
  for (;;) {
    const std::size_t lag = (current.second + len - current.first) % len;
    const LagMatching* m = book.find(lag);
    const std::optional<IndexPair> matched = m ? m->partner(current) : std::nullopt;
    trace.steps.push_back({current, matched});
    if (!matched) {
      trace.outcome = ChaseOutcome::matching_unavailable;
      trace.terminal = current;
      return trace;
    }
    const IndexPair next{current.first, matched->second};
    if (next.first == next.second) {
      trace.outcome = ChaseOutcome::degenerate;
      trace.terminal = next;
      return trace;
    }
    if (!seen.insert(next).second) {
      trace.outcome = ChaseOutcome::cycle;
      trace.terminal = next;
      return trace;
    }
    current = next;
  }
}

inline std::string render_trace(const ChaseTrace& trace) {
  std::ostringstream out;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const ChaseStep& s = trace.steps[k];
    out << "step " << k << ": obligation " << to_string(s.obligation) << " ~ "
        << (s.matched ? to_string(*s.matched) : std::string("(none)")) << '\n';
  }
  out << "outcome: " << to_string(trace.outcome) << " at " << to_string(trace.terminal) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// matching file format:  u=<lag>: (i,j)~(l,m)   one 2-set per line

/// Thrown by parse_matchings; carries one diagnostic per offending line.
class matching_file_error : public usage_error {
 public:
  explicit matching_file_error(std::vector<std::string> diagnostics)
      : usage_error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string join(const std::vector<std::string>& lines) {
    std::string s = "invalid matching file";
    for (const std::string& l : lines) s += "\n  " + l;
    return s;
  }
  std::vector<std::string> diagnostics_;
};

namespace detail {

class LineCursor {
 public:
  explicit LineCursor(std::string_view s) : s_(s) {}
  bool eat(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool number(std::size_t& out) {
    const char* b = s_.data() + pos_;
    auto [p, ec] = std::from_chars(b, s_.data() + s_.size(), out);
    if (ec != std::errc{} || p == b) return false;
    pos_ += static_cast<std::size_t>(p - b);
    return true;
  }
  bool pair(IndexPair& p) { return eat('(') && number(p.first) && eat(',') && number(p.second) && eat(')'); }
  bool done() const noexcept { return pos_ == s_.size(); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses and validates a matching file against `bs`. Blank lines and lines
/// starting with '#' are skipped. Lines sharing a lag form one LagMatching.
inline MatchingBook parse_matchings(std::string_view text, const BlockSequence& bs) {
  std::vector<std::string> diags;
  MatchingBook book;
  std::map<std::pair<std::size_t, IndexPair>, std::size_t> first_use;  // (lag, pair) -> line
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    std::string line;
    for (char c : raw)
      if (c != ' ' && c != '\t' && c != '\r') line.push_back(c);
    if (line.empty() || line.front() == '#') continue;

    const std::string where = "line " + std::to_string(line_no);
    detail::LineCursor cur(line);
    std::size_t lag = 0;
    IndexPair x, y;
    if (!(cur.eat('u') && cur.eat('=') && cur.number(lag) && cur.eat(':') && cur.pair(x) && cur.eat('~') &&
          cur.pair(y) && cur.done())) {
      diags.push_back(where + ": expected 'u=<lag>: (i,j)~(l,m)', got '" + std::string(raw) + "'");
      continue;
    }
    if (lag < 1 || lag >= bs.size()) {
      diags.push_back(where + ": lag " + std::to_string(lag) + " out of range 1.." + std::to_string(bs.size() - 1));
      continue;
    }
    const MatchedPair mp(x, y);
    const std::size_t before = diags.size();
    detail::check_matched_pair(bs, lag, mp, where, diags);
    for (const IndexPair& p : {mp.a, mp.b}) {
      auto [it, fresh] = first_use.try_emplace({lag, p}, line_no);
      if (!fresh)
        diags.push_back(where + ": pair " + to_string(p) + " already matched at lag " + std::to_string(lag) +
                        " on line " + std::to_string(it->second));
    }
    if (diags.size() == before) book.add_pair(lag, mp);
  }
  if (!diags.empty()) throw matching_file_error(std::move(diags));
  return book;
}

inline std::string render_matchings(const MatchingBook& book) {
  std::string out;
  for (const auto& [lag, m] : book)
    for (const MatchedPair& mp : m.pairs)
      out += "u=" + std::to_string(lag) + ": " + to_string(mp.a) + "~" + to_string(mp.b) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// the n = 3 counterexample to the chase argument

struct Counterexample {
  BlockSequence blocks;
  MatchingBook book;
  IndexPair start;
};

/// Blocks ++,+-,--,+-,--,+- with (0,2)~(2,4) at lag 2 and (0,4)~(4,2) at
/// lag 4, chased from (0,2).
inline Counterexample known_counterexample() {
  Counterexample ce{BlockSequence::parse("++,+-,--,+-,--,+-"), {}, {0, 2}};
  ce.book.add_pair(2, MatchedPair({0, 2}, {2, 4}));
  ce.book.add_pair(4, MatchedPair({0, 4}, {4, 2}));
  return ce;
}

}  // namespace circhad

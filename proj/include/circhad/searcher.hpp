#pragma once

// Exhaustive search for circulant Hadamard first rows, and enumeration of
// block sequences.
//
// The search fixes h[0] = +1 and restores negations when reporting. Work is
// split into shards by the prefix h[0..depth-1]; shards run independently on
// a worker pool and are merged in prefix order, so reports do not depend on
// scheduling. Two prunes are available, both performance-only:
//
//   row-sum     Summing all PAF values gives (sum h)^2, so with every
//               off-peak value zero (sum h)^2 = L. Non-square orders are
//               rejected outright; otherwise the number of -1 entries is
//               pinned to (L - sqrt L) / 2 or (L + sqrt L) / 2.
//   prefix-paf  For each lag, the terms fixed by the current prefix must be
//               cancellable by the terms still open.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "circhad/blockform.hpp"
#include "circhad/error.hpp"
#include "circhad/seqcore.hpp"

namespace circhad {

struct SearchConfig {
  std::size_t order = 4;
  bool prune_row_sum = true;
  bool prune_prefix_paf = true;
  std::size_t workers = 1;
  bool canonicalize = false;
  std::optional<double> budget_seconds;
  /// Shard prefix length including the fixed h[0]; 0 picks min(order, 9).
  std::size_t shard_depth = 0;
  std::optional<std::filesystem::path> ledger;

  void validate() const {
    if (order < 4 || order % 4 != 0)
      throw usage_error("order must be a positive multiple of 4, got " + std::to_string(order));
    if (order > 64) throw usage_error("orders above 64 are not supported");
    if (workers < 1) throw usage_error("workers must be at least 1");
    if (shard_depth > order) throw usage_error("shard depth exceeds the order");
    if (budget_seconds && !(*budget_seconds >= 0)) throw usage_error("budget must be non-negative");
  }

  std::size_t effective_depth() const { return shard_depth ? shard_depth : std::min<std::size_t>(order, 9); }

  std::string prune_names() const {
    std::string s;
    if (prune_row_sum) s += "row-sum";
    if (prune_prefix_paf) s += s.empty() ? "prefix-paf" : ",prefix-paf";
    return s.empty() ? "none" : s;
  }
};

struct PruneStatistics {
  bool order_rejected = false;       // row-sum: order is not a perfect square
  std::uint64_t row_sum_cuts = 0;    // branches cut by the -1 count bound
  std::uint64_t prefix_paf_cuts = 0; // branches cut by a partial PAF bound

  friend bool operator==(const PruneStatistics&, const PruneStatistics&) = default;
};

/// Outcome of one prefix shard. Solutions have h[0] = +1 and are kept sorted.
struct ShardResult {
  std::uint64_t examined = 0;
  std::uint64_t row_sum_cuts = 0;
  std::uint64_t prefix_paf_cuts = 0;
  std::vector<std::string> solutions;

  friend bool operator==(const ShardResult&, const ShardResult&) = default;
};

/// Commutative and associative combination of shard results.
inline ShardResult merge(const ShardResult& a, const ShardResult& b) {
  ShardResult out;
  out.examined = a.examined + b.examined;
  out.row_sum_cuts = a.row_sum_cuts + b.row_sum_cuts;
  out.prefix_paf_cuts = a.prefix_paf_cuts + b.prefix_paf_cuts;
  out.solutions.reserve(a.solutions.size() + b.solutions.size());
  std::merge(a.solutions.begin(), a.solutions.end(), b.solutions.begin(), b.solutions.end(),
             std::back_inserter(out.solutions));
  return out;
}

struct SearchReport {
  std::size_t order = 0;
  std::uint64_t sequences_examined = 0;
  std::vector<SignSequence> solutions;  // sorted, + before -
  std::vector<SignSequence> canonical;  // filled when canonicalize is set
  double elapsed_seconds = 0;
  PruneStatistics prunes;
  bool incomplete = false;
  std::size_t shards_total = 0;
  std::size_t shards_completed = 0;

  /// Equality over everything except wall time.
  bool same_result(const SearchReport& o) const {
    return order == o.order && sequences_examined == o.sequences_examined && solutions == o.solutions &&
           canonical == o.canonical && prunes == o.prunes && incomplete == o.incomplete &&
           shards_total == o.shards_total && shards_completed == o.shards_completed;
  }
};

inline std::optional<std::size_t> exact_sqrt(std::size_t x) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(x))));
  while (r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  if (r * r == x) return r;
  return std::nullopt;
}

/// True when the row-sum condition rules the whole order out (L not a square).
inline bool rowsum_prune_applicable(std::size_t order) {
  if (order % 4 != 0) throw usage_error("order must be divisible by 4");
  return !exact_sqrt(order).has_value();
}

/// Admissible numbers of -1 entries: (L - sqrt L)/2 and (L + sqrt L)/2, or
/// nothing when L is not a square.
inline std::vector<std::size_t> admissible_minus_counts(std::size_t order) {
  auto r = exact_sqrt(order);
  if (!r) return {};
  return {(order - *r) / 2, (order + *r) / 2};
}

/// Least of the 2L rotations and negations of h, ordering + before -.
inline SignSequence canonical_representative(const SignSequence& h) {
  SignSequence best = h;
  const SignSequence neg = negate(h);
  for (std::size_t s = 0; s < h.size(); ++s) {
    for (const SignSequence* base : {&h, &neg}) {
      SignSequence r = rotate(*base, static_cast<std::int64_t>(s));
      if (r < best) best = std::move(r);
    }
  }
  return best;
}

namespace detail {

class ShardSearch {
 public:
  ShardSearch(const SearchConfig& cfg, std::atomic<bool>* expired, std::chrono::steady_clock::time_point deadline,
              bool has_deadline)
      : cfg_(cfg),
        len_(cfg.order),
        half_(cfg.order / 2),
        h_(cfg.order, 0),
        partial_(half_ + 1, 0),
        expired_(expired),
        deadline_(deadline),
        has_deadline_(has_deadline) {
    if (cfg_.prune_row_sum) allowed_minus_ = admissible_minus_counts(len_);
    // open_[p][u]: terms of PAF(u) not yet fixed once p entries are set.
    open_.assign(len_ + 1, std::vector<int>(half_ + 1, 0));
    for (std::size_t p = 0; p <= len_; ++p)
      for (std::size_t u = 1; u <= half_; ++u) {
        const auto pi = static_cast<long>(p);
        const long known = std::max(0L, pi - static_cast<long>(u)) + std::max(0L, pi - static_cast<long>(len_ - u));
        open_[p][u] = static_cast<int>(static_cast<long>(len_) - known);
      }
  }

  /// Runs the shard with prefix `prefix` (entries 0..prefix.size()-1). Returns
  /// nullopt when the deadline cut it short.
  std::optional<ShardResult> run(const std::vector<int>& prefix) {
    result_ = {};
    minus_ = 0;
    std::fill(partial_.begin(), partial_.end(), 0);
    aborted_ = false;
    std::size_t depth = 0;
    for (; depth < prefix.size(); ++depth) {
      place(depth, prefix[depth]);
      if (!feasible(depth + 1)) return result_;
    }
    descend(depth);
    if (aborted_) return std::nullopt;
    std::sort(result_.solutions.begin(), result_.solutions.end());
    return result_;
  }

 private:
  void place(std::size_t q, int s) {
    h_[q] = s;
    if (s < 0) ++minus_;
    for (std::size_t j = 0; j < q; ++j) {
      const int delta = h_[j] * s;
      const std::size_t d = q - j;
      if (d <= half_) partial_[d] += delta;
      if (d >= half_) partial_[len_ - d] += delta;
    }
  }

  void unplace(std::size_t q) {
    const int s = h_[q];
    for (std::size_t j = 0; j < q; ++j) {
      const int delta = h_[j] * s;
      const std::size_t d = q - j;
      if (d <= half_) partial_[d] -= delta;
      if (d >= half_) partial_[len_ - d] -= delta;
    }
    if (s < 0) --minus_;
    h_[q] = 0;
  }

  /// Prune checks after `p` entries are placed; counts the cut.
  bool feasible(std::size_t p) {
    if (cfg_.prune_row_sum) {
      const std::size_t open = len_ - p;
      bool ok = false;
      for (std::size_t k : allowed_minus_)
        if (minus_ <= k && k <= minus_ + open) ok = true;
      if (!ok) {
        ++result_.row_sum_cuts;
        return false;
      }
    }
    if (cfg_.prune_prefix_paf && p < len_) {
      for (std::size_t u = 1; u <= half_; ++u)
        if (std::abs(partial_[u]) > open_[p][u]) {
          ++result_.prefix_paf_cuts;
          return false;
        }
    }
    return true;
  }

  void leaf() {
    ++result_.examined;
    for (std::size_t u = 1; u <= half_; ++u)
      if (partial_[u] != 0) return;
    std::string s(len_, '+');
    for (std::size_t k = 0; k < len_; ++k)
      if (h_[k] < 0) s[k] = '-';
    result_.solutions.push_back(std::move(s));
  }

  void descend(std::size_t depth) {
    if (aborted_) return;
    if (has_deadline_ && (++ticks_ & 0xFFFF) == 0) {
      if (expired_->load(std::memory_order_relaxed) || std::chrono::steady_clock::now() >= deadline_) {
        expired_->store(true, std::memory_order_relaxed);
        aborted_ = true;
        return;
      }
    }
    if (depth == len_) {
      leaf();
      return;
    }
    for (int s : {1, -1}) {
      place(depth, s);
      if (feasible(depth + 1)) descend(depth + 1);
      unplace(depth);
      if (aborted_) return;
    }
  }

  const SearchConfig& cfg_;
  std::size_t len_;
  std::size_t half_;
  std::vector<int> h_;
  std::vector<int> partial_;  // partial_[u], u in 1..L/2
  std::vector<std::vector<int>> open_;
  std::vector<std::size_t> allowed_minus_;
  std::size_t minus_ = 0;
  ShardResult result_;
  std::atomic<bool>* expired_;
  std::chrono::steady_clock::time_point deadline_;
  bool has_deadline_;
  bool aborted_ = false;
  std::uint64_t ticks_ = 0;
};

inline std::vector<int> prefix_from_index(std::size_t index, std::size_t depth) {
  // h[0] = +1; bit (depth - 1 - k) of index set means h[k] = -1 for k >= 1, so
  // shard order is lexicographic with + before -.
  std::vector<int> prefix(depth, 1);
  for (std::size_t k = 1; k < depth; ++k)
    if ((index >> (depth - 1 - k)) & 1U) prefix[k] = -1;
  return prefix;
}

inline std::string prefix_string(const std::vector<int>& prefix) {
  std::string s;
  for (int v : prefix) s.push_back(v > 0 ? '+' : '-');
  return s;
}

// Ledger file: header "# circhad-ledger order=<L> depth=<d> prunes=<names>",
// then one line per finished shard:
//   <prefix> done examined=<n> row_sum_cuts=<n> prefix_paf_cuts=<n> solutions=<s;s;...|->
inline std::string ledger_header(const SearchConfig& cfg) {
  return "# circhad-ledger order=" + std::to_string(cfg.order) + " depth=" + std::to_string(cfg.effective_depth()) +
         " prunes=" + cfg.prune_names();
}

inline std::string ledger_line(const std::string& prefix, const ShardResult& r) {
  std::string sols;
  for (const std::string& s : r.solutions) sols += (sols.empty() ? "" : ";") + s;
  return prefix + " done examined=" + std::to_string(r.examined) + " row_sum_cuts=" + std::to_string(r.row_sum_cuts) +
         " prefix_paf_cuts=" + std::to_string(r.prefix_paf_cuts) + " solutions=" + (sols.empty() ? "-" : sols);
}

inline std::map<std::string, ShardResult> read_ledger(const std::filesystem::path& path, const SearchConfig& cfg) {
  std::map<std::string, ShardResult> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line != ledger_header(cfg))
        throw usage_error("ledger " + path.string() + " was written for a different search: " + line);
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string prefix, status, ex, rc, pc, sol;
    fields >> prefix >> status >> ex >> rc >> pc >> sol;
    auto value_of = [&](const std::string& field, const std::string& key) -> std::string {
      if (field.rfind(key + "=", 0) != 0)
        throw usage_error("ledger line " + std::to_string(line_no) + ": expected " + key + "=...");
      return field.substr(key.size() + 1);
    };
    if (status != "done") continue;
    ShardResult r;
    r.examined = std::stoull(value_of(ex, "examined"));
    r.row_sum_cuts = std::stoull(value_of(rc, "row_sum_cuts"));
    r.prefix_paf_cuts = std::stoull(value_of(pc, "prefix_paf_cuts"));
    const std::string list = value_of(sol, "solutions");
    if (list != "-") {
      std::size_t pos = 0;
      while (pos <= list.size()) {
        std::size_t semi = list.find(';', pos);
        if (semi == std::string::npos) semi = list.size();
        r.solutions.push_back(list.substr(pos, semi - pos));
        pos = semi + 1;
      }
    }
    done[prefix] = std::move(r);
  }
  if (!done.empty() && !header_seen) throw usage_error("ledger " + path.string() + " has no header line");
  return done;
}

}  // namespace detail

/// Runs a single shard, given as the prefix string starting with '+'.
inline ShardResult search_shard(const SearchConfig& cfg, const std::string& prefix) {
  cfg.validate();
  if (prefix.empty() || prefix.front() != '+' || prefix.size() > cfg.order)
    throw usage_error("shard prefix must start with '+' and fit the order");
  std::vector<int> p;
  for (char c : prefix) p.push_back(value(sign_from_char(c)));
  std::atomic<bool> expired{false};
  return *detail::ShardSearch(cfg, &expired, {}, false).run(p);
}

inline SearchReport search(const SearchConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t depth = cfg.effective_depth();
  const std::size_t shard_count = std::size_t{1} << (depth - 1);

  SearchReport report;
  report.order = cfg.order;
  report.shards_total = shard_count;

  auto finish = [&](SearchReport& r) {
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return r;
  };

  if (cfg.prune_row_sum && rowsum_prune_applicable(cfg.order)) {
    report.prunes.order_rejected = true;
    report.shards_completed = shard_count;
    return finish(report);
  }

  std::map<std::string, ShardResult> from_ledger;
  std::ofstream ledger_out;
  if (cfg.ledger) {
    from_ledger = detail::read_ledger(*cfg.ledger, cfg);
    const bool fresh = !std::filesystem::exists(*cfg.ledger) || std::filesystem::file_size(*cfg.ledger) == 0;
    ledger_out.open(*cfg.ledger, std::ios::app);
    if (!ledger_out) throw usage_error("cannot open ledger " + cfg.ledger->string());
    if (fresh) ledger_out << detail::ledger_header(cfg) << '\n' << std::flush;
  }

  std::vector<std::optional<ShardResult>> results(shard_count);
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < shard_count; ++i) {
    auto it = from_ledger.find(detail::prefix_string(detail::prefix_from_index(i, depth)));
    if (it != from_ledger.end())
      results[i] = it->second;
    else
      pending.push_back(i);
  }

  const bool has_deadline = cfg.budget_seconds.has_value();
  const auto deadline =
      started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(cfg.budget_seconds.value_or(0)));
  std::atomic<bool> expired{false};
  std::atomic<std::size_t> next{0};
  std::mutex ledger_mutex;

  auto worker = [&] {
    detail::ShardSearch engine(cfg, &expired, deadline, has_deadline);
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      if (has_deadline && (expired.load() || std::chrono::steady_clock::now() >= deadline)) {
        expired.store(true);
        return;
      }
      const std::size_t idx = pending[k];
      const std::vector<int> prefix = detail::prefix_from_index(idx, depth);
      std::optional<ShardResult> r = engine.run(prefix);
      if (!r) return;
      if (ledger_out.is_open()) {
        std::lock_guard lock(ledger_mutex);
        ledger_out << detail::ledger_line(detail::prefix_string(prefix), *r) << '\n' << std::flush;
      }
      results[idx] = std::move(r);
    }
  };

  const std::size_t threads = std::min(cfg.workers, std::max<std::size_t>(pending.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  ShardResult total;
  for (const std::optional<ShardResult>& r : results) {
    if (!r) continue;
    total = merge(total, *r);
    ++report.shards_completed;
  }
  report.incomplete = report.shards_completed != shard_count;
  report.sequences_examined = total.examined;
  report.prunes.row_sum_cuts = total.row_sum_cuts;
  report.prunes.prefix_paf_cuts = total.prefix_paf_cuts;

  for (const std::string& s : total.solutions) {
    SignSequence h = SignSequence::parse(s);
    report.solutions.push_back(negate(h));
    report.solutions.push_back(std::move(h));
  }
  std::sort(report.solutions.begin(), report.solutions.end());

  if (cfg.canonicalize) {
    for (const SignSequence& h : report.solutions) report.canonical.push_back(canonical_representative(h));
    std::sort(report.canonical.begin(), report.canonical.end());
    report.canonical.erase(std::unique(report.canonical.begin(), report.canonical.end()), report.canonical.end());
  }
  return finish(report);
}

// ---------------------------------------------------------------------------
// block sequence enumeration

/// Visits every block sequence of the given (even) length in lexicographic
/// order, blocks ordered ++ < +- < -+ < --. A visitor returning bool stops
/// the walk by returning false.
template <typename Visitor>
void for_each_block_sequence(std::size_t length, Visitor&& visit) {
  if (length < 2 || length % 2 != 0 || length > 16) throw usage_error("block sequence length must be even, 2..16");
  static constexpr TwoBlock kBlocks[4] = {
      {Sign::plus, Sign::plus}, {Sign::plus, Sign::minus}, {Sign::minus, Sign::plus}, {Sign::minus, Sign::minus}};
  std::vector<TwoBlock> blocks(length, kBlocks[0]);
  std::vector<int> digit(length, 0);
  for (;;) {
    for (std::size_t i = 0; i < length; ++i) blocks[i] = kBlocks[digit[i]];
    BlockSequence bs(blocks);
    if constexpr (std::is_same_v<std::invoke_result_t<Visitor&, const BlockSequence&>, bool>) {
      if (!visit(static_cast<const BlockSequence&>(bs))) return;
    } else {
      visit(static_cast<const BlockSequence&>(bs));
    }
    std::size_t pos = length;
    while (pos > 0 && digit[pos - 1] == 3) digit[--pos] = 0;
    if (pos == 0) return;
    ++digit[pos - 1];
  }
}

/// Visits, in lexicographic order, every block sequence of length 2n with
/// exactly n even blocks that satisfies `keep`. Requires 1 <= n <= 6.
template <typename Predicate, typename Visitor>
void enumerate_block_sequences(std::size_t n, Predicate&& keep, Visitor&& visit) {
  if (n < 1 || n > 6) throw usage_error("half-length n must be in 1..6, got " + std::to_string(n));
  for_each_block_sequence(2 * n, [&](const BlockSequence& bs) {
    if (even_count(bs) == n && keep(bs)) visit(bs);
  });
}

template <typename Predicate>
std::vector<BlockSequence> collect_block_sequences(std::size_t n, Predicate&& keep) {
  std::vector<BlockSequence> out;
  enumerate_block_sequences(n, keep, [&](const BlockSequence& bs) { out.push_back(bs); });
  return out;
}

}  // namespace circhad

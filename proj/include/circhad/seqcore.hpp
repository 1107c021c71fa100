#pragma once

// Sign sequences, circulant semantics and periodic autocorrelation.
//
// A SignSequence h of length L is the first row of the L x L circulant
// matrix H with H[r][c] = h[(c - r) mod L]. Text form is a string over
// {'+', '-'}, index 0 leftmost. The packed form (to_mask / from_mask) uses
// bit k set <=> h[k] = -1, the convention the searcher works in.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "circhad/error.hpp"

namespace circhad {

enum class Sign : std::int8_t { plus = 1, minus = -1 };

constexpr int value(Sign s) noexcept { return static_cast<int>(s); }
constexpr Sign operator-(Sign s) noexcept { return s == Sign::plus ? Sign::minus : Sign::plus; }
constexpr Sign operator*(Sign a, Sign b) noexcept { return a == b ? Sign::plus : Sign::minus; }
constexpr char to_char(Sign s) noexcept { return s == Sign::plus ? '+' : '-'; }

inline Sign sign_from_char(char c) {
  if (c == '+') return Sign::plus;
  if (c == '-') return Sign::minus;
  throw usage_error(std::string("invalid sign character '") + c + "' (expected '+' or '-')");
}

/// Reduce any integer index into [0, modulus).
constexpr std::size_t reduce_index(std::int64_t i, std::size_t modulus) noexcept {
  const auto m = static_cast<std::int64_t>(modulus);
  std::int64_t r = i % m;
  if (r < 0) r += m;
  return static_cast<std::size_t>(r);
}

class SignSequence {
 public:
  explicit SignSequence(std::vector<Sign> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw usage_error("sign sequence must be non-empty");
  }

  static SignSequence parse(std::string_view text) {
    if (text.empty()) throw usage_error("empty sign sequence");
    std::vector<Sign> entries;
    entries.reserve(text.size());
    for (char c : text) entries.push_back(sign_from_char(c));
    return SignSequence(std::move(entries));
  }

  /// Bit k of `mask` set means entry k is -1. Requires 1 <= length <= 64.
  static SignSequence from_mask(std::uint64_t mask, std::size_t length) {
    if (length == 0 || length > 64) throw usage_error("packed sequences hold 1..64 entries");
    std::vector<Sign> entries(length);
    for (std::size_t k = 0; k < length; ++k) entries[k] = ((mask >> k) & 1U) ? Sign::minus : Sign::plus;
    return SignSequence(std::move(entries));
  }

  std::uint64_t to_mask() const {
    if (entries_.size() > 64) throw usage_error("sequence too long to pack into 64 bits");
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < entries_.size(); ++k)
      if (entries_[k] == Sign::minus) mask |= std::uint64_t{1} << k;
    return mask;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  Sign operator[](std::size_t k) const noexcept { return entries_[k]; }
  /// Cyclic access; any integer index is reduced modulo the length.
  Sign at(std::int64_t k) const noexcept { return entries_[reduce_index(k, entries_.size())]; }
  const std::vector<Sign>& entries() const noexcept { return entries_; }

  std::string to_string() const {
    std::string s;
    s.reserve(entries_.size());
    for (Sign e : entries_) s.push_back(to_char(e));
    return s;
  }

  friend bool operator==(const SignSequence&, const SignSequence&) = default;

  /// Lexicographic with + before -.
  friend bool operator<(const SignSequence& a, const SignSequence& b) { return a.to_string() < b.to_string(); }

 private:
  std::vector<Sign> entries_;
};

struct PafSpectrum {
  std::vector<std::int64_t> values;

  std::size_t size() const noexcept { return values.size(); }
  std::int64_t operator[](std::size_t u) const noexcept { return values[u]; }
  friend bool operator==(const PafSpectrum&, const PafSpectrum&) = default;
};

inline std::int64_t row_sum(const SignSequence& h) {
  std::int64_t s = 0;
  for (Sign e : h.entries()) s += value(e);
  return s;
}

/// Periodic autocorrelation at lag u. Lags in (-L, 0) are taken modulo L.
inline std::int64_t paf(const SignSequence& h, std::int64_t u) {
  const auto length = static_cast<std::int64_t>(h.size());
  if (u >= length || u <= -length)
    throw usage_error("lag " + std::to_string(u) + " out of range for length " + std::to_string(length));
  const std::size_t lag = reduce_index(u, h.size());
  std::int64_t acc = 0;
  for (std::size_t k = 0; k < h.size(); ++k) acc += value(h[k] * h.at(static_cast<std::int64_t>(k + lag)));
  return acc;
}

inline PafSpectrum paf_spectrum(const SignSequence& h) {
  PafSpectrum spectrum;
  spectrum.values.resize(h.size());
  for (std::size_t u = 0; u < h.size(); ++u) spectrum.values[u] = paf(h, static_cast<std::int64_t>(u));
  return spectrum;
}

/// True iff the circulant with first row h is Hadamard. Orders not divisible
/// by 4 give false; orders 1 and 2 are excluded outright.
inline bool is_circulant_hadamard(const SignSequence& h) {
  const std::size_t length = h.size();
  if (length < 4 || length % 4 != 0) return false;
  // paf(u) == paf(L - u), so half the lags suffice.
  for (std::size_t u = 1; u <= length / 2; ++u)
    if (paf(h, static_cast<std::int64_t>(u)) != 0) return false;
  return true;
}

/// Row r of the circulant: entry c is h[(c - r) mod L].
inline SignSequence circulant_row(const SignSequence& h, std::int64_t r) {
  const auto length = static_cast<std::int64_t>(h.size());
  if (r < 0 || r >= length) throw usage_error("row index " + std::to_string(r) + " out of range");
  std::vector<Sign> row(h.size());
  for (std::int64_t c = 0; c < length; ++c) row[static_cast<std::size_t>(c)] = h.at(c - r);
  return SignSequence(std::move(row));
}

inline SignSequence negate(const SignSequence& h) {
  std::vector<Sign> out(h.entries());
  for (Sign& e : out) e = -e;
  return SignSequence(std::move(out));
}

/// Left rotation: result[k] = h[(k + s) mod L].
inline SignSequence rotate(const SignSequence& h, std::int64_t s) {
  std::vector<Sign> out(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) out[k] = h.at(static_cast<std::int64_t>(k) + s);
  return SignSequence(std::move(out));
}

}  // namespace circhad
